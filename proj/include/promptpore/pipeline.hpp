#pragma once

// Batch drivers behind the command-line subcommands. Each driver returns a
// process exit code: 0 when every image was processed, 2 when some were
// skipped or failed. Configuration errors throw.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "promptpore/backend.hpp"
#include "promptpore/centroid_store.hpp"
#include "promptpore/cluster.hpp"
#include "promptpore/errors.hpp"
#include "promptpore/eval.hpp"
#include "promptpore/log.hpp"
#include "promptpore/model_backend.hpp"
#include "promptpore/png_io.hpp"
#include "promptpore/prompts.hpp"
#include "promptpore/synth.hpp"
#include "promptpore/threshold.hpp"

namespace promptpore {

inline constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;

struct PipelineConfig {
    fs::path input;   // directory of layer PNGs, processed in filename order
    fs::path output;  // results directory

    // clustering
    ClusterMethod method = ClusterMethod::kmeans;
    DistanceKind distance = DistanceKind::euclidean;
    int k = 3;
    std::uint64_t seed = 0;
    int dtw_side = 64;
    double dtw_band = 0.1;  // <= 0 disables the band

    // thresholding
    int filter_k = 3;
    int background_floor = 0;
    std::optional<fs::path> roi;

    // prompting
    std::size_t prompt_size = kDefaultPromptSize;
    bool no_prompt = false;

    // backend
    std::string backend = "oracle";  // "oracle" or "model"
    std::vector<fs::path> model_paths;
    std::string runner;
    std::optional<fs::path> oracle_gt;  // directory of <id>.png ground-truth masks
    std::array<double, 3> oracle_scores{0.70, 0.85, 0.95};
    double thresh = kDefaultSelectThreshold;

    // bootstrap and evaluation
    std::size_t bootstrap_iters = kDefaultBootstrapIterations;
    std::optional<fs::path> refs;  // directory of <id>.png reference masks
    std::optional<fs::path> store;  // centroid store; reused by segment/bootstrap when given
    int connectivity = 8;
    double alpha = 0.05;
    int jobs = 1;

    void validate() const
    {
        if (k < 1) throw ArgumentError("--k must be positive");
        if (filter_k < 1 || filter_k % 2 == 0) throw ArgumentError("--filter-k must be odd and positive");
        if (background_floor < 0 || background_floor > 255) throw ArgumentError("--background-floor must lie in [0, 255]");
        if (prompt_size < 1) throw ArgumentError("--prompt-size must be at least 1");
        if (!(thresh >= 0.0 && thresh <= 1.0)) throw ArgumentError("--thresh must lie in [0, 1]");
        if (bootstrap_iters < 1) throw ArgumentError("--bootstrap-iters must be at least 1");
        if (connectivity != 4 && connectivity != 8) throw ArgumentError("--connectivity must be 4 or 8");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("--alpha must lie in (0, 1)");
        if (jobs < 1) throw ArgumentError("--jobs must be positive");
        if (roi && !fs::is_regular_file(*roi)) throw ArgumentError("ROI mask '" + roi->string() + "' not found");
        if (refs && !fs::is_directory(*refs)) throw ArgumentError("reference directory '" + refs->string() + "' not found");
    }

    ThresholdOptions threshold_options() const
    {
        ThresholdOptions t;
        t.filter_k = filter_k;
        t.background_floor = background_floor;
        if (roi) t.roi = load_mask(*roi);
        return t;
    }

    DtwOptions dtw_options() const
    {
        DtwOptions d;
        d.downsample_side = dtw_side;
        d.band_fraction = dtw_band > 0.0 ? std::optional<double>(dtw_band) : std::nullopt;
        return d;
    }

    nlohmann::json to_json() const
    {
        auto path_or_null = [](const std::optional<fs::path>& p) -> nlohmann::json {
            return p ? nlohmann::json(p->string()) : nlohmann::json(nullptr);
        };
        std::vector<std::string> models;
        for (const auto& m : model_paths) models.push_back(m.string());
        return {{"input", input.string()},
                {"output", output.string()},
                {"method", std::string(to_string(method))},
                {"distance", std::string(to_string(distance))},
                {"k", k},
                {"seed", seed},
                {"dtw_side", dtw_side},
                {"dtw_band", dtw_band},
                {"filter_k", filter_k},
                {"background_floor", background_floor},
                {"roi", path_or_null(roi)},
                {"prompt_size", prompt_size},
                {"no_prompt", no_prompt},
                {"backend", backend},
                {"models", models},
                {"runner", runner},
                {"oracle_gt", path_or_null(oracle_gt)},
                {"oracle_scores", oracle_scores},
                {"thresh", thresh},
                {"bootstrap_iters", bootstrap_iters},
                {"refs", path_or_null(refs)},
                {"store", path_or_null(store)},
                {"connectivity", connectivity},
                {"alpha", alpha},
                {"jobs", jobs}};
    }
};

struct LayerImage {
    std::string id;
    GrayImage image;
};

/// PNG files of a directory in lexicographic filename order; the stem is the id.
inline std::vector<fs::path> list_pngs(const fs::path& dir)
{
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw ArgumentError("input directory '" + dir.string() + "' not found");
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
    std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });
    return out;
}

inline std::vector<LayerImage> load_layers(const fs::path& dir)
{
    std::vector<LayerImage> out;
    for (const auto& p : list_pngs(dir)) out.push_back({p.stem().string(), load_gray(p)});
    return out;
}

namespace detail {

inline std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline void write_json(const fs::path& path, const nlohmann::json& j)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(1) << '\n';
}

inline void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

inline std::optional<BinaryMask> load_optional_mask(const std::optional<fs::path>& dir, const std::string& id)
{
    if (!dir) return std::nullopt;
    const auto p = *dir / (id + ".png");
    if (!fs::is_regular_file(p)) return std::nullopt;
    return load_mask(p);
}

}  // namespace detail

/// Factory for one backend instance per image (and thus per worker).
inline BackendFactory make_backend_factory(const PipelineConfig& cfg)
{
    if (cfg.backend == "oracle") {
        if (!cfg.oracle_gt) throw ArgumentError("oracle backend needs --oracle-gt");
        if (!fs::is_directory(*cfg.oracle_gt))
            throw ArgumentError("oracle ground-truth directory '" + cfg.oracle_gt->string() + "' not found");
        const fs::path gt_dir = *cfg.oracle_gt;
        const auto scores = cfg.oracle_scores;
        const int conn = cfg.connectivity;
        return [gt_dir, scores, conn](const std::string& id) -> std::unique_ptr<SegmentationBackend> {
            const auto p = gt_dir / (id + ".png");
            if (!fs::is_regular_file(p)) throw BackendError("oracle has no ground truth for '" + id + "'");
            return make_oracle(load_mask(p), scores, conn);
        };
    }
    if (cfg.backend == "model") {
        ModelFileDescriptor desc;
        desc.model_paths = cfg.model_paths;
        desc.runner = cfg.runner;
        ModelFileBackend probe(desc);  // fail fast on a bad model path
        return [desc](const std::string&) -> std::unique_ptr<SegmentationBackend> {
            return std::make_unique<ModelFileBackend>(desc);
        };
    }
    throw ArgumentError("unknown backend '" + cfg.backend + "' (expected oracle or model)");
}

// ---------------------------------------------------------------------------
// refs

struct RefsResult {
    int exit_code = 0;
    std::size_t written = 0;
    std::vector<std::pair<std::string, std::string>> skipped;  // id, reason
};

/// Reference mask and sidecar for every input image.
inline RefsResult cmd_refs(const PipelineConfig& cfg)
{
    cfg.validate();
    detail::ensure_dir(cfg.output);
    const auto topts = cfg.threshold_options();
    RefsResult res;
    nlohmann::json images = nlohmann::json::array();
    for (const auto& path : list_pngs(cfg.input)) {
        const std::string id = path.stem().string();
        try {
            const auto ref = build_reference_mask(load_gray(path), topts);
            save_mask(ref.mask, cfg.output / (id + ".png"));
            detail::write_json(cfg.output / (id + ".json"),
                               {{"id", id},
                                {"c1", ref.centroids.c1},
                                {"c2", ref.centroids.c2},
                                {"c3", ref.centroids.c3},
                                {"T", ref.centroids.threshold()},
                                {"filter_k", cfg.filter_k},
                                {"background_floor", cfg.background_floor},
                                {"roi", cfg.roi ? nlohmann::json(cfg.roi->string()) : nlohmann::json(nullptr)}});
            ++res.written;
            images.push_back({{"id", id}, {"status", "processed"}});
        } catch (const Error& e) {
            warn(id + ": " + e.what());
            res.skipped.emplace_back(id, e.what());
            images.push_back({{"id", id}, {"status", "skipped"}, {"reason", e.what()}});
        }
    }
    res.exit_code = res.skipped.empty() ? 0 : 2;
    detail::write_json(cfg.output / "refs_manifest.json",
                       {{"tool_version", kVersion}, {"config", cfg.to_json()}, {"images", images},
                        {"finished_at", detail::utc_timestamp()}});
    return res;
}

// ---------------------------------------------------------------------------
// cluster

inline ClusterModel cluster_layers(const std::vector<LayerImage>& layers, const PipelineConfig& cfg)
{
    std::vector<ImageVector> vecs;
    vecs.reserve(layers.size());
    for (const auto& l : layers) vecs.push_back(to_image_vector(l.image, l.id));
    if (cfg.method == ClusterMethod::kmeans) {
        if (cfg.distance != DistanceKind::euclidean) throw ArgumentError("k-means supports only the euclidean distance");
        KMeansOptions o;
        o.k = cfg.k;
        o.seed = cfg.seed;
        return kmeans_images(vecs, o);
    }
    KMedoidsOptions o;
    o.k = cfg.k;
    o.seed = cfg.seed;
    o.distance = cfg.distance;
    o.dtw = cfg.dtw_options();
    o.jobs = cfg.jobs;
    return kmedoids_images(vecs, o);
}

struct ClusterResult {
    int exit_code = 0;
    ClusterModel model;
    std::vector<CentroidRecord> records;
    fs::path store;
};

inline ClusterResult cluster_and_store(const std::vector<LayerImage>& layers, const PipelineConfig& cfg,
                                       const fs::path& store_dir)
{
    ClusterResult res;
    res.model = cluster_layers(layers, cfg);
    res.records = build_centroid_records(res.model, cfg.threshold_options());
    res.store = store_dir;
    save_store(res.records, store_dir);
    nlohmann::json assign = nlohmann::json::object();
    for (std::size_t i = 0; i < res.model.image_ids.size(); ++i) assign[res.model.image_ids[i]] = res.model.assignments[i];
    std::vector<std::string> medoids;
    for (auto m : res.model.medoid_indices) medoids.push_back(res.model.image_ids[m]);
    detail::write_json(store_dir / "clustering.json",
                       {{"method", std::string(to_string(res.model.method))},
                        {"distance", std::string(to_string(res.model.distance))},
                        {"k", res.model.k},
                        {"seed", res.model.seed},
                        {"objective", res.model.objective},
                        {"objective_trace", res.model.objective_trace},
                        {"cluster_sizes", res.model.cluster_sizes()},
                        {"medoids", medoids},
                        {"assignments", assign},
                        {"dtw", {{"downsample_side", cfg.dtw_side}, {"band_fraction", cfg.dtw_band}}}});
    for (const auto& r : res.records)
        if (!r.usable()) res.exit_code = 2;
    return res;
}

/// Cluster the input layers and write the centroid store (to --store, or
/// <output>/store).
inline ClusterResult cmd_cluster(const PipelineConfig& cfg, std::ostream& log = std::cout)
{
    cfg.validate();
    const auto layers = load_layers(cfg.input);
    const fs::path store_dir = cfg.store ? *cfg.store : cfg.output / "store";
    auto res = cluster_and_store(layers, cfg, store_dir);
    log << "objective " << res.model.objective << "\ncluster sizes";
    for (auto s : res.model.cluster_sizes()) log << ' ' << s;
    log << '\n';
    return res;
}

// ---------------------------------------------------------------------------
// record selection shared by segment and bootstrap

struct RecordPlan {
    std::vector<CentroidRecord> records;
    std::vector<std::optional<std::size_t>> record_of;  // per layer
    std::vector<std::string> reasons;                  // per layer, when no record
    bool reused = false;
};

inline std::optional<std::size_t> nearest_usable_record(const GrayImage& img, const std::vector<CentroidRecord>& records)
{
    std::optional<std::size_t> best;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < records.size(); ++r) {
        if (!records[r].usable() || !records[r].centroid_image.same_shape(img)) continue;
        const double d = euclidean(img.data(), records[r].centroid_image.data());
        if (d < bd) {
            bd = d;
            best = r;
        }
    }
    return best;
}

/// Fresh mode clusters the layers and prompts each from its own cluster's
/// record. Reuse mode loads --store and prompts each layer from the nearest
/// stored centroid. A layer whose record is unusable falls back to the
/// nearest usable one.
inline RecordPlan plan_records(const std::vector<LayerImage>& layers, const PipelineConfig& cfg)
{
    RecordPlan plan;
    plan.record_of.assign(layers.size(), std::nullopt);
    plan.reasons.assign(layers.size(), "");
    std::vector<std::optional<std::size_t>> preferred(layers.size());
    if (cfg.store) {
        if (!fs::is_regular_file(*cfg.store / "store.json"))
            throw ArgumentError("centroid store '" + cfg.store->string() + "' not found");
        plan.records = load_store(*cfg.store);
        plan.reused = true;
    } else {
        auto res = cluster_and_store(layers, cfg, cfg.output / "store");
        plan.records = std::move(res.records);
        for (std::size_t i = 0; i < layers.size(); ++i) preferred[i] = res.model.assignments[i];
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (preferred[i] && plan.records[*preferred[i]].usable()) {
            plan.record_of[i] = preferred[i];
            continue;
        }
        plan.record_of[i] = nearest_usable_record(layers[i].image, plan.records);
        if (!plan.record_of[i]) plan.reasons[i] = "no usable centroid record matches this image";
    }
    return plan;
}

// ---------------------------------------------------------------------------
// segment

struct SegmentRecord {
    std::string id;
    std::string status;  // processed | skipped
    std::string reason;
    std::string record;
    int chosen_index = -1;
    std::array<double, 3> scores{};
    std::size_t prompt_count = 0;
    std::optional<double> dsc;
    double seconds = 0.0;
};

struct SegmentRunResult {
    int exit_code = 0;
    std::vector<SegmentRecord> images;
    double mean_dsc = 0.0;
    double std_dsc = 0.0;
    std::size_t scored = 0;
};

/// Segment every input layer; writes mask_<id>.png, meta_<id>.json and manifest.json.
inline SegmentRunResult cmd_segment(const PipelineConfig& cfg)
{
    cfg.validate();
    if (cfg.no_prompt && cfg.backend != "model")
        throw ArgumentError("--no-prompt is only meaningful with the model backend");
    detail::ensure_dir(cfg.output);
    const std::string started = detail::utc_timestamp();
    const auto layers = load_layers(cfg.input);
    const auto factory = make_backend_factory(cfg);
    const RecordPlan plan = plan_records(layers, cfg);
    SegmentOptions sopts;
    sopts.thresh = cfg.thresh;
    sopts.filter_k = cfg.filter_k;

    std::vector<SegmentRecord> out(layers.size());
    detail::parallel_for(layers.size(), cfg.jobs, [&](std::size_t i) {
        auto& rec = out[i];
        rec.id = layers[i].id;
        if (!plan.record_of[i] && !cfg.no_prompt) {
            rec.status = "skipped";
            rec.reason = plan.reasons[i];
            return;
        }
        try {
            auto backend = factory(rec.id);
            const auto t0 = std::chrono::steady_clock::now();
            PromptSet prompts;
            if (!cfg.no_prompt) {
                const auto& record = plan.records[*plan.record_of[i]];
                prompts = generate_prompts(record, cfg.prompt_size, derive_seed(cfg.seed, i));
                rec.record = record.id();
            }
            const auto r = segment_with_prompts(layers[i].image, prompts, *backend, sopts);
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rec.chosen_index = r.chosen_index;
            rec.scores = r.scores;
            rec.prompt_count = r.prompt_count;
            if (auto ref = detail::load_optional_mask(cfg.refs, rec.id)) rec.dsc = dsc(r.mask, *ref);
            save_mask(r.mask, cfg.output / ("mask_" + rec.id + ".png"));
            detail::write_json(cfg.output / ("meta_" + rec.id + ".json"),
                               {{"id", rec.id},
                                {"record", rec.record},
                                {"chosen_index", rec.chosen_index},
                                {"scores", rec.scores},
                                {"prompt_count", rec.prompt_count},
                                {"seconds", rec.seconds}});
            rec.status = "processed";
        } catch (const Error& e) {
            rec.status = "skipped";
            rec.reason = e.what();
        }
    });

    SegmentRunResult res;
    res.images = std::move(out);
    std::vector<double> scores;
    nlohmann::json per = nlohmann::json::array();
    for (const auto& r : res.images) {
        if (r.status != "processed") {
            warn(r.id + ": " + r.reason);
            res.exit_code = 2;
        }
        if (r.dsc) scores.push_back(*r.dsc);
        nlohmann::json j = {{"id", r.id}, {"status", r.status}};
        if (r.status == "processed") {
            j["record"] = r.record;
            j["chosen_index"] = r.chosen_index;
            j["scores"] = r.scores;
            j["prompt_count"] = r.prompt_count;
            j["dsc"] = r.dsc ? nlohmann::json(*r.dsc) : nlohmann::json(nullptr);
            j["seconds"] = r.seconds;
        } else {
            j["reason"] = r.reason;
        }
        per.push_back(std::move(j));
    }
    res.scored = scores.size();
    std::tie(res.mean_dsc, res.std_dsc) = mean_std(scores);
    detail::write_json(cfg.output / "manifest.json",
                       {{"tool_version", kVersion},
                        {"mode", plan.reused ? "reuse" : "fresh"},
                        {"config", cfg.to_json()},
                        {"images", per},
                        {"aggregate", {{"scored", res.scored}, {"mean_dsc", res.mean_dsc}, {"std_dsc", res.std_dsc}}},
                        {"started_at", started},
                        {"finished_at", detail::utc_timestamp()}});
    return res;
}

// ---------------------------------------------------------------------------
// bootstrap

struct BootstrapRunResult {
    int exit_code = 0;
    BootstrapReport report;
};

/// Bootstrap every layer that has a reference mask; writes report.csv and report.json.
inline BootstrapRunResult cmd_bootstrap(const PipelineConfig& cfg)
{
    cfg.validate();
    if (!cfg.refs) throw ArgumentError("bootstrap needs --refs with reference masks");
    detail::ensure_dir(cfg.output);
    const auto layers = load_layers(cfg.input);
    const auto factory = make_backend_factory(cfg);
    const RecordPlan plan = plan_records(layers, cfg);

    std::vector<EvalImage> items;
    std::vector<std::string> unplanned;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (!plan.record_of[i]) {
            warn(layers[i].id + ": " + plan.reasons[i]);
            unplanned.push_back(layers[i].id);
            continue;
        }
        items.push_back({layers[i].id, layers[i].image, detail::load_optional_mask(cfg.refs, layers[i].id),
                         *plan.record_of[i]});
    }

    BootstrapEvalOptions o;
    o.prompt_size = cfg.prompt_size;
    o.iterations = cfg.bootstrap_iters;
    o.seed = cfg.seed;
    o.alpha = cfg.alpha;
    o.segment.thresh = cfg.thresh;
    o.segment.filter_k = cfg.filter_k;
    o.jobs = cfg.jobs;

    BootstrapRunResult res;
    res.report = run_bootstrap_eval(items, plan.records, factory, o);
    for (auto& id : unplanned) res.report.skipped.push_back(id);
    res.exit_code = res.report.skipped.empty() ? 0 : 2;

    {
        std::ofstream csv(cfg.output / "report.csv", std::ios::binary);
        if (!csv) throw IoError("cannot write report.csv");
        write_bootstrap_csv(res.report, csv);
    }
    auto j = bootstrap_report_json(res.report);
    j["tool_version"] = kVersion;
    j["mode"] = plan.reused ? "reuse" : "fresh";
    j["config"] = cfg.to_json();
    detail::write_json(cfg.output / "report.json", j);
    return res;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
    SyntheticSpec spec;
    int layers = 1;
    Drift drift = Drift::reshuffle;
    fs::path output;
};

/// Writes images/, gt/, roi/ as layer_NNN.png plus spec.json.
inline int cmd_synth(const SynthOptions& opts)
{
    for (const auto* sub : {"images", "gt", "roi"}) detail::ensure_dir(opts.output / sub);
    const auto stack = generate_stack(opts.spec, opts.layers, opts.drift);
    for (std::size_t i = 0; i < stack.size(); ++i) {
        std::ostringstream name;
        name << "layer_" << std::setw(3) << std::setfill('0') << i << ".png";
        save_gray(stack[i].image, opts.output / "images" / name.str());
        save_mask(stack[i].gt, opts.output / "gt" / name.str());
        save_mask(stack[i].roi, opts.output / "roi" / name.str());
    }
    auto j = to_json(opts.spec);
    j["layers"] = opts.layers;
    j["drift"] = opts.drift == Drift::none ? "none" : "reshuffle";
    detail::write_json(opts.output / "spec.json", j);
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
    fs::path predictions;  // directory of <id>.png or mask_<id>.png
    fs::path references;   // directory of <id>.png
    std::optional<fs::path> roi;
    int connectivity = 8;
    fs::path output;
};

inline constexpr const char* kEvalCsvHeader =
    "id,dsc,pred_instances,ref_instances,pred_porosity_pct,ref_porosity_pct";

/// Score prediction masks against references; writes eval.csv and eval.json.
inline int cmd_eval(const EvalOptions& opts)
{
    if (opts.connectivity != 4 && opts.connectivity != 8) throw ArgumentError("--connectivity must be 4 or 8");
    if (!fs::is_directory(opts.references))
        throw ArgumentError("reference directory '" + opts.references.string() + "' not found");
    detail::ensure_dir(opts.output);
    std::optional<BinaryMask> roi;
    if (opts.roi) roi = load_mask(*opts.roi);

    std::ofstream csv(opts.output / "eval.csv", std::ios::binary);
    if (!csv) throw IoError("cannot write eval.csv");
    csv << kEvalCsvHeader << '\n';
    nlohmann::json per = nlohmann::json::array();
    std::vector<double> scores;
    int exit_code = 0;
    for (const auto& p : list_pngs(opts.predictions)) {
        std::string id = p.stem().string();
        if (id.rfind("mask_", 0) == 0) id = id.substr(5);
        const auto ref_path = opts.references / (id + ".png");
        if (!fs::is_regular_file(ref_path)) {
            warn(id + ": no reference mask; skipped");
            per.push_back({{"id", id}, {"status", "skipped"}, {"reason", "no reference mask"}});
            exit_code = 2;
            continue;
        }
        const auto pred = load_mask(p);
        const auto ref = load_mask(ref_path);
        const double d = dsc(pred, ref);
        const auto pi = count_instances(pred, opts.connectivity);
        const auto ri = count_instances(ref, opts.connectivity);
        const double pp = porosity_pct(pred, roi);
        const double rp = porosity_pct(ref, roi);
        scores.push_back(d);
        csv << id << ',' << format_real(d) << ',' << pi << ',' << ri << ',' << format_real(pp) << ','
            << format_real(rp) << '\n';
        per.push_back({{"id", id},
                       {"status", "processed"},
                       {"dsc", d},
                       {"pred_instances", pi},
                       {"ref_instances", ri},
                       {"pred_porosity_pct", pp},
                       {"ref_porosity_pct", rp}});
    }
    const auto [mean, sd] = mean_std(scores);
    detail::write_json(opts.output / "eval.json",
                       {{"tool_version", kVersion},
                        {"images", per},
                        {"connectivity", opts.connectivity},
                        {"dsc", {{"mean", mean}, {"std", sd}, {"count", scores.size()}}}});
    return exit_code;
}

}  // namespace promptpore

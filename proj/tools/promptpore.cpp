// promptpore command-line interface.
//
//   promptpore synth     --out DIR [--layers N] [--side S] [--pores P] ...
//   promptpore refs      --input DIR --out DIR [--filter-k K] [--background-floor B] [--roi MASK]
//   promptpore cluster   --input DIR --out DIR [--method kmeans|kmedoids] [--distance euclidean|dtw] [--k K]
//   promptpore segment   --input DIR --out DIR [--store DIR] --backend oracle|model ...
//   promptpore bootstrap --input DIR --out DIR --refs DIR [--bootstrap-iters B] ...
//   promptpore eval      --pred DIR --refs DIR --out DIR [--connectivity 4|8]
//
// Pipeline commands also read options from a key = value file given with
// --config (keys are the long option names without the leading dashes, e.g.
// `background-floor = 10`) under a section named after the command, e.g.
// `[segment]`; flags on the command line win.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "promptpore/promptpore.hpp"

namespace pp = promptpore;

namespace {

std::array<double, 3> parse_scores(const std::string& s)
{
    std::array<double, 3> out{};
    std::stringstream ss(s);
    std::string item;
    std::size_t n = 0;
    while (std::getline(ss, item, ',')) {
        if (n == 3) throw pp::ArgumentError("--oracle-scores takes exactly three values");
        out[n++] = std::stod(item);
    }
    if (n != 3) throw pp::ArgumentError("--oracle-scores takes exactly three values");
    return out;
}

struct RawOptions {
    std::string input, output, method = "kmeans", distance = "euclidean", roi, backend = "oracle", runner,
                oracle_gt, oracle_scores = "0.70,0.85,0.95", refs, store;
    std::vector<std::string> models;
};

void add_pipeline_options(CLI::App* app, pp::PipelineConfig& cfg, RawOptions& raw, bool backend_opts,
                          bool cluster_opts)
{
    app->add_option("--input", raw.input, "Directory of layer PNGs (filename order = layer order)")->required();
    app->add_option("--out", raw.output, "Output directory")->required();
    app->add_option("--filter-k", cfg.filter_k, "Median filter window (odd)")->capture_default_str();
    app->add_option("--background-floor", cfg.background_floor, "Intensities at or below this are never foreground")
        ->capture_default_str();
    app->add_option("--roi", raw.roi, "Region-of-interest mask PNG applied to thresholding");
    app->add_option("--seed", cfg.seed, "Seed for clustering and prompt sampling")->capture_default_str();
    app->add_option("--jobs", cfg.jobs, "Worker threads")->capture_default_str();
    app->add_option("--store", raw.store, "Centroid store directory (reused by segment/bootstrap when given)");
    if (cluster_opts) {
        app->add_option("--method", raw.method, "kmeans or kmedoids")->capture_default_str();
        app->add_option("--distance", raw.distance, "euclidean or dtw (kmedoids)")->capture_default_str();
        app->add_option("--k", cfg.k, "Number of image clusters")->capture_default_str();
        app->add_option("--dtw-side", cfg.dtw_side, "Downsample side before DTW (0 = none)")->capture_default_str();
        app->add_option("--dtw-band", cfg.dtw_band, "Sakoe-Chiba radius as a fraction of length (0 = none)")
            ->capture_default_str();
    }
    if (backend_opts) {
        app->add_option("--prompt-size", cfg.prompt_size, "Points per prompt set")->capture_default_str();
        app->add_option("--backend", raw.backend, "oracle or model")->capture_default_str();
        app->add_option("--model", raw.models, "Model file(s) for the model backend");
        app->add_option("--runner", raw.runner, "Runner command for the model backend");
        app->add_option("--oracle-gt", raw.oracle_gt, "Ground-truth mask directory for the oracle backend");
        app->add_option("--oracle-scores", raw.oracle_scores, "Oracle predicted-IoU scores s0,s1,s2")
            ->capture_default_str();
        app->add_option("--thresh", cfg.thresh, "Select the subpart mask when the part score exceeds this")
            ->capture_default_str();
        app->add_option("--refs", raw.refs, "Reference mask directory for scoring");
        app->add_option("--connectivity", cfg.connectivity, "4 or 8")->capture_default_str();
    }
}

void finalize(pp::PipelineConfig& cfg, const RawOptions& raw)
{
    cfg.input = raw.input;
    cfg.output = raw.output;
    cfg.method = pp::parse_cluster_method(raw.method);
    cfg.distance = pp::parse_distance_kind(raw.distance);
    if (!raw.roi.empty()) cfg.roi = raw.roi;
    cfg.backend = raw.backend;
    for (const auto& m : raw.models) cfg.model_paths.emplace_back(m);
    cfg.runner = raw.runner;
    if (!raw.oracle_gt.empty()) cfg.oracle_gt = raw.oracle_gt;
    cfg.oracle_scores = parse_scores(raw.oracle_scores);
    if (!raw.refs.empty()) cfg.refs = raw.refs;
    if (!raw.store.empty()) cfg.store = raw.store;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Unsupervised point-prompt porosity segmentation for layer-wise XCT images"};
    app.set_config("--config", "", "Key = value configuration file; flags given on the command line win");
    app.fallthrough();
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_version_flag("--version", pp::kVersion);
    app.require_subcommand(1);

    pp::PipelineConfig cfg;
    RawOptions raw;

    auto* refs = app.add_subcommand("refs", "Build reference masks by intensity clustering and thresholding");
    add_pipeline_options(refs, cfg, raw, false, false);

    auto* cluster = app.add_subcommand("cluster", "Cluster layer images and store centroid records");
    add_pipeline_options(cluster, cfg, raw, false, true);

    auto* segment = app.add_subcommand("segment", "Segment layers with centroid-derived point prompts");
    add_pipeline_options(segment, cfg, raw, true, true);
    segment->add_flag("--no-prompt", cfg.no_prompt, "Run the model backend without prompts (baseline)");

    auto* boot = app.add_subcommand("bootstrap", "Bootstrap prompts and report Dice confidence intervals");
    add_pipeline_options(boot, cfg, raw, true, true);
    boot->add_option("--bootstrap-iters", cfg.bootstrap_iters, "Bootstrap iterations B")->capture_default_str();
    boot->add_option("--alpha", cfg.alpha, "Interval level is 1 - alpha")->capture_default_str();

    pp::SynthOptions synth_opts;
    std::string synth_out, drift = "reshuffle";
    auto* synth = app.add_subcommand("synth", "Generate synthetic layers with ground truth");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--layers", synth_opts.layers, "Number of layers")->capture_default_str();
    synth->add_option("--drift", drift, "none or reshuffle")->capture_default_str();
    synth->add_option("--side", synth_opts.spec.side, "Image side")->capture_default_str();
    synth->add_option("--disc-fraction", synth_opts.spec.disc_radius_fraction, "Disc radius / side")
        ->capture_default_str();
    synth->add_option("--pores", synth_opts.spec.pore_count, "Pores per layer (Poisson mean with --poisson)")
        ->capture_default_str();
    synth->add_flag("--poisson", synth_opts.spec.poisson_count, "Draw the pore count from a Poisson law");
    synth->add_option("--radius-min", synth_opts.spec.pore_radius_min, "Minimum pore radius")->capture_default_str();
    synth->add_option("--radius-max", synth_opts.spec.pore_radius_max, "Maximum pore radius")->capture_default_str();
    synth->add_flag("--overlap", synth_opts.spec.allow_overlap, "Allow pores to overlap");
    synth->add_option("--background", synth_opts.spec.background, "Background intensity")->capture_default_str();
    synth->add_option("--solid", synth_opts.spec.solid, "Solid intensity")->capture_default_str();
    synth->add_option("--pore", synth_opts.spec.pore, "Pore intensity")->capture_default_str();
    synth->add_option("--trapped", synth_opts.spec.trapped_probability, "Trapped-particle probability per pore")
        ->capture_default_str();
    synth->add_option("--noise-sigma", synth_opts.spec.gaussian_sigma, "Gaussian noise sigma")->capture_default_str();
    synth->add_option("--salt-pepper", synth_opts.spec.salt_pepper_rate, "Salt-and-pepper rate")
        ->capture_default_str();
    synth->add_option("--seed", synth_opts.spec.seed, "Seed")->capture_default_str();

    pp::EvalOptions eval_opts;
    std::string pred_dir, ref_dir, eval_out, eval_roi;
    auto* eval = app.add_subcommand("eval", "Score masks: Dice, instance counts, porosity");
    eval->add_option("--pred", pred_dir, "Prediction mask directory")->required();
    eval->add_option("--refs", ref_dir, "Reference mask directory")->required();
    eval->add_option("--out", eval_out, "Output directory")->required();
    eval->add_option("--roi", eval_roi, "Region-of-interest mask for porosity");
    eval->add_option("--connectivity", eval_opts.connectivity, "4 or 8")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*synth) {
            synth_opts.output = synth_out;
            synth_opts.drift = pp::parse_drift(drift);
            return pp::cmd_synth(synth_opts);
        }
        if (*eval) {
            eval_opts.predictions = pred_dir;
            eval_opts.references = ref_dir;
            eval_opts.output = eval_out;
            if (!eval_roi.empty()) eval_opts.roi = eval_roi;
            return pp::cmd_eval(eval_opts);
        }
        finalize(cfg, raw);
        if (*refs) return pp::cmd_refs(cfg).exit_code;
        if (*cluster) return pp::cmd_cluster(cfg).exit_code;
        if (*segment) {
            const auto r = pp::cmd_segment(cfg);
            std::cout << "segmented " << r.images.size() << " images";
            if (r.scored) std::cout << ", mean DSC " << r.mean_dsc << " +/- " << r.std_dsc;
            std::cout << '\n';
            return r.exit_code;
        }
        if (*boot) {
            const auto r = pp::cmd_bootstrap(cfg);
            std::cout << "bootstrapped " << r.report.aggregate.images << " images, mean DSC "
                      << r.report.aggregate.mean_dsc << ", mean CI length " << r.report.aggregate.mean_ci_length
                      << " +/- " << r.report.aggregate.std_ci_length << '\n';
            return r.exit_code;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

#pragma once

// Scoring: Dice overlap, bootstrap confidence intervals, instance counts,
// porosity, and the bootstrap evaluation driver.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "promptpore/backend.hpp"
#include "promptpore/centroid_store.hpp"
#include "promptpore/components.hpp"
#include "promptpore/errors.hpp"
#include "promptpore/image.hpp"
#include "promptpore/log.hpp"
#include "promptpore/prompts.hpp"
#include "promptpore/random.hpp"

namespace promptpore {

namespace detail {
inline void require_same_shape(const BinaryMask& a, const BinaryMask& b, const char* what)
{
    if (!a.same_shape(b))
        throw ArgumentError(std::string(what) + ": mask dimensions differ (" + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                            std::to_string(b.height()) + ")");
}

inline std::array<std::size_t, 3> overlap_counts(const BinaryMask& m, const BinaryMask& r)
{
    std::size_t inter = 0, nm = 0, nr = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const bool a = m.data()[i] != 0;
        const bool b = r.data()[i] != 0;
        nm += a;
        nr += b;
        inter += a && b;
    }
    return {inter, nm, nr};
}
}  // namespace detail

/// Dice similarity 2|M∩R| / (|M| + |R|). Two empty masks agree perfectly (1.0).
inline double dsc(const BinaryMask& predicted, const BinaryMask& reference)
{
    detail::require_same_shape(predicted, reference, "dsc");
    const auto [inter, nm, nr] = detail::overlap_counts(predicted, reference);
    if (nm + nr == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(nm + nr);
}

/// Like dsc, but two empty masks yield no score instead of 1.0.
inline std::optional<double> dsc_excluding_empty(const BinaryMask& predicted, const BinaryMask& reference)
{
    detail::require_same_shape(predicted, reference, "dsc");
    const auto [inter, nm, nr] = detail::overlap_counts(predicted, reference);
    if (nm + nr == 0) return std::nullopt;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(nm + nr);
}

/// Quantile with linear interpolation between order statistics: for sorted
/// x[0..n-1], h = (n - 1) p and q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
/// Arithmetic mean, accumulated relative to the first value so that a
/// constant sample returns that constant exactly.
inline double shifted_mean(const std::vector<double>& v)
{
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x - v.front();
    return v.front() + s / static_cast<double>(v.size());
}

inline double quantile_sorted(const std::vector<double>& sorted, double p)
{
    if (sorted.empty()) throw ArgumentError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile probability must lie in [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct BootstrapSummary {
    std::vector<double> scores;
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double alpha = 0.05;

    double length() const noexcept { return ci_high - ci_low; }
};

/// Mean and the [alpha/2, 1 - alpha/2] quantile interval of a bootstrap sample.
inline BootstrapSummary summarize_bootstrap(std::vector<double> scores, double alpha = 0.05)
{
    if (scores.empty()) throw ArgumentError("cannot summarize an empty bootstrap sample");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    BootstrapSummary s;
    s.alpha = alpha;
    s.mean = shifted_mean(scores);
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    s.ci_low = quantile_sorted(sorted, alpha / 2.0);
    s.ci_high = quantile_sorted(sorted, 1.0 - alpha / 2.0);
    s.scores = std::move(scores);
    return s;
}

inline std::size_t count_instances(const BinaryMask& mask, int connectivity = 8)
{
    return static_cast<std::size_t>(label_components(mask, connectivity).count);
}

/// Foreground share of the region of interest, in percent.
inline double porosity_pct(const BinaryMask& mask, const std::optional<BinaryMask>& roi = std::nullopt)
{
    if (!roi) return 100.0 * static_cast<double>(foreground_count(mask)) / static_cast<double>(mask.size());
    detail::require_same_shape(mask, *roi, "porosity_pct");
    const auto [inter, nm, nr] = detail::overlap_counts(mask, *roi);
    (void)nm;
    if (nr == 0) throw ArgumentError("porosity_pct: region of interest is empty");
    return 100.0 * static_cast<double>(inter) / static_cast<double>(nr);
}

/// Mean and sample standard deviation (n - 1; zero for a single value).
inline std::pair<double, double> mean_std(const std::vector<double>& v)
{
    if (v.empty()) return {0.0, 0.0};
    const double mean = shifted_mean(v);
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

// ---------------------------------------------------------------------------
// Bootstrap evaluation

struct EvalImage {
    std::string id;
    GrayImage image;
    std::optional<BinaryMask> reference;
    std::size_t record = 0;  // index into the record list
};

using BackendFactory = std::function<std::unique_ptr<SegmentationBackend>(const std::string& image_id)>;

struct BootstrapEvalOptions {
    std::size_t prompt_size = kDefaultPromptSize;
    std::size_t iterations = kDefaultBootstrapIterations;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    SegmentOptions segment;
    int jobs = 1;
};

struct ImageBootstrap {
    std::string id;
    BootstrapSummary summary;
    std::array<std::size_t, 3> chosen{};  // how often each mask index was selected
};

struct BootstrapAggregate {
    std::size_t images = 0;
    double mean_dsc = 0.0;
    double std_dsc = 0.0;
    double mean_ci_length = 0.0;
    double std_ci_length = 0.0;
};

struct BootstrapReport {
    std::vector<ImageBootstrap> per_image;  // input order
    std::vector<std::string> skipped;
    BootstrapAggregate aggregate;
    BootstrapEvalOptions options;
};

/// For each image: B with-replacement prompt draws from its record, B
/// segmentations, B Dice scores against the reference, summarized. Images
/// without a reference are skipped with a warning. The per-image seed is
/// derive_seed(seed, position), so results do not depend on scheduling.
inline BootstrapReport run_bootstrap_eval(const std::vector<EvalImage>& images,
                                          const std::vector<CentroidRecord>& records, const BackendFactory& make_backend,
                                          const BootstrapEvalOptions& opts = {})
{
    if (opts.iterations < 1) throw ArgumentError("bootstrap iterations must be at least 1");
    for (const auto& im : images)
        if (im.record >= records.size())
            throw ArgumentError("image '" + im.id + "' refers to missing record " + std::to_string(im.record));

    std::vector<std::optional<ImageBootstrap>> results(images.size());
    std::vector<std::exception_ptr> errors(images.size());
    detail::parallel_for(images.size(), opts.jobs, [&](std::size_t i) {
        const auto& im = images[i];
        if (!im.reference) return;
        try {
            auto backend = make_backend(im.id);
            const auto& rec = records[im.record];
            const std::uint64_t image_seed = derive_seed(opts.seed, i);
            ImageBootstrap out;
            out.id = im.id;
            std::vector<double> scores;
            scores.reserve(opts.iterations);
            for (std::size_t b = 0; b < opts.iterations; ++b) {
                const auto prompts = bootstrap_prompt(rec, opts.prompt_size, image_seed, b);
                const auto r = segment_with_prompts(im.image, prompts, *backend, opts.segment);
                scores.push_back(dsc(r.mask, *im.reference));
                ++out.chosen[static_cast<std::size_t>(r.chosen_index)];
            }
            out.summary = summarize_bootstrap(std::move(scores), opts.alpha);
            results[i] = std::move(out);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    BootstrapReport report;
    report.options = opts;
    std::vector<double> means, lengths;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!results[i]) {
            warn("image '" + images[i].id + "' has no reference mask; skipped");
            report.skipped.push_back(images[i].id);
            continue;
        }
        means.push_back(results[i]->summary.mean);
        lengths.push_back(results[i]->summary.length());
        report.per_image.push_back(std::move(*results[i]));
    }
    report.aggregate.images = report.per_image.size();
    std::tie(report.aggregate.mean_dsc, report.aggregate.std_dsc) = mean_std(means);
    std::tie(report.aggregate.mean_ci_length, report.aggregate.std_ci_length) = mean_std(lengths);
    return report;
}

inline constexpr const char* kBootstrapCsvHeader = "id,mean_dsc,ci_low,ci_high,length,chosen_0,chosen_1,chosen_2";

inline std::string format_real(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

inline void write_bootstrap_csv(const BootstrapReport& report, std::ostream& out)
{
    out << kBootstrapCsvHeader << '\n';
    for (const auto& r : report.per_image) {
        out << r.id << ',' << format_real(r.summary.mean) << ',' << format_real(r.summary.ci_low) << ','
            << format_real(r.summary.ci_high) << ',' << format_real(r.summary.length()) << ',' << r.chosen[0] << ','
            << r.chosen[1] << ',' << r.chosen[2] << '\n';
    }
}

/// Aggregate in the shape of the per-sample summary tables.
inline nlohmann::json bootstrap_report_json(const BootstrapReport& report)
{
    nlohmann::json per = nlohmann::json::array();
    for (const auto& r : report.per_image)
        per.push_back({{"id", r.id},
                       {"mean_dsc", r.summary.mean},
                       {"ci_low", r.summary.ci_low},
                       {"ci_high", r.summary.ci_high},
                       {"length", r.summary.length()},
                       {"chosen", r.chosen}});
    return {{"images", report.aggregate.images},
            {"skipped", report.skipped},
            {"dsc", {{"mean", report.aggregate.mean_dsc}, {"std", report.aggregate.std_dsc}}},
            {"ci_length", {{"mean", report.aggregate.mean_ci_length}, {"std", report.aggregate.std_ci_length}}},
            {"bootstrap_iterations", report.options.iterations},
            {"prompt_size", report.options.prompt_size},
            {"alpha", report.options.alpha},
            {"seed", report.options.seed},
            {"per_image", per}};
}

}  // namespace promptpore

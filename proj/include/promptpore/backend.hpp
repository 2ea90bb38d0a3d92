#pragma once

// Promptable segmentation backends and the mask-selection rule.
//
// A backend returns three candidate masks in the source image's resolution,
// indexed 0 = subpart, 1 = part, 2 = whole, in ascending order of the
// predicted IoU rank, each with its predicted IoU score.

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "promptpore/centroid_store.hpp"
#include "promptpore/components.hpp"
#include "promptpore/errors.hpp"
#include "promptpore/geometry.hpp"
#include "promptpore/image.hpp"
#include "promptpore/prompt_set.hpp"
#include "promptpore/prompts.hpp"

namespace promptpore {

inline constexpr double kDefaultSelectThreshold = 0.90;

struct SegmentationTriplet {
    std::array<BinaryMask, 3> masks;
    std::array<double, 3> scores{};

    void validate(int width, int height) const
    {
        for (int i = 0; i < 3; ++i) {
            if (!masks[static_cast<std::size_t>(i)].same_shape(width, height))
                throw BackendError("mask " + std::to_string(i) + " is " +
                                   std::to_string(masks[static_cast<std::size_t>(i)].width()) + "x" +
                                   std::to_string(masks[static_cast<std::size_t>(i)].height()) + ", expected " +
                                   std::to_string(width) + "x" + std::to_string(height));
            const double s = scores[static_cast<std::size_t>(i)];
            if (!(s >= 0.0 && s <= 1.0))
                throw BackendError("score " + std::to_string(i) + " = " + std::to_string(s) + " lies outside [0, 1]");
        }
    }
};

class SegmentationBackend {
public:
    virtual ~SegmentationBackend() = default;

    virtual std::string name() const = 0;

    /// Whether an empty prompt set is a meaningful request (the no-prompt baseline).
    virtual bool accepts_empty_prompts() const { return false; }

    SegmentationTriplet predict(const ModelInput& input, const ModelPromptSet& prompts)
    {
        if (prompts.empty() && !accepts_empty_prompts())
            throw ArgumentError(name() + " backend requires at least one prompt");
        auto t = do_predict(input, prompts);
        t.validate(input.source_width, input.source_height);
        return t;
    }

protected:
    virtual SegmentationTriplet do_predict(const ModelInput& input, const ModelPromptSet& prompts) = 0;
};

/// Test double with known mask semantics: mask 0 is the union of ground-truth
/// components touched by a prompt, mask 1 is the full ground truth, mask 2
/// is the filled disc around the ground-truth support. Scores are fixed.
class OracleBackend final : public SegmentationBackend {
public:
    OracleBackend(BinaryMask ground_truth, std::array<double, 3> scores, int connectivity = 8)
        : gt_(std::move(ground_truth)), scores_(scores), labels_(label_components(gt_, connectivity)),
          whole_(support_disc(gt_))
    {
        for (double s : scores_)
            if (!(s >= 0.0 && s <= 1.0)) throw ArgumentError("oracle scores must lie in [0, 1]");
    }

    std::string name() const override { return "oracle"; }
    const std::array<double, 3>& scores() const noexcept { return scores_; }

protected:
    SegmentationTriplet do_predict(const ModelInput& input, const ModelPromptSet& prompts) override
    {
        if (!gt_.same_shape(input.source_width, input.source_height))
            throw BackendError("oracle ground truth is " + std::to_string(gt_.width()) + "x" +
                               std::to_string(gt_.height()) + " but the image is " +
                               std::to_string(input.source_width) + "x" + std::to_string(input.source_height));
        std::vector<char> hit(static_cast<std::size_t>(labels_.count), 0);
        for (const auto& p : prompts.points) {
            const Point s = input.to_source_pixel(p);
            const int l = labels_.at(s.x, s.y);
            if (l >= 0) hit[static_cast<std::size_t>(l)] = 1;
        }
        BinaryMask sub(gt_.width(), gt_.height());
        for (int y = 0; y < gt_.height(); ++y)
            for (int x = 0; x < gt_.width(); ++x) {
                const int l = labels_.at(x, y);
                if (l >= 0 && hit[static_cast<std::size_t>(l)]) sub.set(x, y, 1);
            }
        return {{std::move(sub), gt_, whole_}, scores_};
    }

private:
    static BinaryMask support_disc(const BinaryMask& gt)
    {
        BinaryMask out(gt.width(), gt.height());
        const auto pts = foreground_points(gt);
        if (pts.empty()) return out;
        double cx = 0.0, cy = 0.0;
        for (const auto& p : pts) {
            cx += p.x;
            cy += p.y;
        }
        cx /= static_cast<double>(pts.size());
        cy /= static_cast<double>(pts.size());
        double r2 = 0.0;
        for (const auto& p : pts) r2 = std::max(r2, (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy));
        for (int y = 0; y < gt.height(); ++y)
            for (int x = 0; x < gt.width(); ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r2) out.set(x, y, 1);
        return out;
    }

    BinaryMask gt_;
    std::array<double, 3> scores_;
    ComponentLabels labels_;
    BinaryMask whole_;
};

inline std::unique_ptr<SegmentationBackend> make_oracle(BinaryMask gt, std::array<double, 3> scores,
                                                        int connectivity = 8)
{
    return std::make_unique<OracleBackend>(std::move(gt), scores, connectivity);
}

struct SelectedMask {
    BinaryMask mask;
    int index = 1;
};

/// Take the part mask unless its score exceeds `thresh`, in which case take
/// the subpart mask.
inline int select_index(const std::array<double, 3>& scores, double thresh = kDefaultSelectThreshold) noexcept
{
    return scores[1] > thresh ? 0 : 1;
}

inline SelectedMask select_mask(const SegmentationTriplet& triplet, double thresh = kDefaultSelectThreshold)
{
    const int idx = select_index(triplet.scores, thresh);
    return {triplet.masks[static_cast<std::size_t>(idx)], idx};
}

struct SegmentOptions {
    double thresh = kDefaultSelectThreshold;
    int filter_k = 3;
};

struct SegmentResult {
    BinaryMask mask;
    int chosen_index = 1;
    std::array<double, 3> scores{};
    std::size_t prompt_count = 0;
};

/// Denoise, move into the model frame, run the backend with the given
/// prompts, and select a mask.
inline SegmentResult segment_with_prompts(const GrayImage& img, const PromptSet& prompts, SegmentationBackend& backend,
                                          const SegmentOptions& opts = {})
{
    const ModelInput input = to_model_input(median_filter(img, opts.filter_k));
    const auto triplet = backend.predict(input, transform_coords(prompts, input));
    auto sel = select_mask(triplet, opts.thresh);
    return {std::move(sel.mask), sel.index, triplet.scores, prompts.size()};
}

/// Full framework for one image: prompts are m pool points of `record`.
inline SegmentResult segment_image(const GrayImage& img, const CentroidRecord& record, std::size_t m,
                                   std::uint64_t seed, SegmentationBackend& backend, const SegmentOptions& opts = {})
{
    return segment_with_prompts(img, generate_prompts(record, m, seed), backend, opts);
}

}  // namespace promptpore

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "promptpore/errors.hpp"
#include "promptpore/image.hpp"

namespace promptpore {

/// Foreground point prompts in the original image frame. Labels are all 1.
struct PromptSet {
    std::vector<Point> points;
    std::vector<int> labels;
    std::string source;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    friend bool operator==(const PromptSet&, const PromptSet&) = default;
};

/// Prompts after mapping into the model frame; coordinates are fractional.
struct ModelPromptSet {
    std::vector<PointF> points;
    std::vector<int> labels;
    std::string source;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
};

inline nlohmann::json to_json(const PromptSet& p)
{
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pt : p.points) pts.push_back({pt.x, pt.y});
    return {{"points", pts}, {"labels", p.labels}, {"source", p.source}, {"seed", p.seed}};
}

inline PromptSet prompt_set_from_json(const nlohmann::json& j)
{
    try {
        PromptSet p;
        for (const auto& pt : j.at("points")) {
            if (!pt.is_array() || pt.size() != 2) throw FormatError("prompt point must be [x, y]");
            p.points.push_back({pt[0].get<int>(), pt[1].get<int>()});
        }
        p.labels = j.at("labels").get<std::vector<int>>();
        p.source = j.at("source").get<std::string>();
        p.seed = j.at("seed").get<std::uint64_t>();
        if (p.labels.size() != p.points.size()) throw FormatError("prompt labels and points differ in length");
        for (int l : p.labels)
            if (l != 1) throw FormatError("prompt labels must all be 1 (foreground)");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed prompt set: ") + e.what());
    }
}

}  // namespace promptpore

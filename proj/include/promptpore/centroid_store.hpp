#pragma once

// Centroid records: a cluster representative image together with the
// foreground coordinates its reference mask yields. Records persist as a
// directory of centroid_<k>.png files plus store.json.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "promptpore/cluster.hpp"
#include "promptpore/errors.hpp"
#include "promptpore/image.hpp"
#include "promptpore/log.hpp"
#include "promptpore/png_io.hpp"
#include "promptpore/threshold.hpp"

namespace promptpore {

struct Provenance {
    std::string method;
    std::string distance;
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> member_ids;  // images assigned to this cluster
    std::string first_layer;              // layer range of the clustering run
    std::string last_layer;
    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct CentroidRecord {
    std::size_t cluster_index = 0;
    GrayImage centroid_image;
    std::vector<Point> foreground_pool;
    IntensityCentroids thresholds;
    Provenance provenance;

    bool usable() const noexcept { return !foreground_pool.empty(); }
    std::string id() const { return "centroid_" + std::to_string(cluster_index); }
    friend bool operator==(const CentroidRecord&, const CentroidRecord&) = default;
};

/// Round each centroid to 8-bit, threshold it, and collect its foreground pixels.
/// A centroid without foreground, or too flat to threshold, yields an unusable
/// record and a warning.
inline std::vector<CentroidRecord> build_centroid_records(const ClusterModel& model, const ThresholdOptions& opts = {})
{
    std::vector<CentroidRecord> out;
    std::string first, last;
    if (!model.image_ids.empty()) {
        first = *std::min_element(model.image_ids.begin(), model.image_ids.end());
        last = *std::max_element(model.image_ids.begin(), model.image_ids.end());
    }
    for (std::size_t c = 0; c < model.centroids.size(); ++c) {
        CentroidRecord rec;
        rec.cluster_index = c;
        rec.centroid_image = to_gray_image(model.centroids[c]);
        rec.provenance.method = std::string(to_string(model.method));
        rec.provenance.distance = std::string(to_string(model.distance));
        rec.provenance.k = model.k;
        rec.provenance.seed = model.seed;
        for (auto i : model.members(c)) rec.provenance.member_ids.push_back(model.image_ids[i]);
        rec.provenance.first_layer = first;
        rec.provenance.last_layer = last;
        try {
            auto ref = build_reference_mask(rec.centroid_image, opts);
            rec.thresholds = ref.centroids;
            rec.foreground_pool = foreground_points(ref.mask);
        } catch (const DegenerateInputError& e) {
            warn(rec.id() + ": " + e.what());
        }
        if (rec.foreground_pool.empty()) warn(rec.id() + " has no foreground pixels and cannot be used for prompting");
        out.push_back(std::move(rec));
    }
    return out;
}

inline void save_store(const std::vector<CentroidRecord>& records, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create store directory '" + dir.string() + "': " + ec.message());

    nlohmann::json doc;
    doc["format"] = "promptpore-centroid-store";
    doc["version"] = 1;
    if (!records.empty()) {
        const auto& p = records.front().provenance;
        doc["method"] = p.method;
        doc["distance"] = p.distance;
        doc["k"] = p.k;
        doc["seed"] = p.seed;
    }
    doc["records"] = nlohmann::json::array();
    for (const auto& r : records) {
        const std::string file = r.id() + ".png";
        save_gray(r.centroid_image, dir / file);
        nlohmann::json pool = nlohmann::json::array();
        for (const auto& pt : r.foreground_pool) pool.push_back({pt.x, pt.y});
        doc["records"].push_back({
            {"cluster_index", r.cluster_index},
            {"image", file},
            {"width", r.centroid_image.width()},
            {"height", r.centroid_image.height()},
            {"usable", r.usable()},
            {"thresholds", {{"c1", r.thresholds.c1}, {"c2", r.thresholds.c2}, {"c3", r.thresholds.c3}}},
            {"pool", pool},
            {"provenance",
             {{"method", r.provenance.method},
              {"distance", r.provenance.distance},
              {"k", r.provenance.k},
              {"seed", r.provenance.seed},
              {"member_ids", r.provenance.member_ids},
              {"first_layer", r.provenance.first_layer},
              {"last_layer", r.provenance.last_layer}}},
        });
    }
    std::ofstream out(dir / "store.json");
    if (!out) throw IoError("cannot write '" + (dir / "store.json").string() + "'");
    out << doc.dump(1) << '\n';
}

inline std::vector<CentroidRecord> load_store(const std::filesystem::path& dir)
{
    const auto manifest = dir / "store.json";
    std::ifstream in(manifest);
    if (!in) throw IoError("cannot read centroid store '" + manifest.string() + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("centroid store '" + manifest.string() + "' is not valid JSON: " + e.what());
    }

    std::vector<CentroidRecord> out;
    if (!doc.contains("records") || !doc["records"].is_array())
        throw FormatError("centroid store '" + manifest.string() + "' lacks a records array");
    for (std::size_t i = 0; i < doc["records"].size(); ++i) {
        const auto& j = doc["records"][i];
        const std::string where = "record " + std::to_string(i);
        try {
            CentroidRecord r;
            r.cluster_index = j.at("cluster_index").get<std::size_t>();
            const std::string label = "record " + std::to_string(i) + " (centroid_" + std::to_string(r.cluster_index) + ")";
            r.centroid_image = load_gray(dir / j.at("image").get<std::string>());
            if (!r.centroid_image.same_shape(j.at("width").get<int>(), j.at("height").get<int>()))
                throw FormatError(label + ": image dimensions disagree with store.json");
            for (const auto& pt : j.at("pool")) {
                if (!pt.is_array() || pt.size() != 2) throw FormatError(label + ": pool entries must be [x, y]");
                const Point p{pt[0].get<int>(), pt[1].get<int>()};
                if (!r.centroid_image.contains(p))
                    throw FormatError(label + ": pool coordinate (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                                      ") lies outside the centroid image");
                r.foreground_pool.push_back(p);
            }
            if (j.at("usable").get<bool>() != r.usable())
                throw FormatError(label + ": usable flag disagrees with the pool");
            const auto& t = j.at("thresholds");
            r.thresholds = {t.at("c1").get<double>(), t.at("c2").get<double>(), t.at("c3").get<double>()};
            const auto& p = j.at("provenance");
            r.provenance.method = p.at("method").get<std::string>();
            r.provenance.distance = p.at("distance").get<std::string>();
            r.provenance.k = p.at("k").get<int>();
            r.provenance.seed = p.at("seed").get<std::uint64_t>();
            r.provenance.member_ids = p.at("member_ids").get<std::vector<std::string>>();
            r.provenance.first_layer = p.at("first_layer").get<std::string>();
            r.provenance.last_layer = p.at("last_layer").get<std::string>();
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("centroid store " + where + ": " + e.what());
        } catch (const IoError& e) {
            throw FormatError("centroid store " + where + ": " + e.what());
        }
    }
    return out;
}

}  // namespace promptpore

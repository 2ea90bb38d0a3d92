#pragma once

// Backend that runs an exported promptable-segmentation network through an
// external runner process. Exchange happens in a scratch directory:
//
//   written by us      image.png      side x side RGB model-frame image
//                      request.json   model paths, geometry, model-frame prompts
//   written by runner  logits.f32     3 x side x side little-endian float32 mask logits
//                      response.json  {"scores": [s0, s1, s2]}
//
// Logits are binarized at 0, the masks reordered by ascending score, and
// resampled to the source resolution with nearest neighbor.

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "promptpore/backend.hpp"
#include "promptpore/errors.hpp"
#include "promptpore/geometry.hpp"
#include "promptpore/png_io.hpp"

namespace promptpore {

struct ModelFileDescriptor {
    std::vector<std::filesystem::path> model_paths;  // encoder and decoder graphs, or one combined file
    std::string runner;                               // command; invoked as `<runner> <workdir>`
    std::string device = "cpu";
    bool keep_workdir = false;
};

/// True if the file starts like a serialized ONNX ModelProto (field 1, varint).
inline bool looks_like_onnx(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    char first = 0;
    return in.get(first) && static_cast<unsigned char>(first) == 0x08;
}

class ModelFileBackend final : public SegmentationBackend {
public:
    explicit ModelFileBackend(ModelFileDescriptor desc) : desc_(std::move(desc))
    {
        if (desc_.model_paths.empty()) throw BackendError("model-file backend needs at least one model path");
        for (const auto& p : desc_.model_paths) {
            std::error_code ec;
            if (!std::filesystem::is_regular_file(p, ec)) throw BackendError("model file '" + p.string() + "' not found");
            if (!looks_like_onnx(p))
                throw BackendError("model file '" + p.string() + "' is not a serialized ONNX model");
        }
        if (desc_.runner.empty()) throw BackendError("model-file backend needs a runner command");
    }

    std::string name() const override { return "model-file"; }
    bool accepts_empty_prompts() const override { return true; }

protected:
    SegmentationTriplet do_predict(const ModelInput& input, const ModelPromptSet& prompts) override
    {
        static std::atomic<unsigned> counter{0};
        const auto work = std::filesystem::temp_directory_path() /
                          ("promptpore_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(work);
        struct Cleanup {
            std::filesystem::path dir;
            bool keep;
            ~Cleanup()
            {
                std::error_code ec;
                if (!keep) std::filesystem::remove_all(dir, ec);
            }
        } cleanup{work, desc_.keep_workdir};

        save_rgb(input.side, input.side, input.pixels, work / "image.png");
        nlohmann::json req;
        std::vector<std::string> models;
        for (const auto& p : desc_.model_paths) models.push_back(std::filesystem::absolute(p).string());
        req["models"] = models;
        req["device"] = desc_.device;
        req["side"] = input.side;
        req["scale"] = input.scale;
        req["content_width"] = input.content_width;
        req["content_height"] = input.content_height;
        req["source_width"] = input.source_width;
        req["source_height"] = input.source_height;
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : prompts.points) pts.push_back({p.x, p.y});
        req["points"] = pts;
        req["labels"] = prompts.labels;
        {
            std::ofstream out(work / "request.json");
            out << req.dump() << '\n';
        }

        const std::string cmd = desc_.runner + " '" + work.string() + "'";
        if (const int rc = std::system(cmd.c_str()); rc != 0)
            throw BackendError("runner failed (exit status " + std::to_string(rc) + ") for model '" +
                               desc_.model_paths.front().string() + "'");

        const auto side = static_cast<std::size_t>(input.side);
        const std::size_t plane = side * side;
        std::ifstream lin(work / "logits.f32", std::ios::binary | std::ios::ate);
        if (!lin) throw BackendError("runner produced no logits for model '" + desc_.model_paths.front().string() + "'");
        const auto bytes = static_cast<std::size_t>(lin.tellg());
        if (bytes != 3 * plane * sizeof(float))
            throw BackendError("model '" + desc_.model_paths.front().string() + "' returned " +
                               std::to_string(bytes / sizeof(float)) + " logits; expected tensor shape [3, " +
                               std::to_string(side) + ", " + std::to_string(side) + "]");
        std::vector<float> logits(3 * plane);
        lin.seekg(0);
        lin.read(reinterpret_cast<char*>(logits.data()), static_cast<std::streamsize>(bytes));
        if constexpr (std::endian::native == std::endian::big) {
            for (auto& f : logits) {
                auto u = std::bit_cast<std::uint32_t>(f);
                u = ((u & 0xFFu) << 24) | ((u & 0xFF00u) << 8) | ((u >> 8) & 0xFF00u) | (u >> 24);
                f = std::bit_cast<float>(u);
            }
        }

        std::array<double, 3> raw_scores{};
        try {
            std::ifstream rin(work / "response.json");
            const auto resp = nlohmann::json::parse(rin);
            const auto s = resp.at("scores").get<std::vector<double>>();
            if (s.size() != 3)
                throw BackendError("model returned " + std::to_string(s.size()) + " scores; expected tensor shape [3]");
            std::copy(s.begin(), s.end(), raw_scores.begin());
        } catch (const nlohmann::json::exception& e) {
            throw BackendError(std::string("malformed runner response: ") + e.what());
        }

        std::array<std::size_t, 3> order{0, 1, 2};
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return raw_scores[a] < raw_scores[b]; });
        SegmentationTriplet t;
        for (std::size_t rank = 0; rank < 3; ++rank) {
            const std::size_t src = order[rank];
            std::vector<std::uint8_t> bits(plane);
            for (std::size_t i = 0; i < plane; ++i) bits[i] = logits[src * plane + i] > 0.0f ? 1 : 0;
            t.masks[rank] = mask_to_source(BinaryMask(input.side, input.side, std::move(bits)), input);
            t.scores[rank] = std::clamp(raw_scores[src], 0.0, 1.0);
        }
        return t;
    }

private:
    ModelFileDescriptor desc_;
};

}  // namespace promptpore

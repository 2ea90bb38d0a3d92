#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "json.hpp"
#include "oracles.hpp"
#include "promptpore/backend.hpp"
#include "promptpore/eval.hpp"
#include "promptpore/model_backend.hpp"
#include "promptpore/synth.hpp"
#include "test_util.hpp"

namespace pp = promptpore;

namespace {

/// Three separate blobs on a 40x30 canvas.
pp::BinaryMask three_blobs()
{
    pp::BinaryMask m(40, 30);
    for (int y = 2; y < 6; ++y)
        for (int x = 2; x < 6; ++x) m.set(x, y, 1);
    for (int y = 10; y < 13; ++y)
        for (int x = 20; x < 30; ++x) m.set(x, y, 1);
    for (int y = 20; y < 28; ++y) m.set(35, y, 1);
    return m;
}

pp::PromptSet prompts_at(std::vector<pp::Point> pts)
{
    pp::PromptSet p;
    p.points = std::move(pts);
    p.labels.assign(p.points.size(), 1);
    p.source = "test";
    return p;
}

pp::SegmentationTriplet run(pp::SegmentationBackend& b, const pp::GrayImage& img, const pp::PromptSet& p)
{
    const auto input = pp::to_model_input(img);
    return b.predict(input, pp::transform_coords(p, input));
}

pp::BinaryMask from_grid(const std::vector<int>& grid, int w, int h)
{
    std::vector<std::uint8_t> px(grid.begin(), grid.end());
    return pp::BinaryMask(w, h, std::move(px));
}

}  // namespace

TEST(Selection, TruthTable)
{
    EXPECT_EQ(pp::select_index({0.5, 0.7, 0.95}), 1);
    EXPECT_EQ(pp::select_index({0.5, 0.95, 0.97}), 0);
    EXPECT_EQ(pp::select_index({0.5, 0.90, 0.97}, 0.90), 1);
    EXPECT_EQ(pp::select_index({0.5, 0.89, 0.97}, 0.88), 0);
    EXPECT_DOUBLE_EQ(pp::kDefaultSelectThreshold, 0.90);
}

TEST(Selection, DependsOnlyOnPartScore)
{
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 1000; ++i) {
        const double s1 = u(rng);
        ASSERT_EQ(pp::select_index({u(rng), s1, u(rng)}), pp::select_index({u(rng), s1, u(rng)}));
    }
}

TEST(OracleBackend, AllComponentsHitGivesGroundTruth)
{
    const auto gt = three_blobs();
    pp::OracleBackend b(gt, {0.7, 0.85, 0.95});
    const auto t = run(b, pp::GrayImage(40, 30), prompts_at({{3, 3}, {25, 11}, {35, 24}}));
    EXPECT_EQ(t.masks[1], gt);
    EXPECT_EQ(t.masks[0], gt);
    EXPECT_EQ(t.scores, (std::array<double, 3>{0.7, 0.85, 0.95}));
}

TEST(OracleBackend, OneComponentHit)
{
    const auto gt = three_blobs();
    pp::OracleBackend b(gt, {0.7, 0.95, 0.97});
    const auto t = run(b, pp::GrayImage(40, 30), prompts_at({{25, 11}, {0, 29}}));
    EXPECT_EQ(pp::foreground_count(t.masks[0]), 30u);
    for (const auto& p : pp::foreground_points(t.masks[0])) EXPECT_TRUE(p.y >= 10 && p.y < 13);
}

TEST(OracleBackend, ComponentHitsMatchFloodFill)
{
    std::mt19937 rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        const int w = 5 + static_cast<int>(rng() % 30), h = 5 + static_cast<int>(rng() % 30);
        std::vector<int> grid(static_cast<std::size_t>(w * h));
        for (auto& g : grid) g = rng() % 100 < 35 ? 1 : 0;
        const int conn = trial % 2 ? 4 : 8;
        pp::OracleBackend b(from_grid(grid, w, h), {0.1, 0.2, 0.3}, conn);
        std::vector<pp::Point> pts;
        std::vector<int> expected(grid.size(), 0);
        for (int k = 0; k < 3; ++k) {
            const int x = static_cast<int>(rng() % w), y = static_cast<int>(rng() % h);
            pts.push_back({x, y});
            const auto fill = oracle::flood_fill(grid, w, h, x, y, conn);
            for (std::size_t i = 0; i < grid.size(); ++i) expected[i] |= fill[i];
        }
        const auto t = run(b, pp::GrayImage(w, h), prompts_at(pts));
        ASSERT_EQ(t.masks[0], from_grid(expected, w, h)) << "trial " << trial;
    }
}

TEST(OracleBackend, EmptyGroundTruthStillSelectable)
{
    pp::OracleBackend b(pp::BinaryMask(10, 10), {0.7, 0.85, 0.95});
    const auto t = run(b, pp::GrayImage(10, 10), prompts_at({{5, 5}}));
    for (const auto& m : t.masks) EXPECT_EQ(pp::foreground_count(m), 0u);
    EXPECT_EQ(pp::select_mask(t).index, 1);
}

TEST(OracleBackend, RejectsEmptyPromptsAndBadScores)
{
    pp::OracleBackend b(three_blobs(), {0.7, 0.85, 0.95});
    EXPECT_THROW(run(b, pp::GrayImage(40, 30), prompts_at({})), pp::ArgumentError);
    EXPECT_THROW(pp::OracleBackend(three_blobs(), {0.7, 1.5, 0.9}), pp::ArgumentError);
    EXPECT_THROW(run(b, pp::GrayImage(20, 20), prompts_at({{1, 1}})), pp::BackendError);
}

TEST(Segment, OracleChainOnSyntheticDisc)
{
    pp::SyntheticSpec spec;
    spec.seed = 4;
    const auto layer = pp::generate(spec);
    pp::CentroidRecord rec;
    rec.centroid_image = layer.image;
    rec.foreground_pool = pp::foreground_points(layer.gt);

    pp::OracleBackend full(layer.gt, {0.7, 0.85, 0.95});
    const auto r = pp::segment_image(layer.image, rec, 10000, 1, full);
    EXPECT_EQ(r.chosen_index, 1);
    EXPECT_DOUBLE_EQ(pp::dsc(r.mask, layer.gt), 1.0);

    // subpart branch: only the prompted components come back
    pp::OracleBackend sub(layer.gt, {0.7, 0.95, 0.97});
    const auto one = prompts_at({rec.foreground_pool.front()});
    const auto r2 = pp::segment_with_prompts(layer.image, one, sub);
    EXPECT_EQ(r2.chosen_index, 0);
    const auto labels = pp::label_components(layer.gt);
    const int hit = labels.at(one.points[0].x, one.points[0].y);
    for (int y = 0; y < layer.gt.height(); ++y)
        for (int x = 0; x < layer.gt.width(); ++x) ASSERT_EQ(r2.mask(x, y) != 0, labels.at(x, y) == hit);
}

TEST(Segment, ModelFrameMasksMapInsideImage)
{
    pp::BinaryMask gt(984, 1010);
    gt.set(983, 1009, 1);
    gt.set(0, 0, 1);
    pp::OracleBackend b(gt, {0.7, 0.85, 0.95});
    const auto r = pp::segment_with_prompts(pp::GrayImage(984, 1010, 50), prompts_at({{983, 1009}}), b);
    EXPECT_EQ(r.mask.width(), 984);
    EXPECT_EQ(r.mask.height(), 1010);
    EXPECT_EQ(r.mask, gt);
}

namespace {

/// Runner that emits three fixed masks with out-of-order scores: logits for
/// raw mask j are positive on the j-th third of the frame's columns.
struct FakeRunner {
    test::TempDir dir;
    std::filesystem::path model;
    std::string command;

    explicit FakeRunner(const std::string& scores = "[0.95, 0.30, 0.60]", int planes = 3)
    {
        model = dir.path / "model.onnx";
        std::ofstream(model, std::ios::binary) << '\x08' << "fake";
        const auto script = dir.path / "runner.py";
        std::ofstream(script) << "import json, struct, sys, os\n"
                                 "w = sys.argv[1]\n"
                                 "req = json.load(open(os.path.join(w, 'request.json')))\n"
                                 "n = req['side']\n"
                                 "out = bytearray()\n"
                                 "for j in range("
                              << planes
                              << "):\n"
                                 "    row = b''.join(struct.pack('<f', 1.0 if (x * 3) // n == j else -1.0) for x in range(n))\n"
                                 "    out += row * n\n"
                                 "open(os.path.join(w, 'logits.f32'), 'wb').write(out)\n"
                                 "json.dump({'scores': "
                              << scores
                              << ", 'npoints': len(req['points'])}, open(os.path.join(w, 'response.json'), 'w'))\n";
        command = "python3 '" + script.string() + "'";
    }
};

}  // namespace

TEST(ModelFileBackend, SortsByScoreAndMapsBack)
{
    FakeRunner fake;
    pp::ModelFileBackend b({{fake.model}, fake.command});
    const pp::GrayImage img(300, 150, 20);
    const auto t = run(b, img, prompts_at({{10, 10}}));
    EXPECT_EQ(t.scores, (std::array<double, 3>{0.30, 0.60, 0.95}));
    // rank 0 came from raw mask 1 (middle third of the frame width)
    const auto input = pp::to_model_input(img);
    for (int x = 0; x < 300; ++x) {
        const int mx = static_cast<int>((x + 0.5) * input.scale);
        ASSERT_EQ(t.masks[0](x, 75) != 0, (mx * 3) / 1024 == 1) << x;
        ASSERT_EQ(t.masks[2](x, 75) != 0, (mx * 3) / 1024 == 0) << x;
    }
}

TEST(ModelFileBackend, AcceptsEmptyPromptsAndClampsScores)
{
    FakeRunner fake("[1.02, 0.5, -0.1]");
    pp::ModelFileBackend b({{fake.model}, fake.command});
    EXPECT_TRUE(b.accepts_empty_prompts());
    const auto t = run(b, pp::GrayImage(64, 64, 20), prompts_at({}));
    EXPECT_EQ(t.scores, (std::array<double, 3>{0.0, 0.5, 1.0}));
}

TEST(ModelFileBackend, ShapeAndFileErrors)
{
    FakeRunner two("[0.1, 0.2, 0.3]", 2);
    pp::ModelFileBackend b({{two.model}, two.command});
    try {
        run(b, pp::GrayImage(32, 32), prompts_at({{1, 1}}));
        FAIL() << "expected a backend error";
    } catch (const pp::BackendError& e) {
        EXPECT_NE(std::string(e.what()).find("[3, 1024, 1024]"), std::string::npos);
    }
    FakeRunner bad_scores("[0.1, 0.2]");
    pp::ModelFileBackend c({{bad_scores.model}, bad_scores.command});
    EXPECT_THROW(run(c, pp::GrayImage(32, 32), prompts_at({{1, 1}})), pp::BackendError);

    test::TempDir dir;
    std::ofstream(dir.path / "notonnx.bin") << "hello";
    EXPECT_THROW(pp::ModelFileBackend({{dir.path / "notonnx.bin"}, "true"}), pp::BackendError);
    EXPECT_THROW(pp::ModelFileBackend({{dir.path / "missing.onnx"}, "true"}), pp::BackendError);
    FakeRunner ok;
    pp::ModelFileBackend failing({{ok.model}, "false"});
    EXPECT_THROW(run(failing, pp::GrayImage(8, 8), prompts_at({{1, 1}})), pp::BackendError);
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "promptpore/prompt_set.hpp"
#include "promptpore/prompts.hpp"
#include "promptpore/random.hpp"

namespace pp = promptpore;

namespace {

pp::CentroidRecord record_with_pool(std::vector<pp::Point> pool, int w = 1010, int h = 1010)
{
    pp::CentroidRecord r;
    r.centroid_image = pp::GrayImage(w, h);
    r.foreground_pool = std::move(pool);
    return r;
}

std::vector<pp::Point> grid_pool(std::size_t n, int width = 1000)
{
    std::vector<pp::Point> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({static_cast<int>(i % static_cast<std::size_t>(width)),
                       static_cast<int>(i / static_cast<std::size_t>(width))});
    return out;
}

}  // namespace

TEST(Random, UniformIndexInRangeAndSeeded)
{
    auto a = pp::make_engine(5), b = pp::make_engine(5);
    for (int i = 0; i < 1000; ++i) {
        const auto x = pp::uniform_index(a, 7);
        ASSERT_LT(x, 7u);
        ASSERT_EQ(x, pp::uniform_index(b, 7));
    }
    EXPECT_NE(pp::derive_seed(1, 0), pp::derive_seed(1, 1));
    EXPECT_NE(pp::derive_seed(1, 0), pp::derive_seed(2, 0));
}

TEST(Random, FixedGoldenSequence)
{
    // mt19937_64 with seed 5489 has the standard 10000th output
    pp::Engine e(5489);
    e.discard(9999);
    EXPECT_EQ(e(), 9981545732273789042ull);
}

TEST(GeneratePrompts, PoolEqualsRequest)
{
    const auto r = record_with_pool({{1, 1}, {2, 2}});
    const auto p = pp::generate_prompts(r, 2, 0);
    EXPECT_EQ(std::set<pp::Point>(p.points.begin(), p.points.end()), (std::set<pp::Point>{{1, 1}, {2, 2}}));
    EXPECT_EQ(p.labels, (std::vector<int>{1, 1}));
}

TEST(GeneratePrompts, DefaultSizeDrawsDistinctPoolMembers)
{
    const auto pool = grid_pool(300'000);
    const auto r = record_with_pool(pool);
    for (std::size_t m : {pp::kDefaultPromptSize, pp::kSparsePromptSize}) {
        const auto p = pp::generate_prompts(r, m, 42);
        ASSERT_EQ(p.points.size(), m);
        const std::set<pp::Point> uniq(p.points.begin(), p.points.end());
        EXPECT_EQ(uniq.size(), m);
        const std::set<pp::Point> pool_set(pool.begin(), pool.end());
        for (const auto& pt : p.points) ASSERT_TRUE(pool_set.count(pt));
    }
    EXPECT_EQ(pp::kDefaultPromptSize, 10000u);
    EXPECT_EQ(pp::kSparsePromptSize, 1000u);
}

TEST(GeneratePrompts, OversizedRequestReturnsPoolWithWarning)
{
    std::vector<std::string> warnings;
    auto prev = pp::set_warning_sink([&](std::string_view m) { warnings.emplace_back(m); });
    const auto p = pp::generate_prompts(record_with_pool({{3, 4}, {5, 6}, {7, 8}}), 10, 1);
    pp::set_warning_sink(std::move(prev));
    EXPECT_EQ(p.points.size(), 3u);
    EXPECT_EQ(warnings.size(), 1u);
}

TEST(GeneratePrompts, DeterministicAndSeedSensitive)
{
    const auto r = record_with_pool(grid_pool(5000));
    EXPECT_EQ(pp::generate_prompts(r, 100, 7).points, pp::generate_prompts(r, 100, 7).points);
    EXPECT_NE(pp::generate_prompts(r, 100, 7).points, pp::generate_prompts(r, 100, 8).points);
}

TEST(GeneratePrompts, EmptyPoolAndZeroSizeRejected)
{
    EXPECT_THROW(pp::generate_prompts(record_with_pool({}), 5, 0), pp::UnusableRecordError);
    EXPECT_THROW(pp::generate_prompts(record_with_pool({{0, 0}}), 0, 0), pp::ArgumentError);
    EXPECT_THROW(pp::bootstrap_prompts(record_with_pool({}), 5), pp::UnusableRecordError);
}

TEST(GeneratePrompts, RandomPoolsSatisfyMembership)
{
    std::mt19937 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::set<pp::Point> pool;
        const std::size_t n = 1 + rng() % 200;
        while (pool.size() < n) pool.insert({static_cast<int>(rng() % 50), static_cast<int>(rng() % 50)});
        const auto r = record_with_pool({pool.begin(), pool.end()}, 50, 50);
        const auto m = 1 + rng() % (n + 5);
        const auto p = pp::generate_prompts(r, m, rng());
        for (const auto& pt : p.points) ASSERT_TRUE(pool.count(pt));
        const auto b = pp::bootstrap_prompt(r, m, rng(), 3);
        for (const auto& pt : b.points) ASSERT_TRUE(pool.count(pt));
        ASSERT_EQ(b.points.size(), m);
    }
}

TEST(Bootstrap, SinglePointPoolRepeats)
{
    const auto sets = pp::bootstrap_prompts(record_with_pool({{9, 9}}), 5, 3);
    ASSERT_EQ(sets.size(), 3u);
    for (const auto& s : sets) EXPECT_EQ(s.points, std::vector<pp::Point>(5, pp::Point{9, 9}));
}

TEST(Bootstrap, DefaultIterationsAndPoolBounds)
{
    EXPECT_EQ(pp::kDefaultBootstrapIterations, 100u);
    for (std::size_t n : {1400u, 300'000u}) {
        const auto sets = pp::bootstrap_prompts(record_with_pool(grid_pool(n)), 50);
        EXPECT_EQ(sets.size(), 100u);
    }
}

TEST(Bootstrap, IterationSeedsAreIndependentOfBatch)
{
    const auto r = record_with_pool(grid_pool(2000));
    const auto all = pp::bootstrap_prompts(r, 20, 10, 77);
    EXPECT_EQ(all[6].points, pp::bootstrap_prompt(r, 20, 77, 6).points);
    EXPECT_NE(all[6].points, all[7].points);
}

TEST(Bootstrap, DuplicateProbabilityMatchesAnalytic)
{
    // n = 10, m = 5: P(duplicate) = 1 - 10*9*8*7*6 / 10^5 = 0.6976
    const double p = 1.0 - (10.0 * 9 * 8 * 7 * 6) / 1e5;
    const auto r = record_with_pool(grid_pool(10));
    const int draws = 10000;
    int dup = 0;
    for (int i = 0; i < draws; ++i) {
        const auto s = pp::bootstrap_prompt(r, 5, 2024, static_cast<std::size_t>(i));
        if (std::set<pp::Point>(s.points.begin(), s.points.end()).size() < 5) ++dup;
    }
    const double sigma = std::sqrt(p * (1 - p) / draws);
    EXPECT_NEAR(static_cast<double>(dup) / draws, p, 3 * sigma);
}

TEST(PromptSetJson, RoundTripAndLabelCheck)
{
    pp::PromptSet p{{{1, 2}, {3, 4}}, {1, 1}, "centroid_2", 99};
    const auto back = pp::prompt_set_from_json(pp::to_json(p));
    EXPECT_EQ(back.points, p.points);
    EXPECT_EQ(back.labels, p.labels);
    EXPECT_EQ(back.source, p.source);
    EXPECT_EQ(back.seed, p.seed);
    auto j = pp::to_json(p);
    j["labels"][0] = 0;
    EXPECT_THROW(pp::prompt_set_from_json(j), pp::FormatError);
}

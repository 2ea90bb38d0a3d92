#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "promptpore/geometry.hpp"
#include "promptpore/image.hpp"
#include "promptpore/png_io.hpp"
#include "test_util.hpp"

namespace pp = promptpore;

TEST(Raster, RejectsMismatchedData)
{
    EXPECT_THROW(pp::GrayImage(2, 2, std::vector<std::uint8_t>{1, 2, 3}), pp::ArgumentError);
    EXPECT_THROW(pp::GrayImage(0, 2), pp::ArgumentError);
}

TEST(Raster, MaskNormalizesNonzero)
{
    pp::BinaryMask m(2, 1, std::vector<std::uint8_t>{0, 255});
    EXPECT_EQ(m(1, 0), 1);
    EXPECT_EQ(pp::foreground_count(m), 1u);
}

TEST(PngIo, GrayRoundTripIsExact)
{
    test::TempDir dir;
    pp::GrayImage img(2, 2, std::vector<std::uint8_t>{0, 255, 128, 64});
    pp::save_gray(img, dir.path / "a.png");
    EXPECT_EQ(pp::load_gray(dir.path / "a.png"), img);
}

TEST(PngIo, RandomGrayRoundTrip)
{
    test::TempDir dir;
    std::mt19937 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 40);
        const int h = 1 + static_cast<int>(rng() % 40);
        std::vector<std::uint8_t> px(static_cast<std::size_t>(w * h));
        for (auto& v : px) v = static_cast<std::uint8_t>(rng());
        pp::GrayImage img(w, h, px);
        pp::save_gray(img, dir.path / "r.png");
        ASSERT_EQ(pp::load_gray(dir.path / "r.png"), img);
    }
}

TEST(PngIo, RgbIsAveragedRoundHalfUp)
{
    test::TempDir dir;
    // (30,60,90) -> 60; (1,1,2) -> 4/3 -> 1; (1,2,2) -> 5/3 -> 2
    std::vector<std::uint8_t> rgb{30, 60, 90, 1, 1, 2, 1, 2, 2};
    pp::save_rgb(3, 1, rgb, dir.path / "c.png");
    const auto g = pp::load_gray(dir.path / "c.png");
    EXPECT_EQ(g(0, 0), 60);
    EXPECT_EQ(g(1, 0), 1);
    EXPECT_EQ(g(2, 0), 2);
}

TEST(PngIo, TruncatedFileIsIoError)
{
    test::TempDir dir;
    pp::GrayImage img(64, 64, 77);
    pp::save_gray(img, dir.path / "full.png");
    std::ifstream in(dir.path / "full.png", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream(dir.path / "cut.png", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    EXPECT_THROW(pp::load_gray(dir.path / "cut.png"), pp::IoError);
    EXPECT_THROW(pp::load_gray(dir.path / "missing.png"), pp::IoError);
}

TEST(PngIo, NonPngIsFormatError)
{
    test::TempDir dir;
    std::ofstream(dir.path / "x.png") << "definitely not a png";
    EXPECT_THROW(pp::load_gray(dir.path / "x.png"), pp::FormatError);
}

TEST(PngIo, SixteenBitIsFormatError)
{
    test::TempDir dir;
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = 2;
    image.height = 2;
    image.format = PNG_FORMAT_LINEAR_Y;
    std::vector<std::uint16_t> px{0, 1000, 2000, 65535};
    ASSERT_TRUE(png_image_write_to_file(&image, (dir.path / "deep.png").c_str(), 0, px.data(), 0, nullptr));
    EXPECT_THROW(pp::load_gray(dir.path / "deep.png"), pp::FormatError);
}

TEST(PngIo, MaskUses255ForForeground)
{
    test::TempDir dir;
    pp::BinaryMask m(3, 1, std::vector<std::uint8_t>{0, 1, 0});
    pp::save_mask(m, dir.path / "m.png");
    const auto g = pp::load_gray(dir.path / "m.png");
    EXPECT_EQ(g(1, 0), 255);
    EXPECT_EQ(g(0, 0), 0);
    EXPECT_EQ(pp::load_mask(dir.path / "m.png"), m);
}

TEST(MedianFilter, WindowOneIsIdentity)
{
    pp::GrayImage img(3, 2, std::vector<std::uint8_t>{1, 9, 3, 200, 5, 0});
    EXPECT_EQ(pp::median_filter(img, 1), img);
}

TEST(MedianFilter, RemovesIsolatedBrightRow)
{
    // center row [0,255,0], rest 0: the 3x3 window around the center holds one 255
    pp::GrayImage img(3, 3, std::vector<std::uint8_t>{0, 0, 0, 0, 255, 0, 0, 0, 0});
    EXPECT_EQ(pp::median_filter(img, 3)(1, 1), 0);
}

TEST(MedianFilter, RejectsEvenOrNonPositiveWindow)
{
    pp::GrayImage img(3, 3);
    EXPECT_THROW(pp::median_filter(img, 2), pp::ArgumentError);
    EXPECT_THROW(pp::median_filter(img, 0), pp::ArgumentError);
    EXPECT_THROW(pp::median_filter(img, -3), pp::ArgumentError);
}

TEST(MedianFilter, ConstantStaysConstantAndRangeIsBounded)
{
    EXPECT_EQ(pp::median_filter(pp::GrayImage(7, 5, 42), 5), pp::GrayImage(7, 5, 42));
    std::mt19937 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::uint8_t> px(15 * 11);
        for (auto& v : px) v = static_cast<std::uint8_t>(40 + rng() % 100);
        pp::GrayImage img(15, 11, px);
        const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
        const auto f = pp::median_filter(img, 3);
        for (auto v : f.data()) {
            ASSERT_GE(v, *lo);
            ASSERT_LE(v, *hi);
        }
    }
}

TEST(ModelInput, SquareNativeSizeIsNoOp)
{
    pp::GrayImage img(1024, 1024, 0);
    img.set(5, 7, 99);
    const auto in = pp::to_model_input(img);
    EXPECT_DOUBLE_EQ(in.scale, 1.0);
    EXPECT_EQ(in.pad_x, 0);
    EXPECT_EQ(in.pad_y, 0);
    EXPECT_EQ(in.channel(5, 7, 0), 99);
    EXPECT_EQ(in.channel(5, 7, 2), 99);
}

TEST(ModelInput, HalfSizeDoublesAndFillsFrame)
{
    const auto in = pp::to_model_input(pp::GrayImage(512, 512, 30));
    EXPECT_DOUBLE_EQ(in.scale, 2.0);
    EXPECT_EQ(in.content_width, 1024);
    EXPECT_EQ(in.content_height, 1024);
    EXPECT_EQ(in.pad_x + in.pad_y, 0);
    EXPECT_EQ(in.channel(1023, 1023, 1), 30);
}

TEST(ModelInput, NonSquareSampleGeometry)
{
    // 984 x 1010 layers: the height is the long side
    const auto in = pp::to_model_input(pp::GrayImage(984, 1010, 128));
    EXPECT_DOUBLE_EQ(in.scale, 1024.0 / 1010.0);
    EXPECT_EQ(in.pad_x, 1024 - static_cast<int>(std::lround(984.0 * 1024.0 / 1010.0)));
    EXPECT_EQ(in.pad_x, 26);
    EXPECT_EQ(in.pad_y, 0);
    // padding is zero, content carries the image, channels replicate
    EXPECT_EQ(in.channel(1023, 500, 0), 0);
    EXPECT_EQ(in.channel(in.content_width - 1, 500, 0), 128);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(in.channel(10, 10, c), 128);
}

TEST(TransformCoords, IdentityAndScale)
{
    pp::PromptSet p{{{100, 200}}, {1}, "c", 0};
    const auto same = pp::transform_coords(p, pp::to_model_input(pp::GrayImage(1024, 1024)));
    EXPECT_DOUBLE_EQ(same.points[0].x, 100.0);
    EXPECT_DOUBLE_EQ(same.points[0].y, 200.0);
    const auto doubled = pp::transform_coords(p, pp::to_model_input(pp::GrayImage(512, 512)));
    EXPECT_DOUBLE_EQ(doubled.points[0].x, 200.0);
    EXPECT_DOUBLE_EQ(doubled.points[0].y, 400.0);
    EXPECT_EQ(doubled.labels, p.labels);
}

TEST(TransformCoords, CornerStaysInsideContent)
{
    for (auto [w, h] : {std::pair{984, 1010}, {300, 200}, {7, 1000}, {1500, 900}}) {
        const auto in = pp::to_model_input(pp::GrayImage(w, h));
        pp::PromptSet p{{{w - 1, h - 1}}, {1}, "c", 0};
        const auto m = pp::transform_coords(p, in);
        EXPECT_LT(m.points[0].x, in.content_width);
        EXPECT_LT(m.points[0].y, in.content_height);
    }
}

TEST(TransformCoords, OutOfBoundsIsRejected)
{
    const auto in = pp::to_model_input(pp::GrayImage(10, 10));
    EXPECT_THROW(pp::transform_coords(pp::PromptSet{{{10, 0}}, {1}, "c", 0}, in), pp::ArgumentError);
    EXPECT_THROW(pp::transform_coords(pp::PromptSet{{{0, -1}}, {1}, "c", 0}, in), pp::ArgumentError);
}

TEST(TransformCoords, InverseReturnsWithinOnePixel)
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 2000);
        const int h = 1 + static_cast<int>(rng() % 2000);
        const auto in = pp::to_model_input(pp::GrayImage(w, h));
        const pp::Point p{static_cast<int>(rng() % w), static_cast<int>(rng() % h)};
        const auto m = in.to_model({double(p.x), double(p.y)});
        const auto back = in.to_source_pixel(m);
        ASSERT_LE(std::abs(back.x - p.x), 1);
        ASSERT_LE(std::abs(back.y - p.y), 1);
    }
}

TEST(MaskToSource, ModelFrameMaskMapsInsideImage)
{
    const auto in = pp::to_model_input(pp::GrayImage(300, 200));
    pp::BinaryMask full(1024, 1024, 1);
    const auto m = pp::mask_to_source(full, in);
    EXPECT_EQ(m.width(), 300);
    EXPECT_EQ(m.height(), 200);
    EXPECT_EQ(pp::foreground_count(m), 300u * 200u);

    // the sample point of one source pixel maps back to exactly that pixel
    pp::BinaryMask one(1024, 1024);
    one.set(static_cast<int>(150.5 * in.scale), static_cast<int>(100.5 * in.scale), 1);
    const auto back = pp::mask_to_source(one, in);
    EXPECT_TRUE(back(150, 100));
    EXPECT_EQ(pp::foreground_count(back), 1u);
}

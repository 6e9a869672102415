#include "affectbench/errors.hpp"
#include "affectbench/frame.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <png.h>

#include <cstring>
#include <fstream>

using namespace affectbench;
using namespace affectbench::testing;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

}  // namespace

TEST(Frame, RejectsBadDimensions) {
  EXPECT_THROW(Frame(0, 3), ValidationError);
  EXPECT_THROW(Frame(2, 2, PixelArray::Zero(3, 3)), ValidationError);
}

TEST(Frame, PlaneViewsOneChannel) {
  const Frame f = frame_from(2, 2, {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}});
  const auto g = f.plane(1);
  EXPECT_EQ(g.rows(), 2);
  EXPECT_EQ(g(0, 1), 5);
  EXPECT_EQ(g(1, 0), 8);
}

TEST(ImageIo, LoadsTwoPixelPpm) {
  TempDir dir("ppm");
  std::string bytes = "P6\n2 1\n255\n";
  bytes += std::string("\x00\x00\x00\xff\xff\xff", 6);
  write_bytes(dir / "a.ppm", bytes);
  const Frame f = load_frame(dir / "a.ppm");
  EXPECT_EQ(f, frame_from(2, 1, {{0, 0, 0}, {255, 255, 255}}));
}

TEST(ImageIo, PpmHeaderComments) {
  TempDir dir("ppmc");
  std::string bytes = "P6 # comment\n1 # w\n1\n255\n";
  bytes += std::string("\x01\x02\x03", 3);
  write_bytes(dir / "c.ppm", bytes);
  EXPECT_EQ(load_frame(dir / "c.ppm").at(0, 0), (Rgb{1, 2, 3}));
}

TEST(ImageIo, TruncatedFileNamesPath) {
  TempDir dir("trunc");
  write_bytes(dir / "t.ppm", "P6\n4 4\n255\n\x01\x02");
  try {
    load_frame(dir / "t.ppm");
    FAIL() << "expected a decode error";
  } catch (const DecodeError& e) {
    EXPECT_NE(std::string(e.what()).find("t.ppm"), std::string::npos);
  }

  std::mt19937_64 gen(3);
  save_frame(random_frame(gen, 8, 8), dir / "t.png");
  std::ifstream in(dir / "t.png", std::ios::binary);
  std::string png((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  write_bytes(dir / "t.png", png.substr(0, png.size() / 2));
  EXPECT_THROW(load_frame(dir / "t.png"), DecodeError);
}

TEST(ImageIo, UnsupportedDepthAndVariant) {
  TempDir dir("depth");
  write_bytes(dir / "d.ppm", std::string("P6\n1 1\n65535\n") + std::string(6, '\0'));
  EXPECT_THROW(load_frame(dir / "d.ppm"), DecodeError);
  write_bytes(dir / "g.ppm", std::string("P5\n1 1\n255\n") + std::string(1, '\0'));
  EXPECT_THROW(load_frame(dir / "g.ppm"), DecodeError);
  write_bytes(dir / "x.png", "not an image");
  EXPECT_THROW(load_frame(dir / "x.png"), DecodeError);
  EXPECT_THROW(load_frame(dir / "missing.png"), IoError);
}

TEST(ImageIo, SixteenBitPngRejected) {
  TempDir dir("png16");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = 2;
  image.height = 2;
  image.format = PNG_FORMAT_LINEAR_RGB;
  std::vector<png_uint_16> px(12, 1000);
  ASSERT_TRUE(png_image_write_to_file(&image, (dir / "w.png").c_str(), 0, px.data(), 0, nullptr));
  EXPECT_THROW(load_frame(dir / "w.png"), DecodeError);
}

TEST(ImageIo, GrayPngPromotedAndAlphaDropped) {
  TempDir dir("gray");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = 2;
  image.height = 1;
  image.format = PNG_FORMAT_GRAY;
  const png_byte gray[2] = {17, 200};
  ASSERT_TRUE(png_image_write_to_file(&image, (dir / "g.png").c_str(), 0, gray, 0, nullptr));
  EXPECT_EQ(load_frame(dir / "g.png"), frame_from(2, 1, {{17, 17, 17}, {200, 200, 200}}));

  image.format = PNG_FORMAT_RGBA;
  const png_byte rgba[8] = {10, 20, 30, 0, 40, 50, 60, 128};
  ASSERT_TRUE(png_image_write_to_file(&image, (dir / "a.png").c_str(), 0, rgba, 0, nullptr));
  EXPECT_EQ(load_frame(dir / "a.png"), frame_from(2, 1, {{10, 20, 30}, {40, 50, 60}}));
}

TEST(ImageIo, RoundTripIsBitExact) {
  TempDir dir("rt");
  std::mt19937_64 gen(11);
  for (int i = 0; i < 20; ++i) {
    const int w = 1 + int(gen() % 70), h = 1 + int(gen() % 70);
    const Frame f = random_frame(gen, w, h);
    for (const char* name : {"f.png", "f.ppm"}) {
      save_frame(f, dir / name);
      const Frame once = load_frame(dir / name);
      ASSERT_EQ(once, f) << name << " " << w << "x" << h;
      save_frame(once, dir / name);
      ASSERT_EQ(load_frame(dir / name), f);
    }
  }
  save_frame(Frame::filled(1, 1, {0, 0, 0}), dir / "nested/deeper/black.png");
  EXPECT_EQ(load_frame(dir / "nested/deeper/black.png").at(0, 0), (Rgb{0, 0, 0}));
}

TEST(ImageIo, SaveErrors) {
  TempDir dir("saveerr");
  write_bytes(dir / "file", "x");
  const Frame f = Frame::filled(2, 2, {1, 2, 3});
  EXPECT_THROW(save_frame(f, dir / "file" / "sub.png"), IoError);
  EXPECT_THROW(save_frame(f, dir / "f.bmp"), ValidationError);
}

TEST(Crop, FullBoxIsIdentity) {
  std::mt19937_64 gen(1);
  const Frame f = random_frame(gen, 4, 4);
  EXPECT_EQ(crop(f, {0, 0, 4, 4}), f);
  EXPECT_EQ(crop(f, BoundingBox::full(f)), f);
}

TEST(Crop, InnerBlockMatchesDirectIndexing) {
  std::mt19937_64 gen(2);
  const Frame f = random_frame(gen, 4, 4);
  const Frame c = crop(f, {1, 1, 2, 2});
  ASSERT_EQ(c.width(), 2);
  ASSERT_EQ(c.height(), 2);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) EXPECT_EQ(c.at(i, j), f.at(1 + i, 1 + j));
  }
}

TEST(Crop, OutOfBoundsRejected) {
  const Frame f(4, 4);
  EXPECT_THROW(crop(f, {3, 3, 2, 2}), ValidationError);
  EXPECT_THROW(crop(f, {-1, 0, 2, 2}), ValidationError);
  EXPECT_THROW(crop(f, {0, 0, 0, 2}), ValidationError);
}

TEST(Crop, ComposesAndMatchesOracle) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 200; ++t) {
    const int w = 2 + int(gen() % 40), h = 2 + int(gen() % 40);
    const Frame f = random_frame(gen, w, h);
    const BoundingBox b1{int(gen() % (w - 1)), int(gen() % (h - 1)), 0, 0};
    const BoundingBox outer{b1.x, b1.y, 1 + int(gen() % (w - b1.x)), 1 + int(gen() % (h - b1.y))};
    const BoundingBox inner{int(gen() % outer.w), int(gen() % outer.h), 0, 0};
    const BoundingBox in2{inner.x, inner.y, 1 + int(gen() % (outer.w - inner.x)), 1 + int(gen() % (outer.h - inner.y))};
    ASSERT_EQ(crop(f, outer), crop_oracle(f, outer));
    ASSERT_EQ(crop(crop(f, outer), in2), crop(f, compose(outer, in2)));
  }
}

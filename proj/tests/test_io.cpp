#include <gtest/gtest.h>
#include <png.h>

#include <bit>
#include <cstring>
#include <filesystem>

#include "pcnvs/errors.hpp"
#include "pcnvs/io.hpp"
#include "test_support.hpp"

namespace pcnvs {
namespace {

using testing::TempDir;

std::string encode_rgba8(const std::vector<std::uint8_t>& px, int w, int h) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = PNG_FORMAT_RGBA;
  png_alloc_size_t size = 0;
  png_image_write_to_memory(&img, nullptr, &size, 0, px.data(), 0, nullptr);
  std::string out(size, '\0');
  EXPECT_TRUE(png_image_write_to_memory(&img, out.data(), &size, 0, px.data(), 0, nullptr));
  out.resize(size);
  return out;
}

std::string encode_rgb16(int w, int h) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = PNG_FORMAT_LINEAR_RGB;
  std::vector<std::uint16_t> px(static_cast<std::size_t>(w) * h * 3, 40000);
  png_alloc_size_t size = 0;
  png_image_write_to_memory(&img, nullptr, &size, 0, px.data(), 0, nullptr);
  std::string out(size, '\0');
  EXPECT_TRUE(png_image_write_to_memory(&img, out.data(), &size, 0, px.data(), 0, nullptr));
  out.resize(size);
  return out;
}

TEST(Png, SinglePixelRoundTrip) {
  TempDir dir;
  Image img(1, 1, 3);
  img.at(0, 0, 0) = 1.0f;
  io::save_image(img, dir / "red.png");
  const Image back = io::load_image(dir / "red.png");
  ASSERT_EQ(back.width(), 1);
  EXPECT_EQ(back.at(0, 0, 0), 1.0f);
  EXPECT_EQ(back.at(0, 0, 1), 0.0f);
  EXPECT_EQ(back.at(0, 0, 2), 0.0f);
}

TEST(Png, RoundTripWithinHalfAQuantizationStep) {
  std::mt19937 rng(60);
  const Image img = testing::random_image<float>(rng, 13, 7);
  const Image back = io::decode_png(io::encode_png(img));
  ASSERT_TRUE(back.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_LE(std::abs(back[i] - img[i]), 1.0f / 510.0f + 1e-7f);
  // Values already on the 8-bit grid survive exactly.
  EXPECT_EQ(io::decode_png(io::encode_png(back)), back);
}

TEST(Png, RoundsHalfUpAndClamps) {
  EXPECT_EQ(io::to_byte(0.5f / 255.0f), 1);
  EXPECT_EQ(io::to_byte(-0.2f), 0);
  EXPECT_EQ(io::to_byte(1.7f), 255);
  EXPECT_EQ(io::to_byte(NAN), 0);
}

TEST(Png, RgbaInputDropsAlpha) {
  const Image img = io::decode_png(encode_rgba8({255, 0, 0, 255, 0, 255, 0, 255}, 2, 1));
  EXPECT_EQ(img.channels(), 3);
  EXPECT_EQ(img.at(0, 0, 0), 1.0f);
  EXPECT_EQ(img.at(1, 0, 1), 1.0f);
}

TEST(Png, SixteenBitIsRejected) {
  EXPECT_THROW(io::decode_png(encode_rgb16(2, 2)), InputError);
}

TEST(Png, GarbageAndMissingFileAreInputErrors) {
  EXPECT_THROW(io::decode_png("not a png"), InputError);
  TempDir dir;
  try {
    io::load_image(dir / "missing.png");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.png"), std::string::npos);
  }
}

TEST(Pfm, RoundTripIsBitExactForFloatValues) {
  std::mt19937 rng(61);
  DepthMap d = testing::random_depth(rng, 9, 5, 0.1, 50.0, 0.2);
  std::vector<double> v(d.values().begin(), d.values().end());
  for (auto& x : v) x = static_cast<double>(static_cast<float>(x));
  d = DepthMap(9, 5, v);
  TempDir dir;
  io::save_depth(d, dir / "d.pfm");
  EXPECT_EQ(io::load_depth(dir / "d.pfm"), d);
}

TEST(Pfm, ReadsBigEndianBottomToTop) {
  std::string bytes = "Pf\n1 2\n1.0\n";
  for (float f : {2.0f, 1.0f}) {
    auto raw = std::bit_cast<std::uint32_t>(f);
    for (int s = 24; s >= 0; s -= 8) bytes.push_back(static_cast<char>((raw >> s) & 0xff));
  }
  const DepthMap d = io::decode_pfm(bytes);
  EXPECT_EQ(d.at(0, 0), 1.0);
  EXPECT_EQ(d.at(0, 1), 2.0);
}

TEST(Pfm, WritesLittleEndianHeader) {
  const std::string bytes = io::encode_pfm(DepthMap(2, 1, {1.0, 0.0}));
  EXPECT_EQ(bytes.substr(0, 11), "Pf\n2 1\n-1.0");
  EXPECT_EQ(bytes.size(), 12u + 8u);
}

TEST(Pfm, TruncatedDataNamesByteOffset) {
  std::string bytes = io::encode_pfm(DepthMap(4, 4, std::vector<double>(16, 1.0)));
  bytes.resize(bytes.size() - 3);
  try {
    io::decode_pfm(bytes);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset " + std::to_string(bytes.size())),
              std::string::npos)
        << e.what();
  }
}

TEST(Pfm, RejectsColorAndMalformedHeaders) {
  EXPECT_THROW(io::decode_pfm("PF\n1 1\n-1.0\n\0\0\0\0\0\0\0\0\0\0\0\0"), InputError);
  EXPECT_THROW(io::decode_pfm("P6\n1 1\n255\n"), InputError);
  EXPECT_THROW(io::decode_pfm("Pf\n1 x\n-1.0\n"), InputError);
  EXPECT_THROW(io::decode_pfm("Pf\n1 1\n0\n    "), InputError);
  EXPECT_THROW(io::decode_pfm("Pf\n1"), InputError);
}

TEST(Pfm, NegativeDepthIsInputError) {
  EXPECT_THROW(io::decode_pfm(io::encode_pfm(DepthMap(1, 1, {1.0})).substr(0, 12) +
                              std::string("\x00\x00\x80\xbf", 4)),
               InputError);
}

TEST(Ply, EmptyCloudIsValid) {
  for (bool binary : {false, true}) {
    const std::string bytes = io::encode_ply(PointCloud{}, binary);
    EXPECT_NE(bytes.find("element vertex 0"), std::string::npos);
    EXPECT_TRUE(io::decode_ply(bytes).empty());
  }
}

TEST(Ply, AsciiMatchesGoldenFile) {
  PointCloud c;
  c.points = {{1, 2, 3}};
  c.colors = {Eigen::Vector3f::Ones()};
  const std::string golden = io::read_file(std::filesystem::path(PCNVS_TEST_DATA) / "one_white_point.ply");
  EXPECT_EQ(io::encode_ply(c, false), golden);
  const PointCloud back = io::decode_ply(golden);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back.points[0], Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(back.colors[0], Eigen::Vector3f::Ones());
}

TEST(Ply, BinaryAndAsciiReloadToFloat32Points) {
  std::mt19937 rng(62);
  std::uniform_real_distribution<double> u(-5, 5);
  PointCloud c;
  for (int i = 0; i < 50; ++i) {
    c.points.emplace_back(u(rng), u(rng), u(rng));
    c.colors.emplace_back(static_cast<float>(i) / 49.0f, 0.5f, 1.0f);
  }
  TempDir dir;
  for (bool binary : {false, true}) {
    const auto path = dir / (binary ? "b.ply" : "a.ply");
    io::save_ply(c, path, binary);
    const PointCloud back = io::load_ply(path);
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      EXPECT_EQ(back.points[i], c.points[i].cast<float>().cast<double>());
      for (int k = 0; k < 3; ++k) {
        EXPECT_EQ(back.colors[i][k], static_cast<float>(io::to_byte(c.colors[i][k])) / 255.0f);
      }
    }
  }
}

TEST(Ply, MalformedInputsAreInputErrors) {
  EXPECT_THROW(io::decode_ply("plx\n"), InputError);
  EXPECT_THROW(io::decode_ply("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\n"
                              "property float y\nproperty float z\nend_header\n1 2 3\n"),
               InputError);
  EXPECT_THROW(io::decode_ply("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\n"
                              "end_header\n1\n"),
               InputError);
  EXPECT_THROW(io::decode_ply("ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
                              "property float x\nproperty float y\nproperty float z\nend_header\nab"),
               InputError);
}

TEST(AtomicWrite, LeavesNoTemporaryFiles) {
  TempDir dir;
  io::write_file_atomic(dir / "out.bin", "first");
  io::write_file_atomic(dir / "out.bin", "second");
  EXPECT_EQ(io::read_file(dir / "out.bin"), "second");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1u);
  EXPECT_THROW(io::write_file_atomic(dir / "no_such_dir" / "x.bin", "x"), InputError);
}

}  // namespace
}  // namespace pcnvs

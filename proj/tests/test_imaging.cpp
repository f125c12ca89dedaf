#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "bfnet/imaging.hpp"

using namespace bfnet;
namespace fs = std::filesystem;

namespace {

Image random_image(int size, int channels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(size, size, channels);
  for (auto& v : img.data) v = u(rng);
  return img;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("bfnet_test_" + name); }

}  // namespace

TEST(Pnm, ReadsHandWrittenPpm) {
  const auto path = temp_file("tiny.ppm");
  {
    std::ofstream os(path, std::ios::binary);
    os << "P6\n# comment\n2 2\n255\n";
    const unsigned char px[12] = {255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255};
    os.write(reinterpret_cast<const char*>(px), 12);
  }
  const auto img = load_image(path.string());
  EXPECT_EQ(img.height, 2);
  EXPECT_EQ(img.width, 2);
  EXPECT_EQ(img.channels, 3);
  EXPECT_EQ(img(0, 0, 0), 1.0);
  EXPECT_EQ(img(1, 0, 0), 0.0);
  EXPECT_EQ(img(1, 0, 1), 1.0);
  EXPECT_EQ(img(2, 1, 0), 1.0);
  EXPECT_EQ(img(0, 1, 1), 1.0);
  fs::remove(path);
}

TEST(Pnm, GrayRoundTrip) {
  const auto img = random_image(8, 1, 1);
  const auto path = temp_file("g.pgm");
  save_image(img, path.string());
  const auto back = load_image(path.string());
  ASSERT_TRUE(same_shape(back, img));
  for (std::size_t k = 0; k < img.data.size(); ++k) EXPECT_LE(std::abs(back.data[k] - img.data[k]), 1.0 / 510 + 1e-12);
  fs::remove(path);
}

TEST(Png, RoundTripWithinHalfLevel) {
  for (int c : {1, 3}) {
    const auto img = random_image(16, c, 2);
    const auto path = temp_file("rt.png");
    save_image(img, path.string());
    const auto back = load_image(path.string());
    ASSERT_TRUE(same_shape(back, img));
    for (std::size_t k = 0; k < img.data.size(); ++k)
      EXPECT_LE(std::abs(back.data[k] - img.data[k]), 1.0 / 510 + 1e-12);
    fs::remove(path);
  }
}

TEST(ImageIo, Errors) {
  EXPECT_THROW(load_image("/nonexistent/a.png"), IoError);
  EXPECT_THROW(load_image("/nonexistent/a.ppm"), IoError);
  EXPECT_THROW(save_image(Image(2, 2, 1), temp_file("x.bmp").string()), IoError);
  const auto bad = temp_file("bad.png");
  std::ofstream(bad) << "not a png";
  EXPECT_THROW(load_image(bad.string()), IoError);
  fs::remove(bad);
}

TEST(Color, GrayscaleWeights) {
  Image img(1, 1, 3);
  img(0, 0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(to_grayscale(img).data[0], 0.299);
  img(1, 0, 0) = 1.0;
  img(2, 0, 0) = 1.0;
  EXPECT_NEAR(to_grayscale(img).data[0], 1.0, 1e-15);
  const auto rgb = to_rgb(to_grayscale(img));
  EXPECT_EQ(rgb.channels, 3);
  EXPECT_EQ(rgb(2, 0, 0), rgb(0, 0, 0));
}

TEST(Patches, StitchInvertsCrop) {
  for (int grid : {1, 2, 4}) {
    const auto img = random_image(32, 3, 3);
    const auto patches = crop_patches(img, grid);
    ASSERT_EQ(patches.size(), static_cast<std::size_t>(grid * grid));
    EXPECT_EQ(patches.front().height, 32 / grid);
    EXPECT_EQ(stitch_patches(patches, grid).data, img.data);
  }
  EXPECT_THROW(crop_patches(Image(30, 30, 1), 4), InvalidArgument);
  EXPECT_THROW(stitch_patches({Image(2, 2, 1)}, 2), InvalidArgument);
}

TEST(Patches, RowMajorTileOrder) {
  Image img(4, 4, 1);
  img(0, 0, 2) = 1.0;  // top-right tile
  const auto p = crop_patches(img, 2);
  EXPECT_EQ(p[1](0, 0, 0), 1.0);
}

TEST(Inpaint, MaskSides) {
  EXPECT_EQ(inpaint_mask_side(32), 10);
  EXPECT_EQ(inpaint_mask_side(256), 80);
  EXPECT_THROW(inpaint_mask_side(48), InvalidArgument);
}

TEST(Inpaint, CenteredZeroBlock) {
  const Image img(32, 32, 1, 0.5);
  const auto d = distort_inpaint(img);
  int zeros = 0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) zeros += d(0, i, j) == 0.0;
  EXPECT_EQ(zeros, 100);
  EXPECT_EQ(d(0, 11, 11), 0.0);
  EXPECT_EQ(d(0, 20, 20), 0.0);
  EXPECT_EQ(d(0, 10, 11), 0.5);
  EXPECT_EQ(d(0, 21, 20), 0.5);
}

TEST(Blur, KernelValues) {
  const auto k = blur_kernel();
  double sum = 0.0;
  for (double v : k) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-15);
  EXPECT_NEAR(k[12], 0.0541202657989495, 1e-15);  // center weight at sigma 2.5
  EXPECT_EQ(k[0], k[24]);
  EXPECT_EQ(k[7], k[11]);
}

TEST(Blur, PreservesConstantsAndRange) {
  const auto c = distort_blur(Image(32, 32, 3, 0.7));
  for (double v : c.data) EXPECT_NEAR(v, 0.7, 1e-14);
  const auto img = random_image(32, 1, 4);
  for (double v : distort_blur(img).data) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Blur, ReflectIndices) {
  EXPECT_EQ(detail::reflect(-1, 5), 1);
  EXPECT_EQ(detail::reflect(-2, 5), 2);
  EXPECT_EQ(detail::reflect(5, 5), 3);
  EXPECT_EQ(detail::reflect(6, 5), 2);
  EXPECT_EQ(detail::reflect(3, 5), 3);
}

TEST(Noise, StandardDeviationBeforeClamp) {
  const auto f = noise_field(Image(64, 64, 3), 7);
  double s = 0.0, s2 = 0.0;
  for (double v : f) s += v, s2 += v * v;
  const double n = static_cast<double>(f.size());
  const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
  EXPECT_GE(sd, 0.095);
  EXPECT_LE(sd, 0.105);
}

TEST(Noise, DeterministicAndClamped) {
  const auto img = random_image(32, 3, 5);
  EXPECT_EQ(distort_noise(img, 9).data, distort_noise(img, 9).data);
  EXPECT_NE(distort_noise(img, 9).data, distort_noise(img, 10).data);
  for (double v : distort_noise(img, 9).data) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Watermark, LineLayout) {
  const auto l32 = watermark_lines(32);
  EXPECT_EQ(l32, (std::vector<int>{2, 6, 10, 14, 18, 22, 26, 30}));
  const auto l128 = watermark_lines(128);
  EXPECT_EQ(l128.size(), 32u);  // width 4
  EXPECT_EQ(l128.front(), 8);
  EXPECT_EQ(l128[3], 11);
  EXPECT_EQ(l128[4], 24);
  EXPECT_THROW(watermark_lines(16), InvalidArgument);
}

TEST(Watermark, ZerosRowsAndColumns) {
  const auto d = distort_watermark(Image(32, 32, 1, 1.0));
  EXPECT_EQ(d(0, 2, 5), 0.0);
  EXPECT_EQ(d(0, 5, 2), 0.0);
  EXPECT_EQ(d(0, 3, 3), 1.0);
  int zeros = 0;
  for (double v : d.data) zeros += v == 0.0;
  EXPECT_EQ(zeros, 32 * 32 - 24 * 24);
}

TEST(Distort, AllTasksDeterministicAndInRange) {
  const auto img = random_image(32, 3, 6);
  for (Task t : {Task::inpaint, Task::deblur, Task::denoise, Task::watermark, Task::identity}) {
    const auto a = distort(img, t, 3), b = distort(img, t, 3);
    EXPECT_EQ(a.data, b.data) << to_string(t);
    for (double v : a.data) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(parse_task(to_string(t)), t);
  }
  EXPECT_THROW(parse_task("sharpen"), InvalidArgument);
}

TEST(Psnr, UniformOffsetIsTwentyDecibels) {
  const Image target(16, 16, 3, 0.0), pred(16, 16, 3, 0.1);
  EXPECT_NEAR(psnr(pred, target), 20.0, 1e-12);
}

TEST(Psnr, CapAndErrors) {
  const auto img = random_image(8, 1, 1);
  EXPECT_EQ(psnr(img, img), kPsnrCap);
  EXPECT_THROW(psnr(img, Image(8, 8, 3)), InvalidArgument);
  EXPECT_THROW(psnr_batch({}, {}), InvalidArgument);
  const Image z(8, 8, 1, 0.0), h(8, 8, 1, 0.01);
  EXPECT_NEAR(psnr_batch({h, z}, {z, z}), (40.0 + kPsnrCap) / 2, 1e-9);
}

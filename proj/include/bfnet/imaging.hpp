#pragma once
// Images in [0, 1], PNG/PPM/PGM I/O, the four distortions, patches, PSNR.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <png.h>

#include "bfnet/error.hpp"

namespace bfnet {

/// Channel-major image: data[(c * height + i) * width + j].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0) : height(h), width(w), channels(c) {
    if (h < 1 || w < 1) throw InvalidArgument("Image: dimensions must be >= 1");
    if (c != 1 && c != 3) throw InvalidArgument("Image: channels must be 1 or 3");
    data.assign(static_cast<std::size_t>(h) * w * c, fill);
  }

  [[nodiscard]] std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  double& operator()(int c, int i, int j) { return data[c * plane() + static_cast<std::size_t>(i) * width + j]; }
  [[nodiscard]] double operator()(int c, int i, int j) const {
    return data[c * plane() + static_cast<std::size_t>(i) * width + j];
  }

  /// One channel as its own grayscale image.
  [[nodiscard]] Image channel(int c) const {
    Image out(height, width, 1);
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(c * plane()), plane(), out.data.begin());
    return out;
  }
  void set_channel(int c, const Image& g) {
    if (g.channels != 1 || g.height != height || g.width != width) throw InvalidArgument("set_channel: shape mismatch");
    std::copy(g.data.begin(), g.data.end(), data.begin() + static_cast<std::ptrdiff_t>(c * plane()));
  }
};

inline bool same_shape(const Image& a, const Image& b) {
  return a.height == b.height && a.width == b.width && a.channels == b.channels;
}

inline void clamp01(Image& img) {
  for (auto& v : img.data) v = std::clamp(v, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// I/O

namespace detail {

inline std::string lower_ext(const std::string& path) {
  std::string e = std::filesystem::path(path).extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return e;
}

inline std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline Image from_interleaved(const std::vector<std::uint8_t>& px, int h, int w, int c, int maxval = 255) {
  Image img(h, w, c);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int k = 0; k < c; ++k)
        img(k, i, j) = px[(static_cast<std::size_t>(i) * w + j) * c + k] / static_cast<double>(maxval);
  return img;
}

inline std::vector<std::uint8_t> to_interleaved(const Image& img) {
  std::vector<std::uint8_t> px(img.data.size());
  for (int i = 0; i < img.height; ++i)
    for (int j = 0; j < img.width; ++j)
      for (int k = 0; k < img.channels; ++k)
        px[(static_cast<std::size_t>(i) * img.width + j) * img.channels + k] = quantize(img(k, i, j));
  return px;
}

inline Image load_png(const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    throw IoError(path + ": " + (png.message[0] ? png.message : "cannot read PNG"));
  const bool gray = (png.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, px.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw IoError(path + ": " + msg);
  }
  return from_interleaved(px, static_cast<int>(png.height), static_cast<int>(png.width), gray ? 1 : 3);
}

inline void save_png(const Image& img, const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const auto px = to_interleaved(img);
  if (!png_image_write_to_file(&png, path.c_str(), 0, px.data(), 0, nullptr))
    throw IoError(path + ": " + (png.message[0] ? png.message : "cannot write PNG"));
}

/// Reads the next header token of a netpbm file, skipping comments.
inline int pnm_token(std::istream& is, const std::string& path) {
  std::string tok;
  char ch = 0;
  while (is.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(is, skip);
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      tok.push_back(ch);
      while (is.get(ch) && !std::isspace(static_cast<unsigned char>(ch))) tok.push_back(ch);
      break;
    }
  }
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); }))
    throw IoError(path + ": malformed netpbm header");
  return std::stoi(tok);
}

inline Image load_pnm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path + ": cannot open");
  char magic[2] = {};
  if (!is.read(magic, 2) || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
    throw IoError(path + ": only binary PGM (P5) and PPM (P6) are supported");
  const int channels = magic[1] == '6' ? 3 : 1;
  const int w = pnm_token(is, path), h = pnm_token(is, path), maxval = pnm_token(is, path);
  if (w < 1 || h < 1 || maxval < 1 || maxval > 255) throw IoError(path + ": unsupported netpbm dimensions or depth");
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * channels);
  if (!is.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size())))
    throw IoError(path + ": truncated pixel data");
  return from_interleaved(px, h, w, channels, maxval);
}

inline void save_pnm(const Image& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path + ": cannot open for writing");
  os << (img.channels == 3 ? "P6" : "P5") << '\n' << img.width << ' ' << img.height << "\n255\n";
  const auto px = to_interleaved(img);
  os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!os) throw IoError(path + ": write failed");
}

}  // namespace detail

/// PNG, PPM (P6) or PGM (P5), chosen by extension.
inline Image load_image(const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError(path + ": no such file");
  const auto ext = detail::lower_ext(path);
  if (ext == ".png") return detail::load_png(path);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return detail::load_pnm(path);
  throw IoError(path + ": unsupported image format '" + ext + "'");
}

inline void save_image(const Image& img, const std::string& path) {
  const auto ext = detail::lower_ext(path);
  if (ext == ".png") return detail::save_png(img, path);
  if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return detail::save_pnm(img, path);
  throw IoError(path + ": unsupported image format '" + ext + "'");
}

// ---------------------------------------------------------------------------
// Conversions and patches

inline Image to_grayscale(const Image& img) {
  if (img.channels != 3) throw InvalidArgument("to_grayscale: expected 3 channels");
  Image g(img.height, img.width, 1);
  for (std::size_t p = 0; p < img.plane(); ++p)
    g.data[p] = 0.299 * img.data[p] + 0.587 * img.data[img.plane() + p] + 0.114 * img.data[2 * img.plane() + p];
  return g;
}

/// Grayscale to three identical channels.
inline Image to_rgb(const Image& img) {
  if (img.channels == 3) return img;
  Image out(img.height, img.width, 3);
  for (int c = 0; c < 3; ++c) out.set_channel(c, img);
  return out;
}

/// grid x grid non-overlapping tiles in row-major order.
inline std::vector<Image> crop_patches(const Image& img, int grid) {
  if (grid < 1 || img.height % grid || img.width % grid)
    throw InvalidArgument("crop_patches: " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                          " is not divisible by " + std::to_string(grid));
  const int ph = img.height / grid, pw = img.width / grid;
  std::vector<Image> out;
  for (int ti = 0; ti < grid; ++ti)
    for (int tj = 0; tj < grid; ++tj) {
      Image p(ph, pw, img.channels);
      for (int c = 0; c < img.channels; ++c)
        for (int i = 0; i < ph; ++i)
          for (int j = 0; j < pw; ++j) p(c, i, j) = img(c, ti * ph + i, tj * pw + j);
      out.push_back(std::move(p));
    }
  return out;
}

inline Image stitch_patches(const std::vector<Image>& patches, int grid) {
  if (grid < 1 || patches.size() != static_cast<std::size_t>(grid) * grid)
    throw InvalidArgument("stitch_patches: expected " + std::to_string(grid * grid) + " patches");
  const Image& f = patches.front();
  for (const auto& p : patches)
    if (!same_shape(p, f)) throw InvalidArgument("stitch_patches: patches differ in shape");
  Image img(f.height * grid, f.width * grid, f.channels);
  for (int ti = 0; ti < grid; ++ti)
    for (int tj = 0; tj < grid; ++tj) {
      const Image& p = patches[static_cast<std::size_t>(ti) * grid + tj];
      for (int c = 0; c < f.channels; ++c)
        for (int i = 0; i < f.height; ++i)
          for (int j = 0; j < f.width; ++j) img(c, ti * f.height + i, tj * f.width + j) = p(c, i, j);
    }
  return img;
}

// ---------------------------------------------------------------------------
// Distortions

enum class Task { inpaint, deblur, denoise, watermark, identity };

inline const char* to_string(Task t) {
  switch (t) {
    case Task::inpaint: return "inpaint";
    case Task::deblur: return "deblur";
    case Task::denoise: return "denoise";
    case Task::watermark: return "watermark";
    case Task::identity: return "identity";
  }
  return "?";
}

inline Task parse_task(const std::string& s) {
  for (Task t : {Task::inpaint, Task::deblur, Task::denoise, Task::watermark, Task::identity})
    if (s == to_string(t)) return t;
  throw InvalidArgument("unknown task '" + s + "' (inpaint, deblur, denoise, watermark, identity)");
}

/// Side of the centered inpainting mask: 10 pixels at 32x32, scaled linearly.
inline int inpaint_mask_side(int size) {
  if (size != 32 && size != 64 && size != 128 && size != 256)
    throw InvalidArgument("distort_inpaint: size must be 32, 64, 128 or 256, got " + std::to_string(size));
  return 10 * (size / 32);
}

/// The seed is accepted for a uniform distortion interface; the mask is fixed.
inline Image distort_inpaint(const Image& img, std::uint64_t /*seed*/ = 0) {
  if (img.height != img.width) throw InvalidArgument("distort_inpaint: image must be square");
  const int side = inpaint_mask_side(img.height);
  const int lo = (img.height - side) / 2;
  Image out = img;
  for (int c = 0; c < img.channels; ++c)
    for (int i = lo; i < lo + side; ++i)
      for (int j = lo; j < lo + side; ++j) out(c, i, j) = 0.0;
  return out;
}

/// Normalized 5x5 Gaussian, sigma 2.5, row-major.
inline std::array<double, 25> blur_kernel() {
  std::array<double, 25> k{};
  double sum = 0.0;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j) {
      const double v = std::exp(-(i * i + j * j) / (2.0 * 2.5 * 2.5));
      k[static_cast<std::size_t>((i + 2) * 5 + j + 2)] = v;
      sum += v;
    }
  for (auto& v : k) v /= sum;
  return k;
}

namespace detail {
/// Mirror index without repeating the edge pixel (-1 -> 1, n -> n - 2).
inline int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) i = i < 0 ? -i : 2 * (n - 1) - i;
  return i;
}
}  // namespace detail

inline Image distort_blur(const Image& img) {
  const auto k = blur_kernel();
  Image out(img.height, img.width, img.channels);
  for (int c = 0; c < img.channels; ++c)
    for (int i = 0; i < img.height; ++i)
      for (int j = 0; j < img.width; ++j) {
        double s = 0.0;
        for (int a = -2; a <= 2; ++a)
          for (int b = -2; b <= 2; ++b)
            s += k[static_cast<std::size_t>((a + 2) * 5 + b + 2)] *
                 img(c, detail::reflect(i + a, img.height), detail::reflect(j + b, img.width));
        out(c, i, j) = s;
      }
  return out;
}

/// The N(0, 0.1^2) field that distort_noise adds for `seed`.
inline std::vector<double> noise_field(const Image& img, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<double> f(img.data.size());
  for (auto& v : f) v = n(rng);
  return f;
}

inline Image distort_noise(const Image& img, std::uint64_t seed) {
  const auto f = noise_field(img, seed);
  Image out = img;
  for (std::size_t p = 0; p < out.data.size(); ++p) out.data[p] = std::clamp(out.data[p] + f[p], 0.0, 1.0);
  return out;
}

/// Rows (and columns) blacked out by the watermark: 8 lines of width
/// max(1, size/32), spacing size/8, first line at size/16.
inline std::vector<int> watermark_lines(int size) {
  if (size < 32) throw InvalidArgument("distort_watermark: size must be >= 32");
  const int width = std::max(1, size / 32), spacing = size / 8, offset = size / 16;
  std::vector<int> rows;
  for (int l = 0; l < 8; ++l)
    for (int k = 0; k < width; ++k) rows.push_back(offset + l * spacing + k);
  return rows;
}

inline Image distort_watermark(const Image& img) {
  if (img.height != img.width) throw InvalidArgument("distort_watermark: image must be square");
  const auto lines = watermark_lines(img.height);
  Image out = img;
  for (int c = 0; c < img.channels; ++c)
    for (int l : lines)
      for (int t = 0; t < img.width; ++t) {
        out(c, l, t) = 0.0;
        out(c, t, l) = 0.0;
      }
  return out;
}

inline Image distort(const Image& img, Task task, std::uint64_t seed) {
  switch (task) {
    case Task::inpaint: return distort_inpaint(img, seed);
    case Task::deblur: return distort_blur(img);
    case Task::denoise: return distort_noise(img, seed);
    case Task::watermark: return distort_watermark(img);
    case Task::identity: return img;
  }
  return img;
}

// ---------------------------------------------------------------------------
// PSNR

inline constexpr double kPsnrCap = 100.0;

/// -10 log10(mean squared error), capped for exact matches.
inline double psnr(const Image& pred, const Image& target) {
  if (!same_shape(pred, target)) throw InvalidArgument("psnr: shape mismatch");
  double se = 0.0;
  for (std::size_t p = 0; p < pred.data.size(); ++p) {
    const double d = pred.data[p] - target.data[p];
    se += d * d;
  }
  if (se == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(se / static_cast<double>(pred.data.size())));
}

inline double psnr_batch(const std::vector<Image>& preds, const std::vector<Image>& targets) {
  if (preds.size() != targets.size() || preds.empty()) throw InvalidArgument("psnr_batch: batch sizes differ or empty");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += psnr(preds[i], targets[i]);
  return s / static_cast<double>(preds.size());
}

}  // namespace bfnet

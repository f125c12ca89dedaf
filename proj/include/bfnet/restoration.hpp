#pragma once
// ButterflyNet2D^2 (forward net followed by inverse net) for image
// restoration, the synthetic corpus, dataset manifests and the training
// harness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "bfnet/butterflynet.hpp"
#include "bfnet/imaging.hpp"
#include "bfnet/training.hpp"

namespace bfnet {

struct ComposedNet {
  ButterflyNet2D first;   // forward transform, real input
  ButterflyNet2D second;  // inverse transform, complex input

  [[nodiscard]] int size() const { return first.config.input_height(); }
};

inline ComposedNet build_composed(int size, int L, int r) {
  ComposedNet net;
  net.first = build(NetConfig::for_sizes(L, r, size, size, size, size, Direction::forward, InputKind::real));
  net.second = build(NetConfig::for_sizes(L, r, size, size, size, size, Direction::inverse, InputKind::complex));
  return net;
}

/// Multiplies the map of `net` by c > 0 (ReLU is positively homogeneous, so
/// scaling the last layer is enough).
inline void scale_output(ButterflyNet2D& net, double c) {
  if (!(c > 0.0)) throw InvalidArgument("scale_output: factor must be positive");
  for (double& w : net.layers.back().weight) w *= c;
  for (double& b : net.layers.back().bias) b *= c;
}

/// Both halves at Fourier initialization, approximating the identity.  The
/// 1/N of the inverse is split as 1/sqrt(N) per half (unitary pair); left
/// whole in the inverse's last layer, those weights sit near 1e-3, two
/// orders below every other layer, and the first Adam steps wipe them out.
inline ComposedNet compose_identity(int size, int L, int r) {
  ComposedNet net = build_composed(size, L, r);
  init_fourier(net.first);
  init_fourier(net.second);
  scale_output(net.first, 1.0 / size);
  scale_output(net.second, static_cast<double>(size));
  return net;
}

enum class InitKind { fourier, kaiming_uniform, kaiming_normal, orthogonal };

inline const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::fourier: return "fourier";
    case InitKind::kaiming_uniform: return "kaiming_uniform";
    case InitKind::kaiming_normal: return "kaiming_normal";
    case InitKind::orthogonal: return "orthogonal";
  }
  return "?";
}

inline InitKind parse_init_kind(const std::string& s) {
  for (InitKind k : {InitKind::fourier, InitKind::kaiming_uniform, InitKind::kaiming_normal, InitKind::orthogonal})
    if (s == to_string(k)) return k;
  throw InvalidArgument("unknown init '" + s + "' (fourier, kaiming_uniform, kaiming_normal, orthogonal)");
}

inline ComposedNet make_composed(int size, int L, int r, InitKind init, std::uint64_t seed) {
  if (init == InitKind::fourier) return compose_identity(size, L, r);
  ComposedNet net = build_composed(size, L, r);
  const InitScheme s = init == InitKind::kaiming_uniform  ? InitScheme::kaiming_uniform
                       : init == InitKind::kaiming_normal ? InitScheme::kaiming_normal
                                                          : InitScheme::orthogonal;
  init_random(net.first, s, seed);
  init_random(net.second, s, seed + 1);
  return net;
}

/// Encoded output grids of the composed map.  The first net's encoded
/// output feeds the second net unchanged.
inline std::vector<EncodedTensor> forward(const ComposedNet& net, std::vector<EncodedTensor> batch) {
  return forward(net.second, forward(net.first, std::move(batch)));
}

inline ComplexGrid apply(const ComposedNet& net, const ComplexGrid& x) {
  return decode_grid(forward(net, std::vector<EncodedTensor>{encode_grid(x)}).front());
}

inline ComplexGrid to_grid(const Image& gray) {
  if (gray.channels != 1) throw InvalidArgument("to_grid: expected a single channel");
  ComplexGrid g(gray.height, gray.width);
  for (std::size_t p = 0; p < gray.data.size(); ++p) g.values[p] = gray.data[p];
  return g;
}

/// Real part clamped to [0, 1].
inline Image to_image(const ComplexGrid& g) {
  Image img(g.nx, g.ny, 1);
  for (std::size_t p = 0; p < img.data.size(); ++p) img.data[p] = std::clamp(g.values[p].real(), 0.0, 1.0);
  return img;
}

/// Relative identity error ||net(x) - x|| / ||x|| averaged over random
/// uniform [0, 1) images.
inline double identity_error(const ComposedNet& net, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double total = 0.0;
  for (int s = 0; s < samples; ++s) {
    ComplexGrid x(net.size(), net.size());
    for (auto& v : x.values) v = u(rng);
    total += relative_l2(apply(net, x).values, x.values);
  }
  return total / samples;
}

/// Restores a grayscale image of the net's size.
inline Image restore(const ComposedNet& net, const Image& gray) { return to_image(apply(net, to_grid(gray))); }

/// Restores any square image whose side is a multiple of the net size: each
/// color channel is cut into patches, restored and stitched back.
inline Image restore_image(const ComposedNet& net, const Image& img) {
  const int p = net.size();
  if (img.height != img.width || img.height % p)
    throw InvalidArgument("restore_image: image side must be a multiple of " + std::to_string(p));
  const int grid = img.height / p;
  Image out(img.height, img.width, img.channels);
  for (int c = 0; c < img.channels; ++c) {
    auto patches = crop_patches(img.channel(c), grid);
    for (auto& patch : patches) patch = restore(net, patch);
    out.set_channel(c, stitch_patches(patches, grid));
  }
  return out;
}

// ---------------------------------------------------------------------------
// One training step

struct ComposedTrace {
  ForwardTrace first;
  ForwardTrace second;
};

/// Loss on the complex output against the (real) clean targets, gradients of
/// both halves accumulated into g1, g2.
inline double composed_step(const ComposedNet& net, const std::vector<Image>& inputs, const std::vector<Image>& targets,
                            GradientBuffers& g1, GradientBuffers& g2, ComposedTrace& trace) {
  std::vector<EncodedTensor> batch;
  std::vector<ComplexGrid> tgt;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    batch.push_back(encode_grid(to_grid(inputs[i])));
    tgt.push_back(to_grid(targets[i]));
  }
  auto mid = forward_traced(net.first, std::move(batch), trace.first);
  const auto out = forward_traced(net.second, std::move(mid), trace.second);
  const auto lg = loss_rel_l2_grad(out, tgt);
  std::vector<EncodedTensor> dmid;
  backward(net.second, trace.second, lg.grad, g2, &dmid);
  backward(net.first, trace.first, dmid, g1);
  return lg.loss;
}

// ---------------------------------------------------------------------------
// Datasets

struct DatasetEntry {
  std::string path;   // relative to root
  std::string split;  // "train" or "test"
};

struct DatasetManifest {
  std::string root;
  int size = 32;
  std::vector<DatasetEntry> entries;
};

inline void save_manifest(const DatasetManifest& m, const std::string& path) {
  nlohmann::json j;
  j["root"] = m.root;
  j["size"] = m.size;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : m.entries) j["entries"].push_back({{"path", e.path}, {"split", e.split}});
  std::ofstream os(path);
  if (!os) throw IoError(path + ": cannot open for writing");
  os << j.dump(2) << '\n';
}

/// Reads a manifest.  A relative root is taken relative to the manifest.
inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError(path + ": cannot open");
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(is);
    m.root = j.value("root", std::string("."));
    m.size = j.at("size").get<int>();
    for (const auto& e : j.at("entries"))
      m.entries.push_back({e.at("path").get<std::string>(), e.value("split", std::string("train"))});
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  if (std::filesystem::path(m.root).is_relative())
    m.root = (std::filesystem::path(path).parent_path() / m.root).lexically_normal().string();
  if (m.entries.empty()) throw InvalidArgument(path + ": manifest has no entries");
  for (const auto& e : m.entries)
    if (e.split != "train" && e.split != "test") throw InvalidArgument(path + ": split must be train or test");
  return m;
}

/// Builds a manifest from every PNG/PPM/PGM in a directory (sorted by
/// name); every `test_every`-th image goes to the test split.
inline DatasetManifest manifest_from_directory(const std::string& dir, int size, int test_every = 4) {
  if (!std::filesystem::is_directory(dir)) throw IoError(dir + ": not a directory");
  std::vector<std::string> names;
  for (const auto& f : std::filesystem::directory_iterator(dir)) {
    const auto ext = detail::lower_ext(f.path().string());
    if (ext == ".png" || ext == ".ppm" || ext == ".pgm") names.push_back(f.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw InvalidArgument(dir + ": no images found");
  DatasetManifest m{dir, size, {}};
  for (std::size_t i = 0; i < names.size(); ++i)
    m.entries.push_back({names[i], (i + 1) % static_cast<std::size_t>(test_every) == 0 ? "test" : "train"});
  return m;
}

/// Bilinear resampling to size x size (pixel centers aligned).
inline Image resize_square(const Image& img, int size) {
  if (img.height == size && img.width == size) return img;
  Image out(size, size, img.channels);
  for (int c = 0; c < img.channels; ++c)
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) {
        const double y = std::clamp((i + 0.5) * img.height / size - 0.5, 0.0, img.height - 1.0);
        const double x = std::clamp((j + 0.5) * img.width / size - 0.5, 0.0, img.width - 1.0);
        const int y0 = static_cast<int>(y), x0 = static_cast<int>(x);
        const int y1 = std::min(y0 + 1, img.height - 1), x1 = std::min(x0 + 1, img.width - 1);
        const double fy = y - y0, fx = x - x0;
        out(c, i, j) = (1 - fy) * ((1 - fx) * img(c, y0, x0) + fx * img(c, y0, x1)) +
                       fy * ((1 - fx) * img(c, y1, x0) + fx * img(c, y1, x1));
      }
  return out;
}

struct Dataset {
  std::vector<Image> train;  // RGB, size x size
  std::vector<Image> test;
  int size = 0;
};

inline Dataset load_dataset(const DatasetManifest& m) {
  if (m.entries.empty()) throw InvalidArgument("load_dataset: empty manifest");
  Dataset d;
  d.size = m.size;
  for (const auto& e : m.entries) {
    Image img = to_rgb(load_image((std::filesystem::path(m.root) / e.path).string()));
    img = resize_square(img, m.size);
    (e.split == "test" ? d.test : d.train).push_back(std::move(img));
  }
  if (d.train.empty() || d.test.empty()) throw InvalidArgument("load_dataset: both splits need at least one image");
  return d;
}

/// Smooth random RGB images: linear gradients, checkerboards with soft
/// edges, and sums of Gaussian blobs.
inline Image synthetic_image(int size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(size, size, 3);
  const int kind = static_cast<int>(rng() % 3);
  for (int c = 0; c < 3; ++c) {
    const double base = 0.2 + 0.6 * u(rng), amp = 0.1 + 0.3 * u(rng);
    if (kind == 0) {
      const double a = 2.0 * u(rng) - 1.0, b = 2.0 * u(rng) - 1.0;
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) img(c, i, j) = base + amp * (a * (i + 0.5) + b * (j + 0.5)) / size;
    } else if (kind == 1) {
      const double period = size / (2.0 + std::floor(4.0 * u(rng)));
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) {
          const double s = std::sin(std::numbers::pi * (i + 0.5) / period) * std::sin(std::numbers::pi * (j + 0.5) / period);
          img(c, i, j) = base + amp * std::tanh(3.0 * s);
        }
    } else {
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) img(c, i, j) = base - amp;
      const int blobs = 2 + static_cast<int>(rng() % 3);
      for (int k = 0; k < blobs; ++k) {
        const double ci = size * u(rng), cj = size * u(rng), s = size * (0.08 + 0.15 * u(rng)), h = amp * u(rng) * 2.0;
        for (int i = 0; i < size; ++i)
          for (int j = 0; j < size; ++j)
            img(c, i, j) += h * std::exp(-((i - ci) * (i - ci) + (j - cj) * (j - cj)) / (2 * s * s));
      }
    }
  }
  clamp01(img);
  return img;
}

/// Writes `count` synthetic PNGs plus manifest.json into dir; every fourth
/// image is a test image.  Returns the manifest.
inline DatasetManifest write_synthetic_corpus(const std::string& dir, int count, int size, std::uint64_t seed) {
  if (count < 2) throw InvalidArgument("synthetic corpus needs at least 2 images");
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(seed);
  DatasetManifest m{".", size, {}};
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%04d.png", i);
    save_image(synthetic_image(size, rng), (std::filesystem::path(dir) / name).string());
    m.entries.push_back({name, (i + 1) % 4 == 0 ? "test" : "train"});
  }
  save_manifest(m, (std::filesystem::path(dir) / "manifest.json").string());
  m.root = dir;
  return m;
}

// ---------------------------------------------------------------------------
// Restoration task

struct RestorationOptions {
  int L = 5;
  int r = 2;
  int epochs = 12;
  int batch = 20;
  double lr = 1e-4;  // lowest final training loss over 2e-3 .. 1e-5 at 32 x 32, L = 5, r = 4
  std::uint64_t seed = 0;
  int patch = 32;  // net input size; larger images are cut into patches
};

struct RestorationResult {
  ComposedNet net;
  std::vector<TrainRecord> history;
  double psnr_restored = 0.0;
  double psnr_distorted = 0.0;
  double psnr_initial = 0.0;  // restored by the untrained net
  std::vector<Image> test_clean;
  std::vector<Image> test_distorted;
  std::vector<Image> test_restored;
};

inline double evaluate(const ComposedNet& net, const std::vector<Image>& distorted, const std::vector<Image>& clean,
                       std::vector<Image>* restored = nullptr) {
  std::vector<Image> out;
  for (const auto& d : distorted) out.push_back(restore_image(net, d));
  const double p = psnr_batch(out, clean);
  if (restored) *restored = std::move(out);
  return p;
}

/// Trains ButterflyNet2D^2 on grayscale training patches (distorted ->
/// clean), Adam with a per-update plateau schedule, then restores every
/// color channel of the test images.
inline RestorationResult run_restoration_task(Task task, const Dataset& data, InitKind init,
                                              const RestorationOptions& opt) {
  if (data.train.empty() || data.test.empty()) throw InvalidArgument("run_restoration_task: empty dataset");
  if (opt.epochs < 0 || opt.batch < 1) throw InvalidArgument("run_restoration_task: bad epochs or batch");
  if (data.size % opt.patch) throw InvalidArgument("run_restoration_task: image size is not a multiple of the patch");
  const int grid = data.size / opt.patch;

  std::vector<Image> inputs, targets;
  for (std::size_t i = 0; i < data.train.size(); ++i) {
    const Image gray = to_grayscale(data.train[i]);
    const auto clean = crop_patches(gray, grid);
    const auto dist = crop_patches(distort(gray, task, opt.seed * 7919 + i), grid);
    inputs.insert(inputs.end(), dist.begin(), dist.end());
    targets.insert(targets.end(), clean.begin(), clean.end());
  }

  RestorationResult res;
  res.net = make_composed(opt.patch, opt.L, opt.r, init, opt.seed);
  res.test_clean = data.test;
  for (std::size_t i = 0; i < data.test.size(); ++i)
    res.test_distorted.push_back(distort(data.test[i], task, opt.seed * 7919 + 1000003 + i));
  res.psnr_distorted = psnr_batch(res.test_distorted, res.test_clean);
  res.psnr_initial = evaluate(res.net, res.test_distorted, res.test_clean);

  std::mt19937_64 rng(opt.seed);
  AdamState a1 = make_adam(res.net.first, opt.lr), a2 = make_adam(res.net.second, opt.lr);
  PlateauScheduler sched;
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  ComposedTrace trace;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opt.batch));
      std::vector<Image> bi, bt;
      for (std::size_t k = start; k < end; ++k) {
        bi.push_back(inputs[order[k]]);
        bt.push_back(targets[order[k]]);
      }
      GradientBuffers g1 = GradientBuffers::zeros_like(res.net.first);
      GradientBuffers g2 = GradientBuffers::zeros_like(res.net.second);
      const double loss = composed_step(res.net, bi, bt, g1, g2, trace);
      adam_step(a1, res.net.first, g1);
      adam_step(a2, res.net.second, g2);
      res.history.push_back({a1.step, loss, a1.lr});
      if (sched.observe(loss, a1.lr)) a2.lr = a1.lr;
    }
  }
  res.psnr_restored = evaluate(res.net, res.test_distorted, res.test_clean, &res.test_restored);
  return res;
}

}  // namespace bfnet

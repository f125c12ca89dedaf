// bfnet: approximation benchmarks, transform training, parameter counts and
// image restoration runs.  Tables go to stdout (and to --out as files);
// progress and timings go to stderr so reports stay byte-identical.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bfnet/bfnet.hpp"

namespace fs = std::filesystem;
using namespace bfnet;

namespace {

enum Exit { kOk = 0, kInvalid = 2, kResource = 3, kIo = 4 };

/// Largest grid side whose transform matrix we agree to materialize.
constexpr int kMaxMaterialize = 64;

struct Options {
  int size = 16;
  std::vector<int> layers{4};
  std::vector<int> cheb{2};
  std::string direction = "forward";
  std::vector<std::string> init{"fourier"};
  std::uint64_t seed = 0;
  int epochs = 200;
  int batch = 20;
  double lr = 0.0;  // 0: per-command default
  std::string dataset = "synthetic";
  std::vector<std::string> task{"deblur"};
  std::string out;
  std::string format = "csv";
  int threads = 0;
};

// ---------------------------------------------------------------------------
// Tables

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::string render(const std::string& format) const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
      if (format == "markdown") {
        os << '|';
        for (const auto& c : cells) os << ' ' << c << " |";
      } else {
        for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << cells[k];
      }
      os << '\n';
    };
    line(header);
    if (format == "markdown") line(std::vector<std::string>(header.size(), "---"));
    for (const auto& r : rows) line(r);
    return os.str();
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os || !(os << text)) throw IoError(path.string() + ": cannot write");
}

/// Prints a table and, with --out, stores it as <stem>.csv or <stem>.md.
void emit(const Options& o, const Table& t, const std::string& stem) {
  const std::string text = t.render(o.format);
  std::cout << text << std::flush;
  if (!o.out.empty()) write_text(fs::path(o.out) / (stem + (o.format == "markdown" ? ".md" : ".csv")), text);
}

void write_history(const fs::path& path, const std::vector<TrainRecord>& h) {
  std::ostringstream os;
  os << "step,loss,lr\n";
  char buf[96];
  for (const auto& rec : h) {
    std::snprintf(buf, sizeof buf, "%ld,%.9e,%.6e\n", rec.step, rec.loss, rec.lr);
    os << buf;
  }
  write_text(path, os.str());
}

/// Minimal SVG line plot of loss against step, log-scaled y.
void write_loss_svg(const fs::path& path, const std::vector<std::pair<std::string, std::vector<TrainRecord>>>& curves) {
  const double W = 640, H = 400, pad = 50;
  double lo = 1e300, hi = -1e300;
  long steps = 1;
  for (const auto& [name, h] : curves)
    for (const auto& rec : h) {
      if (rec.loss <= 0) continue;
      lo = std::min(lo, std::log10(rec.loss)), hi = std::max(hi, std::log10(rec.loss));
      steps = std::max(steps, rec.step);
    }
  if (lo > hi) lo = 0, hi = 1;
  if (hi - lo < 1e-9) hi = lo + 1;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\"" << H - pad
     << "\" stroke=\"black\"/>\n<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\""
     << H - pad << "\" stroke=\"black\"/>\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "<text x=\"5\" y=\"%g\" font-size=\"11\">1e%.1f</text>\n", pad, hi);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"5\" y=\"%g\" font-size=\"11\">1e%.1f</text>\n", H - pad, lo);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" font-size=\"11\">step %ld</text>\n", W - pad - 40,
                H - pad + 20, steps);
  os << buf;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = colors[c % 5];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (const auto& rec : curves[c].second) {
      if (rec.loss <= 0) continue;
      const double x = pad + (W - 2 * pad) * rec.step / steps;
      const double y = H - pad - (H - 2 * pad) * (std::log10(rec.loss) - lo) / (hi - lo);
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x, y);
      os << buf;
    }
    os << "\"/>\n";
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%zu\" font-size=\"12\" fill=\"%s\">%s</text>\n", W - 170,
                  static_cast<std::size_t>(pad + 16 * c), color, curves[c].first.c_str());
    os << buf;
  }
  os << "</svg>\n";
  write_text(path, os.str());
}

/// Side-by-side original | distorted | restored with a 2 px white gutter.
Image triptych(const Image& a, const Image& b, const Image& c) {
  const int gap = 2;
  Image out(a.height, 3 * a.width + 2 * gap, a.channels, 1.0);
  const Image* parts[] = {&a, &b, &c};
  for (int p = 0; p < 3; ++p)
    for (int ch = 0; ch < a.channels; ++ch)
      for (int i = 0; i < a.height; ++i)
        for (int j = 0; j < a.width; ++j) out(ch, i, p * (a.width + gap) + j) = (*parts[p])(ch, i, j);
  return out;
}

Direction parse_direction(const std::string& s) {
  if (s == "forward") return Direction::forward;
  if (s == "inverse") return Direction::inverse;
  throw InvalidArgument("--direction must be forward or inverse");
}

int thread_count(const Options& o) { return o.threads > 0 ? o.threads : default_thread_count(); }

NetConfig square(int L, int r, int size, Direction d) {
  return NetConfig::for_sizes(L, r, size, size, size, size, d,
                              d == Direction::forward ? InputKind::real : InputKind::complex);
}

void prepare_out(const Options& o) {
  if (o.out.empty()) return;
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec || !fs::is_directory(o.out)) throw IoError(o.out + ": cannot create output directory");
}

void check_materialize(int size) {
  if (size > kMaxMaterialize)
    throw ResourceLimit("matrix materialization is limited to " + std::to_string(kMaxMaterialize) + "x" +
                        std::to_string(kMaxMaterialize) + " grids (requested " + std::to_string(size) + ")");
}

// ---------------------------------------------------------------------------
// Commands

int approx_bench(const Options& o) {
  check_materialize(o.size);
  prepare_out(o);
  const Direction d = parse_direction(o.direction);
  const ComplexMatrix exact = exact_transform_matrix(o.size, o.size, o.size, o.size, d);
  Table t{{"L", "r", "eps_1", "eps_2", "eps_inf"}, {}};
  for (int L : o.layers)
    for (int r : o.cheb) {
      const auto t0 = std::chrono::steady_clock::now();
      ComplexMatrix m;
      {
        ButterflyNet2D net = build(square(L, r, o.size, d));
        init_fourier(net);
        m = materialize_matrix(net, thread_count(o));
      }
      const EpsilonMetrics e = epsilon_metrics(std::move(m), exact);
      std::cerr << "L=" << L << " r=" << r << " done in "
                << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
      t.rows.push_back({std::to_string(L), std::to_string(r), sci(e.eps1), sci(e.eps2), sci(e.eps_inf)});
    }
  emit(o, t, "approx_bench");
  return kOk;
}

int train_transform_cmd(const Options& o) {
  check_materialize(o.size);
  prepare_out(o);
  const Direction d = parse_direction(o.direction);
  const int L = o.layers.front(), r = o.cheb.front();
  Table t{{"L", "r", "init", "stage", "eps_1", "eps_2", "eps_inf"}, {}};
  std::vector<std::pair<std::string, std::vector<TrainRecord>>> curves;
  for (const auto& name : o.init) {
    ButterflyNet2D net = build(square(L, r, o.size, d));
    if (name == "fourier")
      init_fourier(net);
    else
      init_random(net, parse_init_scheme(name), o.seed);
    const EpsilonMetrics before = transform_epsilon(net);
    TrainOptions opt;
    opt.epochs = o.epochs, opt.batch = o.batch, opt.seed = o.seed;
    if (o.lr > 0) opt.lr = o.lr;
    const auto history = train_transform(net, opt);
    const EpsilonMetrics after = o.epochs == 0 ? before : transform_epsilon(net);
    for (const auto& [stage, e] : {std::pair{"before", before}, std::pair{"after", after}})
      t.rows.push_back({std::to_string(L), std::to_string(r), name, stage, sci(e.eps1), sci(e.eps2), sci(e.eps_inf)});
    if (!o.out.empty()) {
      write_history(fs::path(o.out) / ("loss_" + name + ".csv"), history);
      save_checkpoint(net, (fs::path(o.out) / ("net_" + name + ".bfn")).string());
    }
    curves.emplace_back(name, history);
  }
  if (!o.out.empty()) write_loss_svg(fs::path(o.out) / "loss.svg", curves);
  emit(o, t, "train_transform");
  return kOk;
}

int param_count_cmd(const Options& o) {
  prepare_out(o);
  const Direction d = parse_direction(o.direction);
  Table layers{{"L", "r", "layer", "weights", "biases", "closed_form_weights", "closed_form_biases", "dense_weights"},
               {}};
  Table totals{{"L", "r", "N", "sparse_total", "closed_form_total", "dense_total", "dense_over_sparse"}, {}};
  for (int L : o.layers)
    for (int r : o.cheb) {
      const NetConfig c = square(L, r, o.size, d);
      const ParamReport rep = param_count(c);
      for (std::size_t l = 0; l < rep.layers.size(); ++l) {
        const LayerCount& lc = rep.layers[l];
        layers.rows.push_back({std::to_string(L), std::to_string(r), std::to_string(l), std::to_string(lc.weights),
                               std::to_string(lc.biases), std::to_string(lc.formula_weights),
                               std::to_string(lc.formula_biases), std::to_string(lc.dense_weights)});
      }
      const long n = static_cast<long>(c.input_height()) * c.input_width();
      totals.rows.push_back({std::to_string(L), std::to_string(r), std::to_string(n), std::to_string(rep.total),
                             std::to_string(rep.formula_total), std::to_string(rep.dense_total),
                             fixed2(rep.dense_ratio())});
    }
  emit(o, layers, "param_count_layers");
  std::cout << '\n';
  emit(o, totals, "param_count_totals");
  return kOk;
}

Dataset open_dataset(const Options& o, int size) {
  if (o.dataset == "synthetic" || o.dataset.rfind("synthetic:", 0) == 0) {
    const int count = o.dataset == "synthetic" ? 64 : std::stoi(o.dataset.substr(10));
    const fs::path dir = o.out.empty() ? fs::temp_directory_path() / "bfnet_corpus" : fs::path(o.out) / "corpus";
    return load_dataset(write_synthetic_corpus(dir.string(), count, size, o.seed));
  }
  if (fs::is_directory(o.dataset)) {
    const fs::path manifest = fs::path(o.dataset) / "manifest.json";
    return load_dataset(fs::exists(manifest) ? load_manifest(manifest.string())
                                             : manifest_from_directory(o.dataset, size));
  }
  return load_dataset(load_manifest(o.dataset));
}

int image_task(const Options& o) {
  prepare_out(o);
  const int L = o.layers.front(), r = o.cheb.front();
  const Dataset data = open_dataset(o, o.size);
  RestorationOptions opt;
  opt.L = L, opt.r = r, opt.epochs = o.epochs, opt.batch = o.batch, opt.seed = o.seed;
  if (o.lr > 0) opt.lr = o.lr;
  opt.patch = std::min(o.size, data.size);
  Table t{{"L", "r", "task", "init", "psnr_distorted", "psnr_untrained", "psnr_trained"}, {}};
  for (const auto& task_name : o.task) {
    const Task task = parse_task(task_name);
    std::vector<std::pair<std::string, std::vector<TrainRecord>>> curves;
    for (const auto& init_name : o.init) {
      std::cerr << task_name << " / " << init_name << "...\n";
      const RestorationResult res = run_restoration_task(task, data, parse_init_kind(init_name), opt);
      t.rows.push_back({std::to_string(L), std::to_string(r), task_name, init_name, fixed2(res.psnr_distorted),
                        fixed2(res.psnr_initial), fixed2(res.psnr_restored)});
      if (!o.out.empty()) {
        const std::string stem = task_name + "_" + init_name;
        write_history(fs::path(o.out) / ("loss_" + stem + ".csv"), res.history);
        save_image(triptych(res.test_clean[0], res.test_distorted[0], res.test_restored[0]),
                   (fs::path(o.out) / ("sample_" + stem + ".png")).string());
      }
      curves.emplace_back(init_name, res.history);
    }
    if (!o.out.empty()) write_loss_svg(fs::path(o.out) / ("loss_" + task_name + ".svg"), curves);
  }
  emit(o, t, "image_task");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ButterflyNet2D: butterfly-structured CNNs for the 2D DFT"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--size", o.size, "grid side N (input and output are N x N)")->check(CLI::PositiveNumber);
    sub->add_option("--layers", o.layers, "number of butterfly levels L (list allowed)")->delimiter(',');
    sub->add_option("--cheb", o.cheb, "Chebyshev points per axis r (list allowed)")->delimiter(',');
    sub->add_option("--direction", o.direction, "forward or inverse")
        ->check(CLI::IsMember({"forward", "inverse"}));
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--out", o.out, "output directory for reports, curves, checkpoints and images");
    sub->add_option("--format", o.format, "report format")->check(CLI::IsMember({"csv", "markdown"}));
    sub->add_option("--threads", o.threads, "worker threads (default: BFNET_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
  };
  auto training = [&](CLI::App* sub) {
    sub->add_option("--init", o.init, "fourier, kaiming_uniform, kaiming_normal, orthogonal (list allowed)")
        ->delimiter(',')
        ->check(CLI::IsMember({"fourier", "kaiming_uniform", "kaiming_normal", "orthogonal"}));
    sub->add_option("--epochs", o.epochs, "training epochs")->check(CLI::NonNegativeNumber);
    sub->add_option("--batch", o.batch, "batch size")->check(CLI::PositiveNumber);
    sub->add_option("--lr", o.lr, "Adam learning rate (default 1e-3 for train-transform, 1e-4 for image-task)")->check(CLI::PositiveNumber);
  };

  auto* bench = app.add_subcommand("approx-bench", "relative matrix-norm errors of Fourier-initialized networks");
  common(bench);
  auto* train = app.add_subcommand("train-transform", "train toward the DFT and report errors before and after");
  common(train);
  training(train);
  auto* params = app.add_subcommand("param-count", "per-layer and total weight counts against a dense CNN");
  common(params);
  auto* image = app.add_subcommand("image-task", "train ButterflyNet2D^2 on an image restoration task");
  common(image);
  training(image);
  image->add_option("--dataset", o.dataset, "directory, manifest.json, or synthetic[:count]");
  image->add_option("--task", o.task, "inpaint, deblur, denoise, watermark, identity (list allowed)")
      ->delimiter(',')
      ->check(CLI::IsMember({"inpaint", "deblur", "denoise", "watermark", "identity"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (o.layers.empty() || o.cheb.empty() || o.init.empty() || o.task.empty())
      throw InvalidArgument("list options need at least one value");
    if (*bench) return approx_bench(o);
    if (*train) return train_transform_cmd(o);
    if (*params) return param_count_cmd(o);
    return image_task(o);
  } catch (const ResourceLimit& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kResource;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

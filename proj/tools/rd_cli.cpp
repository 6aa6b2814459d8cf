// Command-line surface for the Riemannian-dimension toolkit: analyze a model
// bundle, run the synthetic training demo, verify the subspace geometry, and
// emit subspace-isomorphism certificates.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rd/bounds.hpp"
#include "rd/geometry.hpp"
#include "rd/io.hpp"
#include "rd/network.hpp"
#include "rd/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitInputError = 2;
constexpr int kExitNumericError = 3;

int exit_code_for(const rd::Error& e) {
  switch (e.code()) {
    case rd::ErrorCode::BadMagic:
    case rd::ErrorCode::VersionUnsupported:
    case rd::ErrorCode::TruncatedFile:
    case rd::ErrorCode::DuplicateName:
    case rd::ErrorCode::IoFailure:
    case rd::ErrorCode::ShapeMismatch:
    case rd::ErrorCode::DimensionMismatch:
    case rd::ErrorCode::MismatchedLayers:
    case rd::ErrorCode::SpectrumTooShort:
    case rd::ErrorCode::SketchDimExceedsRows:
      return kExitInputError;
    default:
      return kExitNumericError;
  }
}

struct SynthSpec {
  rd::index_t n = 0;
  rd::index_t d0 = 0;
  rd::index_t classes = 0;
  double spread = 0.0;
};

SynthSpec parse_synth(const std::string& text) {
  SynthSpec s;
  char extra = 0;
  unsigned long long n = 0, d0 = 0, classes = 0;
  if (std::sscanf(text.c_str(), "%llu,%llu,%llu,%lf%c", &n, &d0, &classes,
                  &s.spread, &extra) != 4)
    rd::fail(rd::ErrorCode::ShapeMismatch,
             "--synthetic expects n,d0,classes,spread, got '" + text + "'");
  s.n = n;
  s.d0 = d0;
  s.classes = classes;
  return s;
}

std::vector<rd::index_t> parse_index_list(const std::string& text,
                                          const char* flag) {
  std::vector<rd::index_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoull(item));
    } catch (const std::exception&) {
      rd::fail(rd::ErrorCode::ShapeMismatch,
               std::string(flag) + ": bad entry '" + item + "'");
    }
  }
  if (out.empty())
    rd::fail(rd::ErrorCode::ShapeMismatch,
             std::string(flag) + ": empty list");
  return out;
}

/// Model bundles carry "W1".."WL" plus a "widths" 1 x (L+1) row vector.
rd::FcnModel load_model_bundle(const std::filesystem::path& path) {
  const rd::MatrixBundle bundle = rd::read_bundle(path);
  const rd::DenseMatrix* widths_m = bundle.find("widths");
  if (widths_m == nullptr)
    rd::fail(rd::ErrorCode::ShapeMismatch,
             "model bundle is missing entry 'widths'");
  if (widths_m->rows() != 1 || widths_m->cols() < 2)
    rd::fail(rd::ErrorCode::ShapeMismatch,
             "entry 'widths' must be a 1 x (L+1) row vector");

  std::vector<rd::index_t> widths;
  for (rd::index_t j = 0; j < widths_m->cols(); ++j) {
    const double v = (*widths_m)(0, j);
    if (!(v >= 1.0) || v != std::floor(v))
      rd::fail(rd::ErrorCode::ShapeMismatch,
               "entry 'widths' holds a non-integral or non-positive width");
    widths.push_back(rd::index_t(v));
  }

  rd::FcnModel model = rd::FcnModel::zeros(widths);
  for (rd::index_t l = 1; l < widths.size(); ++l) {
    const std::string name = "W" + std::to_string(l);
    const rd::DenseMatrix* w = bundle.find(name);
    if (w == nullptr)
      rd::fail(rd::ErrorCode::ShapeMismatch,
               "model bundle is missing entry '" + name + "'");
    if (w->rows() != widths[l] || w->cols() != widths[l - 1])
      rd::fail(rd::ErrorCode::ShapeMismatch,
               "entry '" + name + "' has shape " + std::to_string(w->rows()) +
                   " x " + std::to_string(w->cols()) +
                   ", widths demand " + std::to_string(widths[l]) + " x " +
                   std::to_string(widths[l - 1]));
    model.weights[l - 1] = *w;
  }
  model.validate();
  return model;
}

struct CommonFlags {
  std::string model_path;
  std::string idx_images;
  std::string idx_labels;
  std::string synthetic;
  std::optional<double> eps;
  rd::index_t eps_steps = 500;
  double beta = 1.0;
  double delta = 0.01;
  rd::index_t sketch_threshold = 8192;
  rd::index_t sketch_divisor = 8;
  bool no_log_terms = false;
  std::string format = "json";
  std::string out;
  std::uint64_t seed = 0;
};

rd::RdConfig make_config(const CommonFlags& flags) {
  rd::RdConfig cfg;
  cfg.beta = flags.beta;
  cfg.delta = flags.delta;
  cfg.eps = flags.eps;
  cfg.eps_search_steps = flags.eps_steps;
  cfg.include_log_terms = !flags.no_log_terms;
  return cfg;
}

rd::DenseMatrix load_inputs(const CommonFlags& flags, rd::index_t expect_d0) {
  const bool have_idx = !flags.idx_images.empty();
  const bool have_synth = !flags.synthetic.empty();
  if (have_idx == have_synth)
    rd::fail(rd::ErrorCode::ShapeMismatch,
             "exactly one data source required: --idx-images or --synthetic");
  rd::DenseMatrix x;
  if (have_idx) {
    x = rd::read_idx(flags.idx_images).as_columns_normalized();
    if (!flags.idx_labels.empty()) {
      const rd::IdxTensor labels = rd::read_idx(flags.idx_labels);
      if (labels.dims.empty() || labels.dims[0] != x.cols())
        rd::fail(rd::ErrorCode::ShapeMismatch,
                 "--idx-labels: label count does not match image count");
    }
  } else {
    const SynthSpec s = parse_synth(flags.synthetic);
    x = rd::synth_blobs(s.n, s.d0, s.classes, s.spread, flags.seed).inputs;
  }
  if (x.rows() != expect_d0)
    rd::fail(rd::ErrorCode::ShapeMismatch,
             "data dimension " + std::to_string(x.rows()) +
                 " does not match model input width " +
                 std::to_string(expect_d0));
  return x;
}

rd::ReportFormat parse_format(const std::string& format) {
  if (format == "json") return rd::ReportFormat::Json;
  if (format == "csv") return rd::ReportFormat::Csv;
  rd::fail(rd::ErrorCode::ShapeMismatch,
           "--format must be json or csv, got '" + format + "'");
}

// ---------------------------------------------------------------------------

int run_analyze(const CommonFlags& flags) {
  const rd::FcnModel model = load_model_bundle(flags.model_path);
  const rd::DenseMatrix x = load_inputs(flags, model.input_dim());
  rd::RdConfig cfg = make_config(flags);
  rd::Rng rng(flags.seed);
  const rd::RdReport report = rd::analyze(model, x, cfg, flags.sketch_threshold,
                                          flags.sketch_divisor, rng);
  const std::string out = flags.out.empty() ? "rd_report.json" : flags.out;
  rd::write_report(out, report, parse_format(flags.format));
  std::cout << "analyze: wrote " << out << " (d_R = " << report.d_r_total
            << " at eps = " << report.eps_star << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct DemoFlags {
  std::vector<rd::index_t> hidden = {64, 64, 64, 64};
  std::vector<rd::index_t> sweep;
  rd::index_t epochs = 40;
  std::string snapshots;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  rd::index_t batch_size = 128;
  std::string lr_decay_epochs;
  double lr_decay_factor = 0.1;
};

int run_train_demo_one(const CommonFlags& flags, const DemoFlags& demo,
                       const std::vector<rd::index_t>& hidden,
                       const std::string& out_stem) {
  const SynthSpec synth = flags.synthetic.empty()
                              ? SynthSpec{1000, 16, 2, 0.5}
                              : parse_synth(flags.synthetic);
  const rd::LabeledDataset data = rd::synth_blobs(
      synth.n, synth.d0, synth.classes, synth.spread, flags.seed);

  std::vector<rd::index_t> widths;
  widths.push_back(synth.d0);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(synth.classes);

  rd::TrainConfig tcfg;
  tcfg.lr = demo.lr;
  tcfg.momentum = demo.momentum;
  tcfg.weight_decay = demo.weight_decay;
  tcfg.epochs = demo.epochs;
  tcfg.batch_size = demo.batch_size;
  tcfg.lr_decay_factor = demo.lr_decay_factor;
  if (!demo.lr_decay_epochs.empty())
    tcfg.lr_decay_epochs =
        parse_index_list(demo.lr_decay_epochs, "--lr-decay-epochs");
  tcfg.seed = flags.seed + 1;

  std::vector<rd::index_t> snapshot_epochs;
  if (!demo.snapshots.empty()) {
    snapshot_epochs = parse_index_list(demo.snapshots, "--snapshots");
  } else {
    snapshot_epochs = {0, demo.epochs};
  }

  rd::Rng init_rng(flags.seed + 2);
  rd::FcnModel model = rd::init_fcn(widths, init_rng);
  auto [trained, snaps] = rd::train(std::move(model), data, tcfg, snapshot_epochs);

  rd::RdConfig cfg = make_config(flags);
  std::ostringstream series;
  series.precision(17);
  series << "epoch,train_error,d_r_total";
  for (rd::index_t l = 1; l < widths.size(); ++l) series << ",r_eff_l" << l;
  series << '\n';

  for (const rd::TrainSnapshot& snap : snaps) {
    rd::Rng rng(flags.seed + 3);  // fixed per snapshot: sketching stays comparable
    const rd::RdReport report =
        rd::analyze(snap.model, data.inputs, cfg, flags.sketch_threshold,
                    flags.sketch_divisor, rng);
    const std::string snap_path =
        out_stem + "_epoch" + std::to_string(snap.epoch) + ".json";
    rd::write_report(snap_path, report, rd::ReportFormat::Json);
    series << snap.epoch << ',' << snap.train_error << ',' << report.d_r_total;
    for (const rd::RdLayerRow& row : report.per_layer)
      series << ',' << row.r_eff;
    series << '\n';
  }

  const std::string series_path = out_stem + "_series.csv";
  std::ofstream os(series_path, std::ios::trunc);
  if (!os)
    rd::fail(rd::ErrorCode::IoFailure, "cannot write " + series_path);
  os << series.str();
  std::cout << "train-demo: wrote " << series_path << " ("
            << snaps.size() << " snapshots, final train error "
            << (snaps.empty() ? 0.0 : snaps.back().train_error) << ")\n";
  return kExitOk;
}

int run_train_demo(const CommonFlags& flags, const DemoFlags& demo) {
  const std::string stem = flags.out.empty() ? "rd_demo" : flags.out;
  if (demo.sweep.empty())
    return run_train_demo_one(flags, demo, demo.hidden, stem);
  for (rd::index_t w : demo.sweep) {
    const std::vector<rd::index_t> hidden(demo.hidden.size(), w);
    const int rc = run_train_demo_one(flags, demo, hidden,
                                      stem + "_w" + std::to_string(w));
    if (rc != kExitOk) return rc;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GeometryFlags {
  rd::index_t d = 4;
  rd::index_t r = 2;
  double eps = 0.9;
  rd::index_t samples = 100000;
};

int run_geometry_verify(const CommonFlags& flags, const GeometryFlags& geo) {
  if (geo.d > 8)
    rd::fail(rd::ErrorCode::DimensionMismatch,
             "geometry verify: d <= 8 keeps the Monte Carlo mass feasible");
  if (geo.r > geo.d)
    rd::fail(rd::ErrorCode::DimensionMismatch, "geometry verify: r > d");
  rd::Rng rng(flags.seed);
  bool all_pass = true;
  auto report = [&](const std::string& name, bool pass,
                    const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << "  " << name << "  " << detail
              << '\n';
    if (!pass) all_pass = false;
  };

  // Sine-tangent identity over random graph charts.
  if (geo.r < geo.d) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const rd::Subspace vbar = rd::sample_grassmannian(geo.d, geo.r, rng);
      rd::DenseMatrix x(geo.d - geo.r, geo.r);
      for (double& v : x.mutable_data()) v = rng.next_gaussian();
      const rd::SineTangent st = rd::sine_tangent_check(vbar, x);
      worst = std::max(worst, std::abs(st.rho - st.predicted));
    }
    std::ostringstream detail;
    detail << "max |rho - pred| = " << worst << " (tol 1e-8)";
    report("sine-tangent identity (100 charts)", worst <= 1e-8, detail.str());
  } else {
    std::cout << "SKIP  sine-tangent identity  (d == r, single subspace)\n";
  }

  // Monte Carlo ball mass against the covering right-hand side.
  auto mass_check = [&](const std::string& name, const rd::DenseMatrix& sigma,
                        const rd::Spectrum& sigma_spec) {
    const rd::Subspace center = rd::sample_grassmannian(geo.d, geo.r, rng);
    const rd::BallMass mass =
        rd::ball_mass_estimate(center, sigma, geo.eps, geo.samples, rng);
    const double rhs =
        rd::grassmannian_cover_rhs(geo.d, geo.r, sigma_spec, geo.eps);
    std::ostringstream detail;
    detail << "-log(mass) = " << mass.log_inv_mass << " vs rhs = " << rhs
           << " (" << mass.hits << " hits)";
    if (!mass.reliable) {
      std::cout << "WARN  " << name << "  unreliable estimate (" << mass.hits
                << " hits < 30); not counted\n";
      return;
    }
    report(name, mass.log_inv_mass <= rhs, detail.str());
  };
  mass_check("covering mass, isotropic sigma", rd::DenseMatrix::identity(geo.d),
             rd::sym_eig(rd::DenseMatrix::identity(geo.d)));
  {
    // Anisotropic spectrum 4, 1, 0.25, 0.01, decaying by 1/4 beyond.
    std::vector<double> diag = {4.0, 1.0, 0.25, 0.01};
    while (diag.size() < geo.d) diag.push_back(diag.back() * 0.25);
    diag.resize(geo.d);
    rd::DenseMatrix sigma(geo.d, geo.d);
    for (rd::index_t i = 0; i < geo.d; ++i) sigma(i, i) = diag[i];
    mass_check("covering mass, anisotropic sigma", sigma, rd::Spectrum(diag));
  }

  // Eigenvalue sandwich for the projected metric tensor.
  {
    int violations = 0;
    double worst_margin = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
      rd::DenseMatrix a(geo.d, geo.d);
      for (double& v : a.mutable_data()) v = rng.next_gaussian();
      const rd::DenseMatrix sigma = rd::gram(a);
      const rd::EigenDecomposition eig = rd::sym_eig_full(sigma);
      rd::DenseMatrix top(geo.d, geo.r);
      for (rd::index_t c = 0; c < geo.r; ++c)
        for (rd::index_t i = 0; i < geo.d; ++i) top(i, c) = eig.vectors(i, c);
      const rd::Subspace v(top);
      rd::Subspace vbar = v;
      if (geo.r < geo.d) {
        rd::DenseMatrix x(geo.d - geo.r, geo.r);
        for (double& b : x.mutable_data()) b = 0.2 * rng.next_gaussian();
        vbar = rd::graph_chart(v, x);
      }
      const double rho = rd::ellipsoidal_proj_metric(v, vbar, sigma);
      const rd::DenseMatrix projected =
          rd::multiply_tn(vbar.frame(), rd::multiply(sigma, vbar.frame()));
      const rd::Spectrum proj_spec = rd::sym_eig(projected);
      for (rd::index_t k = 0; k < geo.r; ++k) {
        const double lam = eig.values[k];
        const double plam = proj_spec.values()[k];
        const double slack = 1e-9 * std::max(lam, 1.0);
        if (plam > lam + slack || plam < lam / 2.0 - rho * rho - slack)
          ++violations;
        worst_margin = std::max(worst_margin, plam - lam);
      }
    }
    std::ostringstream detail;
    detail << violations << " violations over 200 instances";
    report("projected-metric eigenvalue sandwich", violations == 0,
           detail.str());
  }

  return all_pass ? kExitOk : kExitVerifyFailed;
}

// ---------------------------------------------------------------------------

struct IsoFlags {
  std::string data_s;
  std::string data_sprime;
  double eps = 0.1;
};

rd::DenseMatrix load_data_bundle(const std::filesystem::path& path) {
  const rd::MatrixBundle bundle = rd::read_bundle(path);
  const rd::DenseMatrix* x = bundle.find("X");
  if (x == nullptr)
    rd::fail(rd::ErrorCode::ShapeMismatch,
             "data bundle " + path.string() + " is missing entry 'X'");
  return *x;
}

int run_iso_check(const CommonFlags& flags, const IsoFlags& iso) {
  const rd::FcnModel model = load_model_bundle(flags.model_path);

  rd::DenseMatrix xs, xsp;
  if (!iso.data_s.empty() && !iso.data_sprime.empty()) {
    xs = load_data_bundle(iso.data_s);
    xsp = load_data_bundle(iso.data_sprime);
  } else if (!flags.synthetic.empty()) {
    // Disjoint halves of one synthetic draw serve as S and S'.
    const SynthSpec s = parse_synth(flags.synthetic);
    const rd::LabeledDataset data =
        rd::synth_blobs(s.n, s.d0, s.classes, s.spread, flags.seed);
    const rd::index_t half = s.n / 2;
    if (half == 0)
      rd::fail(rd::ErrorCode::ShapeMismatch, "--synthetic: need n >= 2");
    xs = rd::DenseMatrix(s.d0, half);
    xsp = rd::DenseMatrix(s.d0, half);
    for (rd::index_t j = 0; j < half; ++j)
      for (rd::index_t i = 0; i < s.d0; ++i) {
        xs(i, j) = data.inputs(i, j);
        xsp(i, j) = data.inputs(i, half + j);
      }
  } else {
    rd::fail(rd::ErrorCode::ShapeMismatch,
             "iso-check needs --data-s/--data-sprime or --synthetic");
  }

  if (xs.rows() != xsp.rows() || xs.cols() != xsp.cols())
    rd::fail(rd::ErrorCode::DimensionMismatch,
             "iso-check: the two samples must share d0 and n");

  const rd::LayerFeatureSet fs = rd::forward_with_hooks(model, xs);
  const rd::LayerFeatureSet fsp = rd::forward_with_hooks(model, xsp);
  const rd::LipschitzSurrogates lip = rd::lipschitz_surrogates(model);
  rd::RdConfig cfg = make_config(flags);
  cfg.n = xs.cols();
  const rd::IsoCertificate cert =
      rd::iso_check(fs, fsp, model, lip, cfg, iso.eps);

  nlohmann::json j;
  j["eps"] = iso.eps;
  j["layers"] = nlohmann::json::array();
  for (const rd::IsoLayer& layer : cert.per_layer)
    j["layers"].push_back({{"layer", layer.layer},
                           {"theta", layer.theta},
                           {"kappa_hat", layer.kappa_hat},
                           {"b_sub_hat", layer.b_sub_hat},
                           {"active_dim", layer.active_dim}});
  const std::string text = j.dump(2);
  if (flags.out.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream os(flags.out, std::ios::trunc);
    if (!os) rd::fail(rd::ErrorCode::IoFailure, "cannot write " + flags.out);
    os << text << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian-dimension toolkit for fully connected ReLU nets"};
  app.require_subcommand(1);

  CommonFlags flags;
  DemoFlags demo;
  GeometryFlags geo;
  IsoFlags iso;
  std::string sweep_text;
  std::string hidden_text;

  auto add_common = [&](CLI::App* cmd, bool with_data) {
    cmd->add_option("--eps", flags.eps, "fixed resolution (skips the search)");
    cmd->add_option("--eps-steps", flags.eps_steps, "ternary search steps");
    cmd->add_option("--beta", flags.beta, "loss Lipschitz constant");
    cmd->add_option("--delta", flags.delta, "confidence for the delta term");
    cmd->add_option("--sketch-threshold", flags.sketch_threshold,
                    "largest width eigensolved exactly");
    cmd->add_option("--sketch-divisor", flags.sketch_divisor,
                    "sketch dimension divisor");
    cmd->add_flag("--no-log-terms", flags.no_log_terms,
                  "drop the per-layer log(d n) terms");
    cmd->add_option("--format", flags.format, "json or csv");
    cmd->add_option("--out", flags.out, "output path");
    cmd->add_option("--seed", flags.seed, "RNG seed");
    if (with_data) {
      cmd->add_option("--idx-images", flags.idx_images, "IDX image file");
      cmd->add_option("--idx-labels", flags.idx_labels, "IDX label file");
      cmd->add_option("--synthetic", flags.synthetic,
                      "synthetic blobs: n,d0,classes,spread");
    }
  };

  CLI::App* analyze = app.add_subcommand("analyze", "compute the RD report");
  analyze->add_option("--model", flags.model_path, "RDMB model bundle")
      ->required();
  add_common(analyze, true);

  CLI::App* train_demo =
      app.add_subcommand("train-demo", "synthetic training demo");
  add_common(train_demo, true);
  train_demo->add_option("--hidden-widths", hidden_text,
                         "comma list of hidden widths (default 64,64,64,64)");
  train_demo->add_option("--sweep", sweep_text,
                         "run once per width, hidden layers all that wide");
  train_demo->add_option("--epochs", demo.epochs, "training epochs");
  train_demo->add_option("--snapshots", demo.snapshots,
                         "comma list of snapshot epochs (default 0,epochs)");
  train_demo->add_option("--lr", demo.lr, "learning rate");
  train_demo->add_option("--momentum", demo.momentum, "momentum");
  train_demo->add_option("--weight-decay", demo.weight_decay, "weight decay");
  train_demo->add_option("--batch-size", demo.batch_size, "batch size");
  train_demo->add_option("--lr-decay-epochs", demo.lr_decay_epochs,
                         "comma list of step-decay epochs");
  train_demo->add_option("--lr-decay-factor", demo.lr_decay_factor,
                         "step-decay factor");

  CLI::App* geometry =
      app.add_subcommand("geometry-verify", "verify the subspace geometry");
  geometry->add_option("--d", geo.d, "ambient dimension (<= 8)");
  geometry->add_option("--r", geo.r, "subspace dimension");
  geometry->add_option("--samples", geo.samples, "Monte Carlo samples");
  geometry->add_option("--eps", geo.eps, "ball radius");
  geometry->add_option("--seed", flags.seed, "RNG seed");

  CLI::App* isocmd =
      app.add_subcommand("iso-check", "subspace isomorphism certificate");
  isocmd->add_option("--model", flags.model_path, "RDMB model bundle")
      ->required();
  isocmd->add_option("--data-s", iso.data_s, "RDMB bundle with entry 'X'");
  isocmd->add_option("--data-sprime", iso.data_sprime,
                     "RDMB bundle with entry 'X'");
  isocmd->add_option("--synthetic", flags.synthetic,
                     "n,d0,classes,spread; halves become S and S'");
  isocmd->add_option("--eps", iso.eps, "resolution for the thresholds")
      ->required();
  isocmd->add_option("--out", flags.out, "output path (default stdout)");
  isocmd->add_option("--seed", flags.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*analyze) return run_analyze(flags);
    if (*train_demo) {
      if (!hidden_text.empty())
        demo.hidden = parse_index_list(hidden_text, "--hidden-widths");
      if (!sweep_text.empty())
        demo.sweep = parse_index_list(sweep_text, "--sweep");
      return run_train_demo(flags, demo);
    }
    if (*geometry) return run_geometry_verify(flags, geo);
    if (*isocmd) return run_iso_check(flags, iso);
  } catch (const rd::Error& e) {
    std::cerr << "error [" << rd::error_code_name(e.code()) << "]: "
              << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumericError;
  }
  return kExitOk;
}

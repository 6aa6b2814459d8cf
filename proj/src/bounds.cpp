#include "rd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rd {

namespace {

constexpr double kWeightNormFloor = 1e-300;

double floored_weight_norm(const FcnModel& model) {
  return std::max(frobenius_norm_all(model), kWeightNormFloor);
}

}  // namespace

RdFragment rd_dimension(const std::vector<Spectrum>& spectra,
                        const FcnModel& model, const LipschitzSurrogates& lip,
                        const RdConfig& cfg, double eps) {
  model.validate();
  const index_t depth = model.depth();
  if (spectra.size() != depth || lip.layer_count() != depth)
    fail(ErrorCode::MismatchedLayers,
         "rd_dimension: expected " + std::to_string(depth) +
             " spectra/surrogates");
  if (!(eps > 0.0))
    fail(ErrorCode::InvalidResolution, "rd_dimension: eps must be > 0");
  if (cfg.n < 1)
    fail(ErrorCode::InvalidResolution, "rd_dimension: n must be >= 1");

  const double r_w = floored_weight_norm(model);
  const double n_eps2 = double(cfg.n) * eps * eps;

  RdFragment frag;
  frag.eps = eps;
  frag.per_layer.reserve(depth);
  for (index_t l = 1; l <= depth; ++l) {
    const double m_bar = lip.for_layer(l);
    const double scale_a = double(depth) * m_bar * m_bar * r_w * r_w;
    const Spectrum& gram_spec = spectra[l - 1];
    EffDimResult eff = effective_dimension(
        ScaledSpectrum{gram_spec, scale_a, cfg.n, eps});

    RdLayerRow row;
    row.layer = l;
    row.d_in = model.widths[l - 1];
    row.d_out = model.widths[l];
    row.scale_a = scale_a;
    row.r_eff = eff.r_eff;
    row.d_eff = eff.d_eff;
    row.lambda_max = gram_spec.max();

    const double width_factor = double(row.d_in + row.d_out);
    double inner_sum = 0.0;
    for (index_t k = 0; k < eff.r_eff; ++k)
      inner_sum += std::log(8.0 * gram_spec.values()[k] / n_eps2);
    row.inner_term = width_factor * 0.5 * inner_sum;
    row.outer_term =
        width_factor * double(eff.r_eff) * 0.5 * std::log(scale_a);
    row.log_term = std::log(double(row.d_in) * double(cfg.n));
    row.contribution = width_factor * eff.d_eff +
                       (cfg.include_log_terms ? row.log_term : 0.0);

    frag.d_r_total += row.contribution;
    frag.d_r_total_log_free += width_factor * eff.d_eff;
    frag.per_layer.push_back(std::move(row));
  }
  return frag;
}

RdEvaluator make_rd_evaluator(const std::vector<Spectrum>& spectra,
                              const FcnModel& model,
                              const LipschitzSurrogates& lip,
                              const RdConfig& cfg) {
  return [&spectra, &model, &lip, cfg](double eps) {
    return rd_dimension(spectra, model, lip, cfg, eps).d_r_total;
  };
}

double one_shot_bound(const RdEvaluator& report_at, const RdConfig& cfg,
                      double eps) {
  if (!(eps > 0.0))
    fail(ErrorCode::InvalidResolution, "one_shot_bound: eps must be > 0");
  return cfg.beta * eps + std::sqrt(report_at(eps) / double(cfg.n));
}

double delta_term(const RdConfig& cfg) {
  return std::sqrt(std::log(std::log(2.0 * double(cfg.n)) / cfg.delta) /
                   double(cfg.n));
}

double integral_bound(const RdEvaluator& report_at, const RdConfig& cfg) {
  if (!(cfg.beta > 0.0))
    fail(ErrorCode::InvalidResolution, "integral_bound: beta must be > 0");
  const double lo = std::sqrt(1.0 / double(cfg.n));
  const double hi = std::max(1.0 / cfg.beta, lo);
  const index_t m = std::max<index_t>(cfg.alpha_grid, 2);

  std::vector<double> grid(m);
  const double ratio = hi / lo;
  for (index_t i = 0; i < m; ++i)
    grid[i] = lo * std::pow(ratio, double(i) / double(m - 1));
  grid.back() = hi;

  std::vector<double> droot(m);
  double prev = 0.0;
  for (index_t i = 0; i < m; ++i) {
    const double d = report_at(cfg.c_sub * grid[i]);
    // d_R is a nonincreasing step function of eps; a violation beyond
    // roundoff means the evaluator is broken.
    if (i > 0 && d > prev * (1.0 + 1e-9) + 1e-9)
      fail(ErrorCode::NumericError,
           "integral_bound: d_R increased along the eps grid");
    droot[i] = std::sqrt(std::max(d, 0.0));
    prev = d;
  }

  // Tail integrals int_{grid[i]}^{hi} sqrt(d_R) by trapezoid.
  std::vector<double> tail(m, 0.0);
  for (index_t i = m - 1; i-- > 0;)
    tail[i] = tail[i + 1] +
              0.5 * (droot[i] + droot[i + 1]) * (grid[i + 1] - grid[i]);

  double best = grid[0] + tail[0] / std::sqrt(double(cfg.n));
  for (index_t i = 1; i < m; ++i)
    best = std::min(best, grid[i] + tail[i] / std::sqrt(double(cfg.n)));
  return cfg.beta * best;
}

double ternary_search_min(const std::function<double(double)>& f, double lo,
                          double hi, index_t steps) {
  if (!(lo > 0.0) || hi < lo)
    fail(ErrorCode::InvalidResolution, "ternary_search_min: bad range");
  double a = std::log(lo);
  double b = std::log(hi);
  double best_x = lo;
  double best_f = f(lo);
  const double f_hi = f(hi);
  if (f_hi < best_f) {
    best_f = f_hi;
    best_x = hi;
  }
  for (index_t it = 0; it < steps && b - a > 1e-15; ++it) {
    const double m1 = a + (b - a) / 3.0;
    const double m2 = b - (b - a) / 3.0;
    const double f1 = f(std::exp(m1));
    const double f2 = f(std::exp(m2));
    if (f1 < best_f) {
      best_f = f1;
      best_x = std::exp(m1);
    }
    if (f2 < best_f) {
      best_f = f2;
      best_x = std::exp(m2);
    }
    if (f1 <= f2)
      b = m2;
    else
      a = m1;
  }
  return best_x;
}

double eps_search(const RdEvaluator& report_at, const FcnModel& model,
                  const std::vector<Spectrum>& spectra,
                  const LipschitzSurrogates& lip, const RdConfig& cfg) {
  const double lower = std::sqrt(1.0 / double(cfg.n));
  const double w_frob = frobenius_norm_all(model);
  double upper = 0.0;
  for (index_t l = 1; l <= model.depth(); ++l) {
    const double m_bar = lip.for_layer(l);
    const double top = spectra[l - 1].max();
    const double cand = std::sqrt(2.0 * double(model.depth()) * top * w_frob *
                                  w_frob * m_bar * m_bar / double(cfg.n));
    upper = std::max(upper, cand);
  }
  if (!(upper > lower)) return lower;

  auto objective = [&](double eps) {
    return one_shot_bound(report_at, cfg, eps);
  };
  double incumbent =
      ternary_search_min(objective, lower, upper, cfg.eps_search_steps);

  // d_R steps in eps, so ternary search can settle on the wrong plateau;
  // sweep a local grid around the incumbent plus the range endpoints.
  double best_x = incumbent;
  double best_f = objective(incumbent);
  auto consider = [&](double x) {
    x = std::clamp(x, lower, upper);
    const double v = objective(x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
  };
  const index_t refine = 32;
  const double span = 8.0;
  const double glo = std::max(lower, incumbent / span);
  const double ghi = std::min(upper, incumbent * span);
  for (index_t i = 0; i < refine; ++i)
    consider(glo * std::pow(ghi / glo, double(i) / double(refine - 1)));
  consider(lower);
  consider(upper);
  return best_x;
}

double vc_proxy(double p, index_t l_depth) {
  return p * double(l_depth) * std::log(p);
}

index_t param_count(const FcnModel& model) {
  index_t total = 0;
  for (index_t l = 1; l < model.widths.size(); ++l)
    total += model.widths[l] * model.widths[l - 1];
  return total;
}

namespace {

std::vector<double> layer_operator_norms(const FcnModel& model) {
  std::vector<double> ops;
  ops.reserve(model.depth());
  for (const DenseMatrix& w : model.weights)
    ops.push_back(spectral_norm(w, 2000, 1e-8));
  return ops;
}

double product_excluding(const std::vector<double>& xs, index_t skip) {
  double p = 1.0;
  for (index_t i = 0; i < xs.size(); ++i)
    if (i != skip) p *= xs[i];
  return p;
}

double norm_21(const DenseMatrix& w) {
  double s = 0.0;
  for (index_t j = 0; j < w.cols(); ++j) s += w.col_norm(j);
  return s;
}

}  // namespace

double spectral_bound(const FcnModel& model, double b_x, const RdConfig& cfg) {
  model.validate();
  const std::vector<double> ops = layer_operator_norms(model);
  double sum = 0.0;
  for (index_t l = 0; l < model.depth(); ++l) {
    const double prod = product_excluding(ops, l);
    sum += double(model.widths[l + 1] + model.widths[l]) * prod * prod;
  }
  return cfg.beta * b_x * frobenius_norm_all(model) /
         std::sqrt(double(cfg.n)) *
         std::sqrt(double(model.depth()) * sum);
}

double bartlett_bound(const FcnModel& model, double x_frob,
                      const RdConfig& cfg) {
  model.validate();
  const std::vector<double> ops = layer_operator_norms(model);
  double s21 = 0.0;
  double sop = 0.0;
  for (index_t l = 0; l < model.depth(); ++l) {
    s21 += std::pow(norm_21(model.weights[l]), 2.0 / 3.0);
    sop += std::pow(product_excluding(ops, l), 2.0 / 3.0);
  }
  return cfg.beta * x_frob / double(cfg.n) * std::pow(s21 * sop, 1.5);
}

RdReport analyze(const FcnModel& model, const DenseMatrix& x,
                 const RdConfig& cfg_in, index_t sketch_threshold,
                 index_t sketch_divisor, Rng& rng) {
  RdConfig cfg = cfg_in;
  cfg.n = x.cols();
  if (cfg.n == 0)
    fail(ErrorCode::ShapeMismatch, "analyze: empty data matrix");

  const LayerFeatureSet feats = forward_with_hooks(model, x);
  const std::vector<Spectrum> spectra =
      layer_gram_spectra(feats, sketch_threshold, sketch_divisor, rng);
  const LipschitzSurrogates lip = lipschitz_surrogates(model);
  const RdEvaluator evaluator = make_rd_evaluator(spectra, model, lip, cfg);

  const double eps_star =
      cfg.eps ? *cfg.eps : eps_search(evaluator, model, spectra, lip, cfg);
  RdFragment frag = rd_dimension(spectra, model, lip, cfg, eps_star);

  RdReport report;
  report.eps_star = eps_star;
  report.d_r_total = frag.d_r_total;
  report.d_r_total_log_free = frag.d_r_total_log_free;
  report.per_layer = std::move(frag.per_layer);
  report.one_shot_bound = one_shot_bound(evaluator, cfg, eps_star);
  report.integral_bound = integral_bound(evaluator, cfg);
  report.delta_term = delta_term(cfg);
  report.baselines.param_count = param_count(model);
  report.baselines.vc_proxy =
      vc_proxy(double(report.baselines.param_count), model.depth());
  report.baselines.spectral_bound =
      spectral_bound(model, x.max_col_norm(), cfg);
  report.baselines.bartlett_bound =
      bartlett_bound(model, x.frobenius_norm(), cfg);
  report.frobenius_norm = frobenius_norm_all(model);

  for (const RdLayerRow& row : report.per_layer)
    if (!std::isfinite(row.contribution))
      fail(ErrorCode::NumericError, "analyze: non-finite layer contribution");
  return report;
}

}  // namespace rd

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rd/network.hpp"
#include "rd/spectra.hpp"

namespace rd {

struct RdConfig {
  double beta = 1.0;  // loss Lipschitz constant
  index_t n = 0;      // sample count
  std::optional<double> eps;  // fixed resolution; empty means search
  index_t eps_search_steps = 500;
  index_t alpha_grid = 64;  // grid size for the integral bound
  bool include_log_terms = true;
  double delta = 0.01;  // confidence for the separately reported delta term
  double c_sub = 1.0;   // subspace-isomorphism scale constant
};

struct RdLayerRow {
  index_t layer = 0;  // 1-based
  index_t d_in = 0;   // d_{l-1}
  index_t d_out = 0;  // d_l
  double scale_a = 0.0;
  index_t r_eff = 0;
  double d_eff = 0.0;       // combined effective dimension of the scaled Gram
  double inner_term = 0.0;  // (d_l+d_{l-1}) * 1/2 sum log(8 lambda_k /(n eps^2))
  double outer_term = 0.0;  // (d_l+d_{l-1}) * r_eff * 1/2 log(scale_a)
  double log_term = 0.0;    // log(d_{l-1} n)
  double lambda_max = 0.0;  // top eigenvalue of Gamma_{l-1}
  double contribution = 0.0;
};

struct RdFragment {
  double eps = 0.0;
  std::vector<RdLayerRow> per_layer;
  double d_r_total = 0.0;           // per include_log_terms
  double d_r_total_log_free = 0.0;  // without the log(d_{l-1} n) terms
};

struct RdBaselines {
  index_t param_count = 0;
  double vc_proxy = 0.0;
  double spectral_bound = 0.0;
  double bartlett_bound = 0.0;
};

struct RdReport {
  double eps_star = 0.0;
  double d_r_total = 0.0;
  double d_r_total_log_free = 0.0;
  std::vector<RdLayerRow> per_layer;
  double one_shot_bound = 0.0;
  double integral_bound = 0.0;
  double delta_term = 0.0;  // sqrt(log(log(2n)/delta)/n), reported separately
  RdBaselines baselines;
  double frobenius_norm = 0.0;
};

/// Observed-sample Riemannian Dimension at a fixed resolution. spectra[l-1]
/// holds the spectrum of Gamma_{l-1} = F_{l-1} F_{l-1}^T. Per layer,
/// scale_a = L * m_bar(l)^2 * ||W||_F^2 (radius folded, floor 1e-300), the
/// contribution is (d_l + d_{l-1}) * d_eff plus log(d_{l-1} n) when log terms
/// are on, and the inner/outer split of the same quantity is reported.
RdFragment rd_dimension(const std::vector<Spectrum>& spectra,
                        const FcnModel& model, const LipschitzSurrogates& lip,
                        const RdConfig& cfg, double eps);

/// eps -> d_R(eps). Holds references to the caller's spectra, model and
/// surrogates, which must outlive the evaluator.
using RdEvaluator = std::function<double(double)>;

RdEvaluator make_rd_evaluator(const std::vector<Spectrum>& spectra,
                              const FcnModel& model,
                              const LipschitzSurrogates& lip,
                              const RdConfig& cfg);

/// beta * eps + sqrt(d_R(eps) / n). Absolute constants set to 1; the
/// delta-confidence term is reported separately.
double one_shot_bound(const RdEvaluator& report_at, const RdConfig& cfg,
                      double eps);

double delta_term(const RdConfig& cfg);

/// beta * min_alpha { alpha + (1/sqrt(n)) int_alpha^{1/beta} sqrt(d_R(c_sub
/// eps)) d eps } with the integral on a geometric grid of alpha_grid points
/// over [sqrt(1/n), 1/beta], trapezoid rule, alpha restricted to grid points.
double integral_bound(const RdEvaluator& report_at, const RdConfig& cfg);

/// Ternary search in log space over [lo, hi] minimizing f; returns the best
/// probed point. Exposed separately so the kernel can be unit tested.
double ternary_search_min(const std::function<double(double)>& f, double lo,
                          double hi, index_t steps);

/// Resolution minimizing the one-shot bound over the finite-resolution range
/// [sqrt(1/n), max_l sqrt(2 L lambda_max(Gamma_{l-1}) ||W||_F^2 m_bar(l)^2
/// / n)]. The rank thresholds make d_R a step function of eps, so the ternary
/// pass is followed by a 32-point local grid refinement around the incumbent.
/// A degenerate range returns the lower endpoint.
double eps_search(const RdEvaluator& report_at, const FcnModel& model,
                  const std::vector<Spectrum>& spectra,
                  const LipschitzSurrogates& lip, const RdConfig& cfg);

/// P * L * ln(P) parameter-count capacity proxy.
double vc_proxy(double p, index_t l_depth);

index_t param_count(const FcnModel& model);

/// (beta * B_x * ||W||_F / sqrt(n)) * sqrt(L * sum_l (d_l + d_{l-1}) *
/// prod_{i != l} ||W_i||_op^2), constants and log factors set to 1.
/// b_x is the largest input column norm.
double spectral_bound(const FcnModel& model, double b_x, const RdConfig& cfg);

/// (beta * ||X||_F / n) * (sum_l ||W_l||_{2,1}^{2/3} * sum_l (prod_{i != l}
/// ||W_i||_op)^{2/3})^{3/2} with ||.||_{2,1} the sum of column norms.
double bartlett_bound(const FcnModel& model, double x_frob,
                      const RdConfig& cfg);

/// Full pipeline: forward, per-layer spectra under the sketch rule, eps
/// search (unless cfg.eps is set), dimension, bounds and baselines.
RdReport analyze(const FcnModel& model, const DenseMatrix& x,
                 const RdConfig& cfg, index_t sketch_threshold,
                 index_t sketch_divisor, Rng& rng);

}  // namespace rd

#pragma once

#include "rd/linalg.hpp"

namespace rd {

/// Eigenvalue list of a feature Gram together with the layerwise multiplier
/// `scale_a` (e.g. L * Mbar^2 * R_W^2; the ball radius is folded in), the
/// sample count n and the resolution eps at which dimension is measured.
struct ScaledSpectrum {
  Spectrum base;
  double scale_a = 1.0;
  index_t n = 1;
  double eps = 1.0;
};

struct EffDimResult {
  index_t r_eff = 0;
  double d_eff = 0.0;
  std::vector<double> per_term;  // log(8 a lambda_k / (n eps^2)), k < r_eff
};

/// max { k : scale_a * lambda_k >= n eps^2 / 2 }, exact ties counted in;
/// 0 when no eigenvalue qualifies.
index_t effective_rank(const ScaledSpectrum& s);

/// d_eff = 1/2 * sum_{k <= r_eff} log(8 a lambda_k / (n eps^2)).
EffDimResult effective_dimension(const ScaledSpectrum& s);

/// Closed form for an exact exponential spectrum lambda_k = lambda0 *
/// exp(-gamma (k-1)): d_eff = (r/2) log(8 a lambda0 R^2 / (n eps^2))
/// - (gamma/4) r (r-1), with r the closed-form effective rank. Test oracle.
double exp_decay_deff_closed_form(double lambda0, double gamma, double a,
                                  double radius, index_t n, double eps);

/// Bound (q/2) log(e + 8 a R^2 lambda0 / (n eps^2)), valid for any spectrum
/// of rank <= q with top eigenvalue <= lambda0. Test oracle.
double low_rank_deff_upper(index_t q, double lambda0, double a, double radius,
                           index_t n, double eps);

}  // namespace rd

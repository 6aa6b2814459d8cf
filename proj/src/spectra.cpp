#include "rd/spectra.hpp"

#include <cmath>
#include <string>

namespace rd {

namespace {

void check_resolution(const ScaledSpectrum& s) {
  if (!(s.eps > 0.0))
    fail(ErrorCode::InvalidResolution, "effective rank: eps must be > 0");
  if (s.n < 1)
    fail(ErrorCode::InvalidResolution, "effective rank: n must be >= 1");
  if (s.scale_a < 0.0)
    fail(ErrorCode::InvalidResolution, "effective rank: scale_a must be >= 0");
}

// Neumaier-compensated sum; the closed-form oracle comparisons run at 1e-12
// absolute, so plain accumulation is too sloppy at r ~ 50 terms.
double compensated_sum(const std::vector<double>& xs) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

index_t effective_rank(const ScaledSpectrum& s) {
  check_resolution(s);
  const double threshold = double(s.n) * s.eps * s.eps / 2.0;
  index_t r = 0;
  for (double lambda : s.base.values()) {
    if (s.scale_a * lambda >= threshold)
      ++r;
    else
      break;  // nonincreasing, nothing later qualifies
  }
  return r;
}

EffDimResult effective_dimension(const ScaledSpectrum& s) {
  EffDimResult out;
  out.r_eff = effective_rank(s);
  out.per_term.reserve(out.r_eff);
  const double n_eps2 = double(s.n) * s.eps * s.eps;
  for (index_t k = 0; k < out.r_eff; ++k)
    out.per_term.push_back(
        std::log(8.0 * s.scale_a * s.base.values()[k] / n_eps2));
  out.d_eff = 0.5 * compensated_sum(out.per_term);
  return out;
}

double exp_decay_deff_closed_form(double lambda0, double gamma, double a,
                                  double radius, index_t n, double eps) {
  const double threshold = double(n) * eps * eps / 2.0;
  const double r2 = radius * radius;
  // Effective rank of the exact decay by direct threshold walk; matches the
  // tie rule of effective_rank bit for bit.
  index_t r = 0;
  const index_t cap = 100000000;
  while (r < cap && a * lambda0 * std::exp(-gamma * double(r)) * r2 >= threshold)
    ++r;
  if (r == 0) return 0.0;
  const double lead = std::log(8.0 * a * lambda0 * r2 / (double(n) * eps * eps));
  return 0.5 * double(r) * lead - 0.25 * gamma * double(r) * double(r - 1);
}

double low_rank_deff_upper(index_t q, double lambda0, double a, double radius,
                           index_t n, double eps) {
  if (q == 0) return 0.0;
  const double x =
      8.0 * a * radius * radius * lambda0 / (double(n) * eps * eps);
  return 0.5 * double(q) * std::log(std::exp(1.0) + x);
}

}  // namespace rd

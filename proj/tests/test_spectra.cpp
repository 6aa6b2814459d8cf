#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rd/spectra.hpp"
#include "support.hpp"

using rd::index_t;
using rd::ScaledSpectrum;
using rd::Spectrum;

namespace {

// Resolution placing the rank threshold halfway (log scale) between
// lambda_r and lambda_{r+1} of an exact exponential-decay spectrum.
double eps_for_rank(double lambda0, double gamma, double a, double radius,
                    index_t n, index_t r) {
  const double mid = lambda0 * std::exp(-gamma * (double(r) - 0.5));
  return std::sqrt(2.0 * a * mid * radius * radius / double(n));
}

Spectrum exp_spectrum(double lambda0, double gamma, index_t len) {
  std::vector<double> v(len);
  for (index_t k = 0; k < len; ++k)
    v[k] = lambda0 * std::exp(-gamma * double(k));
  return Spectrum(v);
}

}  // namespace

TEST_CASE("effective_rank thresholding") {
  const ScaledSpectrum s{Spectrum({4.0, 1.0, 0.25}), 1.0, 2, 1.0};
  CHECK(rd::effective_rank(s) == 2);  // threshold 1; the tie at 1.0 counts

  CHECK(rd::effective_rank({Spectrum({0.0, 0.0}), 1.0, 2, 1.0}) == 0);
  CHECK(rd::effective_rank({Spectrum({4.0, 1.0}), 1.0, 2, 1e9}) == 0);
  CHECK(rd::effective_rank({Spectrum({4.0, 1.0}), 0.0, 2, 1.0}) == 0);

  CHECK_THROWS_AS(rd::effective_rank({Spectrum({1.0}), 1.0, 2, 0.0}),
                  rd::Error);
  CHECK_THROWS_AS(rd::effective_rank({Spectrum({1.0}), 1.0, 2, -1.0}),
                  rd::Error);
}

TEST_CASE("effective_dimension hand values and invariants") {
  const rd::EffDimResult r =
      rd::effective_dimension({Spectrum({4.0, 1.0}), 1.0, 2, 1.0});
  CHECK(r.r_eff == 2);
  CHECK(r.d_eff ==
        doctest::Approx(0.5 * (std::log(16.0) + std::log(4.0))).epsilon(1e-14));

  // Empty sum when nothing clears the threshold.
  const rd::EffDimResult zero =
      rd::effective_dimension({Spectrum({0.5}), 1.0, 100, 1.0});
  CHECK(zero.r_eff == 0);
  CHECK(zero.d_eff == 0.0);
  CHECK(zero.per_term.empty());

  // Counted eigenvalues satisfy 8 a lambda / (n eps^2) >= 4.
  rd::Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> vals(12);
    double prev = std::exp(3.0 * rng.next_uniform());
    for (double& v : vals) {
      prev *= rng.next_uniform();
      v = prev;
    }
    const ScaledSpectrum s{Spectrum(vals), std::exp(rng.next_gaussian()),
                           index_t(1 + (rng.next_u64() % 50)),
                           std::exp(rng.next_gaussian())};
    const rd::EffDimResult res = rd::effective_dimension(s);
    double sum = 0.0;
    for (double t : res.per_term) {
      CHECK(t >= std::log(4.0) - 1e-12);
      sum += t;
    }
    CHECK(res.d_eff == doctest::Approx(0.5 * sum).epsilon(1e-12));
  }
}

TEST_CASE("effective_dimension matches the exponential closed form") {
  // gamma = 1, unit scale; rank forced to r by the midpoint resolution.
  for (index_t r = 1; r <= 40; ++r) {
    const double eps = eps_for_rank(1.0, 1.0, 1.0, 1.0, 1, r);
    const rd::EffDimResult got =
        rd::effective_dimension({exp_spectrum(1.0, 1.0, 60), 1.0, 1, eps});
    CHECK(got.r_eff == r);
    const double want = 0.5 * double(r) * std::log(8.0 / (eps * eps)) -
                        0.25 * double(r) * double(r - 1);
    CHECK(std::abs(got.d_eff - want) <= 1e-12);
    CHECK(std::abs(rd::exp_decay_deff_closed_form(1.0, 1.0, 1.0, 1.0, 1, eps) -
                   got.d_eff) <= 1e-12);
  }

  // Grid over decay rates and scales.
  for (double gamma : {0.2, 0.5, 1.0, 2.0, 3.0}) {
    for (index_t r : {index_t(1), index_t(3), index_t(10), index_t(25)}) {
      const double lambda0 = 7.5;
      const double a = 3.0;
      const index_t n = 64;
      const double eps = eps_for_rank(lambda0, gamma, a, 1.0, n, r);
      const rd::EffDimResult got = rd::effective_dimension(
          {exp_spectrum(lambda0, gamma, r + 20), a, n, eps});
      CHECK(got.r_eff == r);
      const double want =
          rd::exp_decay_deff_closed_form(lambda0, gamma, a, 1.0, n, eps);
      CHECK(std::abs(got.d_eff - want) <= 1e-12);
    }
  }
}

TEST_CASE("exp_decay_deff_closed_form boundary cases") {
  // 8 a lambda0 R^2 / (n eps^2) = 4 exactly: the tie counts, k = 2 does not.
  const double v = rd::exp_decay_deff_closed_form(1.0, 1.0, 1.0, 1.0, 2, 1.0);
  CHECK(v == doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-14));

  // Top eigenvalue below threshold.
  CHECK(rd::exp_decay_deff_closed_form(1e-6, 1.0, 1.0, 1.0, 10, 1.0) == 0.0);
}

TEST_CASE("low_rank_deff_upper values") {
  CHECK(rd::low_rank_deff_upper(0, 5.0, 1.0, 1.0, 1, 1.0) == 0.0);

  // Arrange 8 a R^2 lambda0 / (n eps^2) = e(e-1) so the bound is exactly 1.
  const double e = std::exp(1.0);
  const double lambda0 = e * (e - 1.0) / 8.0;
  CHECK(rd::low_rank_deff_upper(1, lambda0, 1.0, 1.0, 1, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-14));

  // Rank-3 instance dominated by the bound.
  const rd::EffDimResult got = rd::effective_dimension(
      {Spectrum({2.0, 1.0, 0.5, 0.0, 0.0}), 1.0, 1, 1.0});
  CHECK(got.d_eff <= rd::low_rank_deff_upper(3, 2.0, 1.0, 1.0, 1, 1.0));
}

TEST_CASE("low-rank bound holds over random spectra") {
  rd::Rng rng(99);
  for (int rep = 0; rep < 1000; ++rep) {
    const index_t q = 1 + index_t(rng.next_u64() % 16);
    std::vector<double> vals(q + 4, 0.0);
    double prev = std::exp(2.0 * rng.next_gaussian());
    for (index_t k = 0; k < q; ++k) {
      vals[k] = prev;
      prev *= rng.next_uniform();
    }
    const double lambda0 = vals[0];
    const double a = std::exp(rng.next_gaussian());
    const index_t n = 1 + index_t(rng.next_u64() % 100);
    const double eps = std::exp(rng.next_gaussian());
    const rd::EffDimResult got =
        rd::effective_dimension({Spectrum(vals), a, n, eps});
    const double bound = rd::low_rank_deff_upper(q, lambda0, a, 1.0, n, eps);
    CHECK(got.d_eff <= bound * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("monotonicity in eps and scale") {
  rd::Rng rng(5);
  std::vector<double> vals(20);
  double prev = 50.0;
  for (double& v : vals) {
    v = prev;
    prev *= 0.5 + 0.4 * rng.next_uniform();
  }
  const Spectrum spec(vals);

  double last_d = 1e300;
  index_t last_r = 1000;
  for (double eps = 0.05; eps < 40.0; eps *= 1.37) {
    const rd::EffDimResult res = rd::effective_dimension({spec, 2.0, 8, eps});
    CHECK(res.r_eff <= last_r);
    CHECK(res.d_eff <= last_d + 1e-12);
    last_r = res.r_eff;
    last_d = res.d_eff;
  }

  double prev_d = -1.0;
  for (double a = 0.1; a < 100.0; a *= 2.1) {
    const rd::EffDimResult res = rd::effective_dimension({spec, a, 8, 1.0});
    CHECK(res.d_eff >= prev_d - 1e-12);
    prev_d = res.d_eff;
  }
}

TEST_CASE("scale enters a strict-rank-q spectrum only logarithmically") {
  // The Example-1 regime: all q nonzero eigenvalues already clear the
  // threshold at unit scale, so rescaling cannot recruit new directions and
  // d_eff moves by exactly (q/2) log a.
  rd::Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const index_t q = 1 + index_t(rng.next_u64() % 6);
    std::vector<double> vals(q + 3, 0.0);
    double prev = std::exp(rng.next_gaussian());
    for (index_t k = 0; k < q; ++k) {
      vals[k] = prev;
      prev *= 0.2 + 0.7 * rng.next_uniform();
    }
    const Spectrum spec(vals);
    const index_t n = 4;
    const double eps = std::sqrt(vals[q - 1] / double(n));  // threshold lambda_q/2
    const rd::EffDimResult base = rd::effective_dimension({spec, 1.0, n, eps});
    CHECK(base.r_eff == q);
    for (double a : {1.0, 2.0, 10.0, 1e4}) {
      const double scaled = rd::effective_dimension({spec, a, n, eps}).d_eff;
      CHECK(scaled - base.d_eff <= 0.5 * double(q) * std::log(a) + 1e-9);
    }
  }
}

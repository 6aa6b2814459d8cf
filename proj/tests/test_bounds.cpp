#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rd/bounds.hpp"
#include "rd/io.hpp"
#include "support.hpp"

using rd::DenseMatrix;
using rd::FcnModel;
using rd::index_t;
using rd::RdConfig;
using rd::Spectrum;

namespace {

FcnModel random_model(const std::vector<index_t>& widths, rd::Rng& rng,
                      double scale) {
  FcnModel m = FcnModel::zeros(widths);
  for (DenseMatrix& w : m.weights)
    for (double& v : w.mutable_data()) v = scale * rng.next_gaussian();
  return m;
}

struct Pipeline {
  FcnModel model;
  std::vector<Spectrum> spectra;
  rd::LipschitzSurrogates lip;
};

Pipeline random_pipeline(rd::Rng& rng, index_t n, double scale = 0.6) {
  const std::vector<index_t> widths = {4 + rng.next_u64() % 3,
                                       5 + rng.next_u64() % 4,
                                       4 + rng.next_u64() % 4,
                                       2 + rng.next_u64() % 3};
  Pipeline p{random_model(widths, rng, scale), {}, {}};
  const DenseMatrix x = rdtest::random_matrix(widths[0], n, rng);
  const rd::LayerFeatureSet feats = rd::forward_with_hooks(p.model, x);
  p.spectra = rd::layer_gram_spectra(feats, 8192, 8, rng);
  p.lip = rd::lipschitz_surrogates(p.model);
  return p;
}

}  // namespace

TEST_CASE("rd_dimension single-layer hand value") {
  FcnModel m = FcnModel::zeros({1, 1});
  m.weights[0] = DenseMatrix(1, 1, {2.0});
  const DenseMatrix x(1, 2, {1.0, 1.0});
  const rd::LayerFeatureSet feats = rd::forward_with_hooks(m, x);
  rd::Rng rng(0);
  const auto spectra = rd::layer_gram_spectra(feats, 8192, 8, rng);
  REQUIRE(spectra[0].values()[0] == doctest::Approx(2.0));
  const rd::LipschitzSurrogates lip = rd::lipschitz_surrogates(m);

  RdConfig cfg;
  cfg.n = 2;
  cfg.include_log_terms = false;
  const rd::RdFragment frag = rd_dimension(spectra, m, lip, cfg, 1.0);
  REQUIRE(frag.per_layer.size() == 1);
  const rd::RdLayerRow& row = frag.per_layer[0];
  CHECK(row.scale_a == doctest::Approx(4.0));
  CHECK(row.r_eff == 1);
  CHECK(row.d_eff == doctest::Approx(0.5 * std::log(32.0)).epsilon(1e-14));
  CHECK(frag.d_r_total == doctest::Approx(std::log(32.0)).epsilon(1e-14));
}

TEST_CASE("rd_dimension degenerate regimes") {
  rd::Rng rng(2);
  Pipeline p = random_pipeline(rng, 12);
  RdConfig cfg;
  cfg.n = 12;

  // eps so large that no eigenvalue clears the threshold.
  const rd::RdFragment big = rd_dimension(p.spectra, p.model, p.lip, cfg, 1e9);
  double want = 0.0;
  for (const rd::RdLayerRow& row : big.per_layer) {
    CHECK(row.r_eff == 0);
    want += std::log(double(row.d_in) * 12.0);
  }
  CHECK(big.d_r_total == doctest::Approx(want).epsilon(1e-12));
  CHECK(big.d_r_total_log_free == 0.0);

  RdConfig no_logs = cfg;
  no_logs.include_log_terms = false;
  CHECK(rd_dimension(p.spectra, p.model, p.lip, no_logs, 1e9).d_r_total == 0.0);

  // All-zero weights: the weight-norm floor keeps everything finite.
  FcnModel zero = FcnModel::zeros({3, 4, 2});
  const DenseMatrix x = rdtest::random_matrix(3, 12, rng);
  const rd::LayerFeatureSet feats = rd::forward_with_hooks(zero, x);
  const auto spectra = rd::layer_gram_spectra(feats, 8192, 8, rng);
  const rd::LipschitzSurrogates lip = rd::lipschitz_surrogates(zero);
  const rd::RdFragment frag = rd_dimension(spectra, zero, lip, cfg, 1.0);
  for (const rd::RdLayerRow& row : frag.per_layer) CHECK(row.r_eff == 0);

  CHECK_THROWS_AS(rd_dimension(p.spectra, p.model, p.lip, cfg, 0.0), rd::Error);
}

TEST_CASE("inner/outer split reconstructs the combined term") {
  rd::Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    Pipeline p = random_pipeline(rng, 10);
    RdConfig cfg;
    cfg.n = 10;
    for (double eps : {0.05, 0.3, 1.0}) {
      const rd::RdFragment frag =
          rd_dimension(p.spectra, p.model, p.lip, cfg, eps);
      for (const rd::RdLayerRow& row : frag.per_layer) {
        const double combined = double(row.d_in + row.d_out) * row.d_eff;
        const double split = row.inner_term + row.outer_term;
        CHECK(std::abs(split - combined) <=
              1e-9 * std::max({std::abs(combined), std::abs(split), 1.0}));
      }
    }
  }
}

TEST_CASE("rank-free relaxation dominates the log sum") {
  rd::Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    Pipeline p = random_pipeline(rng, 9);
    RdConfig cfg;
    cfg.n = 9;
    for (double eps : {0.1, 0.5, 2.0}) {
      const rd::RdFragment frag =
          rd_dimension(p.spectra, p.model, p.lip, cfg, eps);
      for (index_t l = 1; l <= p.model.depth(); ++l) {
        const rd::RdLayerRow& row = frag.per_layer[l - 1];
        const double n_eps2 = 9.0 * eps * eps;
        double log_sum = 0.0;
        for (index_t k = 0; k < row.r_eff; ++k)
          log_sum += std::log(8.0 * row.scale_a *
                              p.spectra[l - 1].values()[k] / n_eps2);
        const double trace = p.spectra[l - 1].sum();  // = ||F_{l-1}||_F^2
        CHECK(log_sum <= 8.0 * row.scale_a * trace / n_eps2 + 1e-9);
      }
    }
  }
}

TEST_CASE("d_R is nonincreasing in eps") {
  rd::Rng rng(12);
  Pipeline p = random_pipeline(rng, 14);
  RdConfig cfg;
  cfg.n = 14;
  const rd::RdEvaluator eval =
      rd::make_rd_evaluator(p.spectra, p.model, p.lip, cfg);
  double prev = 1e300;
  for (int i = 0; i < 128; ++i) {
    const double eps = 1e-3 * std::pow(1e6, double(i) / 127.0);
    const double d = eval(eps);
    CHECK(d <= prev * (1.0 + 1e-12) + 1e-12);
    prev = d;
  }
}

TEST_CASE("one_shot_bound arithmetic") {
  RdConfig cfg;
  cfg.beta = 1.0;
  cfg.n = 100;
  const rd::RdEvaluator zero = [](double) { return 0.0; };
  CHECK(rd::one_shot_bound(zero, cfg, 0.25) == doctest::Approx(0.25));

  const rd::RdEvaluator four = [](double) { return 4.0; };
  CHECK(rd::one_shot_bound(four, cfg, 0.5) ==
        doctest::Approx(0.5 + 0.2).epsilon(1e-14));

  CHECK_THROWS_AS(rd::one_shot_bound(zero, cfg, 0.0), rd::Error);

  rd::Rng rng(3);
  Pipeline p = random_pipeline(rng, 25);
  cfg.n = 25;
  const rd::RdEvaluator eval =
      rd::make_rd_evaluator(p.spectra, p.model, p.lip, cfg);
  for (double eps = 0.2; eps <= 5.0; eps *= 1.7)
    CHECK(std::isfinite(rd::one_shot_bound(eval, cfg, eps)));
}

TEST_CASE("integral_bound closed forms") {
  RdConfig cfg;
  cfg.beta = 1.0;
  cfg.n = 100;
  cfg.alpha_grid = 256;
  const rd::RdEvaluator zero = [](double) { return 0.0; };
  CHECK(rd::integral_bound(zero, cfg) == doctest::Approx(0.1));  // beta*eps_min

  // Constant d_R: optimum sits at an endpoint of the alpha range.
  for (double c : {0.25, 4.0, 900.0}) {
    const rd::RdEvaluator constant = [c](double) { return c; };
    const double got = rd::integral_bound(constant, cfg);
    const double lo = std::sqrt(1.0 / 100.0);
    const double root = std::sqrt(c / 100.0);
    const double want =
        std::min(lo + root * (1.0 - lo), 1.0);  // alpha = lo or alpha = 1/beta
    CHECK(got == doctest::Approx(want).epsilon(1e-2));
  }

  // Increasing d_R along the grid is a broken evaluator.
  const rd::RdEvaluator rising = [](double eps) { return eps; };
  CHECK_THROWS_AS(rd::integral_bound(rising, cfg), rd::Error);
}

TEST_CASE("integral bound is no looser than the searched one-shot bound") {
  rd::Rng rng(40);
  int checked = 0;
  for (int rep = 0; rep < 20; ++rep) {
    Pipeline p = random_pipeline(rng, 36, 0.35);
    RdConfig cfg;
    cfg.n = 36;
    cfg.alpha_grid = 128;
    const rd::RdEvaluator eval =
        rd::make_rd_evaluator(p.spectra, p.model, p.lip, cfg);
    const double eps_star =
        rd::eps_search(eval, p.model, p.spectra, p.lip, cfg);
    if (eps_star > 1.0 / cfg.beta) continue;  // outside the integral range
    const double os = rd::one_shot_bound(eval, cfg, eps_star);
    const double ib = rd::integral_bound(eval, cfg);
    CHECK(ib <= os * 1.05);
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("ternary search kernel and eps_search") {
  const auto objective = [](double x) { return x + 1.0 / x; };
  const double min_x = rd::ternary_search_min(objective, 1e-3, 1e3, 400);
  CHECK(std::abs(min_x - 1.0) <= 1e-3);

  // Degenerate range: all-zero weights search returns sqrt(1/n).
  FcnModel zero = FcnModel::zeros({3, 3, 2});
  rd::Rng rng(5);
  const DenseMatrix x = rdtest::random_matrix(3, 16, rng);
  const rd::LayerFeatureSet feats = rd::forward_with_hooks(zero, x);
  const auto spectra = rd::layer_gram_spectra(feats, 8192, 8, rng);
  const rd::LipschitzSurrogates lip = rd::lipschitz_surrogates(zero);
  RdConfig cfg;
  cfg.n = 16;
  const rd::RdEvaluator eval = rd::make_rd_evaluator(spectra, zero, lip, cfg);
  CHECK(rd::eps_search(eval, zero, spectra, lip, cfg) ==
        doctest::Approx(0.25));

  // Search result stays inside the admissible range.
  for (int rep = 0; rep < 10; ++rep) {
    Pipeline p = random_pipeline(rng, 20);
    RdConfig c2;
    c2.n = 20;
    c2.eps_search_steps = 200;
    const rd::RdEvaluator e2 =
        rd::make_rd_evaluator(p.spectra, p.model, p.lip, c2);
    const double lower = std::sqrt(1.0 / 20.0);
    double upper = 0.0;
    const double wf = rd::frobenius_norm_all(p.model);
    for (index_t l = 1; l <= p.model.depth(); ++l)
      upper = std::max(upper, std::sqrt(2.0 * double(p.model.depth()) *
                                        p.spectra[l - 1].max() * wf * wf *
                                        p.lip.for_layer(l) *
                                        p.lip.for_layer(l) / 20.0));
    const double got = rd::eps_search(e2, p.model, p.spectra, p.lip, c2);
    CHECK(got >= lower * (1.0 - 1e-12));
    CHECK(got <= upper * (1.0 + 1e-12));
  }
}

TEST_CASE("vc_proxy matches the published capacity numbers") {
  CHECK(rdtest::rel_err(rd::vc_proxy(5.961e6, 10), 9.299e8) < 1e-3);
  CHECK(rdtest::rel_err(rd::vc_proxy(2.690e5, 20), 6.727e7) < 1e-3);
  CHECK(rd::vc_proxy(std::exp(1.0), 1) ==
        doctest::Approx(std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("param_count") {
  CHECK(rd::param_count(FcnModel::zeros({784, 64, 10})) == 50816);
  CHECK(rd::param_count(FcnModel::zeros({1, 1})) == 1);
  CHECK(rd::param_count(FcnModel::zeros({2, 3, 2})) == 12);
}

TEST_CASE("spectral_bound hand values and homogeneity") {
  RdConfig cfg;
  cfg.beta = 1.0;
  cfg.n = 4;
  FcnModel zero = FcnModel::zeros({2, 3, 2});
  CHECK(rd::spectral_bound(zero, 1.0, cfg) == 0.0);

  FcnModel m = FcnModel::zeros({1, 1});
  m.weights[0] = DenseMatrix(1, 1, {2.0});
  // (beta B_x ||W||_F / sqrt(n)) * sqrt(L * (d1+d0) * empty product)
  CHECK(rd::spectral_bound(m, 1.0, cfg) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  rd::Rng rng(9);
  const FcnModel r = random_model({3, 5, 2}, rng, 0.8);
  RdConfig beta2 = cfg;
  beta2.beta = 2.0;
  CHECK(rd::spectral_bound(r, 1.3, beta2) ==
        doctest::Approx(2.0 * rd::spectral_bound(r, 1.3, cfg)).epsilon(1e-10));
}

TEST_CASE("bartlett_bound hand values and permutation invariance") {
  RdConfig cfg;
  cfg.beta = 1.0;
  cfg.n = 1;
  FcnModel zero = FcnModel::zeros({2, 2});
  CHECK(rd::bartlett_bound(zero, 1.0, cfg) == 0.0);

  FcnModel m = FcnModel::zeros({1, 1});
  m.weights[0] = DenseMatrix(1, 1, {2.0});
  CHECK(rd::bartlett_bound(m, 1.0, cfg) == doctest::Approx(2.0).epsilon(1e-12));

  rd::Rng rng(14);
  FcnModel r = random_model({4, 5, 3}, rng, 0.9);
  const double before = rd::bartlett_bound(r, 2.0, cfg);
  // Swap two columns of W_1: the 2,1 norm and spectral norms are unchanged.
  DenseMatrix& w = r.weights[0];
  for (index_t i = 0; i < w.rows(); ++i) std::swap(w(i, 0), w(i, 2));
  CHECK(rd::bartlett_bound(r, 2.0, cfg) ==
        doctest::Approx(before).epsilon(1e-9));
}

TEST_CASE("analyze produces a complete deterministic report") {
  rd::Rng data_rng(77);
  FcnModel m = random_model({6, 10, 8, 3}, data_rng, 0.5);
  const DenseMatrix x = rdtest::random_matrix(6, 40, data_rng);
  RdConfig cfg;
  cfg.beta = 1.0;

  rd::Rng r1(123), r2(123);
  const rd::RdReport a = rd::analyze(m, x, cfg, 8192, 8, r1);
  const rd::RdReport b = rd::analyze(m, x, cfg, 8192, 8, r2);
  CHECK(rd::report_to_json(a) == rd::report_to_json(b));

  CHECK(a.per_layer.size() == 3);
  CHECK(std::isfinite(a.d_r_total));
  CHECK(a.baselines.param_count == rd::param_count(m));
  CHECK(a.one_shot_bound > 0.0);
  CHECK(a.integral_bound > 0.0);
  CHECK(a.eps_star >= std::sqrt(1.0 / 40.0) * (1 - 1e-12));

  // Fixed eps skips the search and lands in the report.
  RdConfig fixed = cfg;
  fixed.eps = 0.5;
  rd::Rng r3(123);
  const rd::RdReport c = rd::analyze(m, x, fixed, 8192, 8, r3);
  CHECK(c.eps_star == 0.5);

  // The mixed-sample path concatenates features; Grams add.
  const DenseMatrix xs = rdtest::random_matrix(6, 7, data_rng);
  const DenseMatrix xsp = rdtest::random_matrix(6, 7, data_rng);
  DenseMatrix both(6, 14);
  for (index_t i = 0; i < 6; ++i) {
    for (index_t j = 0; j < 7; ++j) {
      both(i, j) = xs(i, j);
      both(i, j + 7) = xsp(i, j);
    }
  }
  const DenseMatrix sum = rd::add(rd::gram(xs), rd::gram(xsp));
  CHECK(rd::subtract(rd::gram(both), sum).frobenius_norm() <=
        1e-12 * sum.frobenius_norm());
}

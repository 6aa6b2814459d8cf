#include "rd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

namespace rd {

namespace {

constexpr double kWeightNormFloor = 1e-300;

index_t thread_budget() {
  if (const char* env = std::getenv("RD_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) return index_t(v);
  }
  return 1;
}

// Orthonormal complement of an orthonormal frame: sweep the identity columns,
// project out everything accepted so far, keep the d - r survivors.
DenseMatrix complete_basis(const DenseMatrix& frame) {
  const index_t d = frame.rows();
  const index_t r = frame.cols();
  DenseMatrix comp(d, d - r);
  index_t found = 0;
  std::vector<double> v(d);
  for (index_t cand = 0; cand < d && found < d - r; ++cand) {
    for (index_t i = 0; i < d; ++i) v[i] = (i == cand) ? 1.0 : 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (index_t j = 0; j < r; ++j) {
        double dot = 0.0;
        for (index_t i = 0; i < d; ++i) dot += frame(i, j) * v[i];
        for (index_t i = 0; i < d; ++i) v[i] -= dot * frame(i, j);
      }
      for (index_t j = 0; j < found; ++j) {
        double dot = 0.0;
        for (index_t i = 0; i < d; ++i) dot += comp(i, j) * v[i];
        for (index_t i = 0; i < d; ++i) v[i] -= dot * comp(i, j);
      }
    }
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm < 1e-6) continue;  // candidate already in the span
    for (index_t i = 0; i < d; ++i) comp(i, found) = v[i] / nrm;
    ++found;
  }
  if (found != d - r)
    fail(ErrorCode::NumericError, "complete_basis: completion failed");
  return comp;
}

double top_eigenvalue(const DenseMatrix& sym) {
  const Spectrum s = sym_eig(sym);
  return s.count() ? std::max(s.max(), 0.0) : 0.0;
}

double operator_norm_via_gram(const DenseMatrix& m) {
  // ||m||_op = sqrt(lambda_max(m^T m)); the Jacobi route is accurate enough
  // for the 1e-8 agreement checks the chart identities run at.
  if (m.empty()) return 0.0;
  return std::sqrt(top_eigenvalue(m.rows() <= m.cols()
                                      ? gram(m)
                                      : gram(m.transposed())));
}

}  // namespace

Subspace::Subspace(DenseMatrix orthonormal_frame)
    : frame_(std::move(orthonormal_frame)) {
  if (frame_.cols() == 0 || frame_.cols() > frame_.rows())
    fail(ErrorCode::DimensionMismatch, "Subspace: needs 1 <= r <= d");
  const DenseMatrix g = multiply_tn(frame_, frame_);
  double err = 0.0;
  for (index_t i = 0; i < g.rows(); ++i)
    for (index_t j = 0; j < g.cols(); ++j)
      err += std::pow(g(i, j) - (i == j ? 1.0 : 0.0), 2);
  if (std::sqrt(err) > 1e-10)
    fail(ErrorCode::RankDeficient, "Subspace: frame is not orthonormal");
}

Subspace Subspace::from_span(const DenseMatrix& m) {
  return Subspace(qr_orthonormalize(m));
}

DenseMatrix Subspace::projector() const { return multiply_nt(frame_, frame_); }

double ellipsoidal_proj_metric(const Subspace& v1, const Subspace& v2,
                               const DenseMatrix& sigma) {
  const index_t d = v1.ambient_dim();
  if (v2.ambient_dim() != d || sigma.rows() != d || sigma.cols() != d)
    fail(ErrorCode::DimensionMismatch,
         "ellipsoidal_proj_metric: ambient dimensions disagree");
  const Spectrum sigma_spec = sym_eig(sigma);
  if (sigma_spec.min() < -1e-9 * std::max(sigma_spec.max(), 0.0))
    fail(ErrorCode::NotPsd, "ellipsoidal_proj_metric: sigma is not PSD");

  const DenseMatrix diff = subtract(v1.projector(), v2.projector());
  const DenseMatrix inner = multiply(diff, multiply(sigma, diff));
  return std::sqrt(top_eigenvalue(inner));
}

Subspace graph_chart(const Subspace& vbar, const DenseMatrix& x) {
  const index_t d = vbar.ambient_dim();
  const index_t r = vbar.rank();
  if (r >= d)
    fail(ErrorCode::DimensionMismatch, "graph_chart: needs r < d");
  if (x.rows() != d - r || x.cols() != r)
    fail(ErrorCode::DimensionMismatch,
         "graph_chart: X must be (d-r) x r, got " + std::to_string(x.rows()) +
             " x " + std::to_string(x.cols()));
  const DenseMatrix vperp = complete_basis(vbar.frame());
  // [Vbar Vperp] [I; X] = Vbar + Vperp X
  const DenseMatrix span = add(vbar.frame(), multiply(vperp, x));
  return Subspace::from_span(span);
}

SineTangent sine_tangent_check(const Subspace& vbar, const DenseMatrix& x) {
  const Subspace chart = graph_chart(vbar, x);
  SineTangent out;
  out.rho = ellipsoidal_proj_metric(chart, vbar,
                                    DenseMatrix::identity(vbar.ambient_dim()));
  const double xop = operator_norm_via_gram(x);
  out.predicted = xop / std::sqrt(1.0 + xop * xop);
  return out;
}

Subspace sample_grassmannian(index_t d, index_t r, Rng& rng) {
  if (r < 1 || r > d)
    fail(ErrorCode::DimensionMismatch, "sample_grassmannian: need 1 <= r <= d");
  for (int attempt = 0; attempt < 8; ++attempt) {
    DenseMatrix g(d, r);
    for (double& v : g.mutable_data()) v = rng.next_gaussian();
    try {
      return Subspace::from_span(g);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RankDeficient) throw;
    }
  }
  fail(ErrorCode::RankDeficient,
       "sample_grassmannian: repeated rank-deficient draws");
}

BallMass ball_mass_estimate(const Subspace& center, const DenseMatrix& sigma,
                            double eps, index_t samples, Rng& rng) {
  if (samples < 1)
    fail(ErrorCode::ShapeMismatch, "ball_mass_estimate: samples must be >= 1");
  const index_t d = center.ambient_dim();
  const index_t r = center.rank();
  const Spectrum sigma_spec = sym_eig(sigma);
  if (sigma_spec.min() < -1e-9 * std::max(sigma_spec.max(), 0.0))
    fail(ErrorCode::NotPsd, "ball_mass_estimate: sigma is not PSD");
  const DenseMatrix pc = center.projector();

  const Rng base = rng;
  rng.next_u64();  // advance the caller stream so repeated calls differ

  auto count_range = [&](index_t begin, index_t end) {
    index_t hits = 0;
    for (index_t i = begin; i < end; ++i) {
      Rng local = base.child(i);
      const Subspace draw = sample_grassmannian(d, r, local);
      const DenseMatrix diff = subtract(draw.projector(), pc);
      const DenseMatrix inner = multiply(diff, multiply(sigma, diff));
      if (std::sqrt(top_eigenvalue(inner)) <= eps) ++hits;
    }
    return hits;
  };

  index_t hits = 0;
  const index_t threads = std::min<index_t>(thread_budget(), samples);
  if (threads <= 1) {
    hits = count_range(0, samples);
  } else {
    std::vector<index_t> partial(threads, 0);
    std::vector<std::thread> pool;
    const index_t chunk = (samples + threads - 1) / threads;
    for (index_t t = 0; t < threads; ++t) {
      const index_t begin = t * chunk;
      const index_t end = std::min(samples, begin + chunk);
      pool.emplace_back([&, t, begin, end] { partial[t] = count_range(begin, end); });
    }
    for (std::thread& th : pool) th.join();
    for (index_t h : partial) hits += h;
  }

  BallMass out;
  out.hits = hits;
  out.mass_hat = double(hits) / double(samples);
  out.log_inv_mass = hits == 0 ? std::numeric_limits<double>::infinity()
                               : -std::log(out.mass_hat);
  out.reliable = hits >= 30;
  return out;
}

double grassmannian_cover_rhs(index_t d, index_t r,
                              const Spectrum& sigma_spectrum, double eps,
                              double cover_c) {
  if (r > d)
    fail(ErrorCode::DimensionMismatch, "grassmannian_cover_rhs: r > d");
  const index_t need = std::max(r, d - r);
  if (sigma_spectrum.count() < need)
    fail(ErrorCode::SpectrumTooShort,
         "grassmannian_cover_rhs: spectrum has " +
             std::to_string(sigma_spectrum.count()) + " values, needs " +
             std::to_string(need));
  if (!(eps > 0.0)) return std::numeric_limits<double>::infinity();
  const double eps2 = eps * eps;
  auto partial = [&](index_t terms) {
    double s = 0.0;
    for (index_t k = 0; k < terms; ++k)
      s += std::log(cover_c * std::max(sigma_spectrum.values()[k], eps2) /
                    eps2);
    return s;
  };
  return 0.5 * double(d - r) * partial(r) + 0.5 * double(r) * partial(d - r);
}

IsoCertificate iso_check(const LayerFeatureSet& feats_s,
                         const LayerFeatureSet& feats_sprime,
                         const FcnModel& model, const LipschitzSurrogates& lip,
                         const RdConfig& cfg, double eps) {
  model.validate();
  const index_t depth = model.depth();
  if (feats_s.layer_count() != depth || feats_sprime.layer_count() != depth)
    fail(ErrorCode::MismatchedLayers, "iso_check: feature sets vs model depth");
  if (feats_s.sample_count() != feats_sprime.sample_count())
    fail(ErrorCode::DimensionMismatch, "iso_check: sample counts differ");
  for (index_t j = 0; j < depth; ++j)
    if (feats_s.features[j].rows() != feats_sprime.features[j].rows())
      fail(ErrorCode::DimensionMismatch, "iso_check: widths differ at layer " +
                                             std::to_string(j));
  if (!(eps > 0.0))
    fail(ErrorCode::InvalidResolution, "iso_check: eps must be > 0");
  (void)cfg;  // certificate is per (W, eps); config carries no extra knobs here

  const index_t n = feats_s.sample_count();
  const double r_w = std::max(frobenius_norm_all(model), kWeightNormFloor);

  IsoCertificate cert;
  cert.per_layer.reserve(depth);
  for (index_t j = 0; j < depth; ++j) {
    const double m_bar = lip.for_layer(j + 1);
    const double theta = double(n) * eps * eps /
                         (2.0 * double(depth) * m_bar * m_bar * r_w * r_w);

    const DenseMatrix gram_s = gram(feats_s.features[j]);
    const DenseMatrix gram_sp = gram(feats_sprime.features[j]);
    const EigenDecomposition eig = sym_eig_full(gram_s);
    const index_t dj = gram_s.rows();

    // Active set: above the finite resolution, with a pseudo-inverse cutoff
    // guarding against roundoff-level eigenvalues slipping in.
    const double top = eig.values.empty() ? 0.0 : std::max(eig.values[0], 0.0);
    const double cutoff = std::max(theta, 1e-12 * top);
    index_t active = 0;
    while (active < dj && eig.values[active] >= cutoff) ++active;

    IsoLayer layer;
    layer.layer = j;
    layer.theta = theta;
    layer.active_dim = active;

    if (active > 0) {
      // kappa = lambda_max(D^{-1/2} V_a^T Gamma' V_a D^{-1/2}) with D the
      // active eigenvalues of Gamma^S.
      DenseMatrix va(dj, active);
      for (index_t c = 0; c < active; ++c)
        for (index_t i = 0; i < dj; ++i) va(i, c) = eig.vectors(i, c);
      DenseMatrix b = multiply_tn(va, multiply(gram_sp, va));
      for (index_t i = 0; i < active; ++i)
        for (index_t k = 0; k < active; ++k)
          b(i, k) /= std::sqrt(eig.values[i] * eig.values[k]);
      layer.kappa_hat = top_eigenvalue(b);
    } else {
      layer.kappa_hat = 0.0;  // degenerate active subspace
    }

    if (active < dj) {
      DenseMatrix vq(dj, dj - active);
      for (index_t c = active; c < dj; ++c)
        for (index_t i = 0; i < dj; ++i) vq(i, c - active) = eig.vectors(i, c);
      const DenseMatrix q_gram = multiply_tn(vq, multiply(gram_sp, vq));
      layer.b_sub_hat = top_eigenvalue(q_gram) / theta;
    } else {
      layer.b_sub_hat = 0.0;
    }
    cert.per_layer.push_back(layer);
  }
  return cert;
}

}  // namespace rd

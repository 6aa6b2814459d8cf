#include "rd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rd {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::AsymmetryTooLarge: return "AsymmetryTooLarge";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SketchDimExceedsRows: return "SketchDimExceedsRows";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InvalidResolution: return "InvalidResolution";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::SpectrumTooShort: return "SpectrumTooShort";
    case ErrorCode::MismatchedLayers: return "MismatchedLayers";
    case ErrorCode::NumericError: return "NumericError";
  }
  return "Unknown";
}

DenseMatrix::DenseMatrix(index_t rows, index_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(index_t rows, index_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    fail(ErrorCode::ShapeMismatch,
         "DenseMatrix: data length " + std::to_string(data_.size()) +
             " does not equal rows*cols = " + std::to_string(rows_ * cols_));
  check_finite("DenseMatrix");
}

DenseMatrix DenseMatrix::identity(index_t n) {
  DenseMatrix m(n, n);
  for (index_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (index_t i = 0; i < rows_; ++i)
    for (index_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double DenseMatrix::col_norm(index_t j) const {
  double s = 0.0;
  for (index_t i = 0; i < rows_; ++i) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

double DenseMatrix::max_col_norm() const {
  double best = 0.0;
  for (index_t j = 0; j < cols_; ++j) best = std::max(best, col_norm(j));
  return best;
}

void DenseMatrix::check_finite(const char* context) const {
  for (double v : data_)
    if (!std::isfinite(v))
      fail(ErrorCode::NonFinite,
           std::string(context) + ": non-finite entry encountered");
}

namespace {

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b,
                        const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(ErrorCode::ShapeMismatch, std::string(op) + ": shape mismatch");
}

}  // namespace

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    fail(ErrorCode::ShapeMismatch, "multiply: inner dimensions disagree");
  DenseMatrix c(a.rows(), b.cols());
  // i-k-j order keeps the inner loop contiguous for row-major storage.
  for (index_t i = 0; i < a.rows(); ++i) {
    for (index_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (index_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

DenseMatrix multiply_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols())
    fail(ErrorCode::ShapeMismatch, "multiply_nt: inner dimensions disagree");
  DenseMatrix c(a.rows(), b.rows());
  for (index_t i = 0; i < a.rows(); ++i) {
    for (index_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (index_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  }
  return c;
}

DenseMatrix multiply_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows())
    fail(ErrorCode::ShapeMismatch, "multiply_tn: inner dimensions disagree");
  DenseMatrix c(a.cols(), b.cols());
  for (index_t k = 0; k < a.rows(); ++k) {
    for (index_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (index_t j = 0; j < b.cols(); ++j) c(i, j) += aki * b(k, j);
    }
  }
  return c;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "subtract");
  DenseMatrix c = a;
  for (index_t i = 0; i < c.size(); ++i) c.mutable_data()[i] -= b.data()[i];
  return c;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "add");
  DenseMatrix c = a;
  for (index_t i = 0; i < c.size(); ++i) c.mutable_data()[i] += b.data()[i];
  return c;
}

DenseMatrix scaled(const DenseMatrix& a, double s) {
  DenseMatrix c = a;
  for (double& v : c.mutable_data()) v *= s;
  return c;
}

// ---------------------------------------------------------------------------
// Rng

namespace {

inline std::uint64_t splitmix_step(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() { return splitmix_step(state_); }

double Rng::next_uniform() {
  // 53 high bits -> double in [0, 1)
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - next_uniform();
  const double u2 = next_uniform();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * M_PI * u2;
  spare_ = mag * std::sin(ang);
  has_spare_ = true;
  return mag * std::cos(ang);
}

Rng Rng::split() { return Rng(next_u64()); }

Rng Rng::child(std::uint64_t index) const {
  std::uint64_t s = state_ ^ (0xA0761D6478BD642FULL * (index + 1));
  return Rng(splitmix_step(s));
}

// ---------------------------------------------------------------------------
// Spectrum

Spectrum::Spectrum(std::vector<double> values, SpectrumSource source,
                   index_t sketch_dim)
    : values_(std::move(values)), source_(source), sketch_dim_(sketch_dim) {
  for (double v : values_)
    if (!std::isfinite(v))
      fail(ErrorCode::NonFinite, "Spectrum: non-finite eigenvalue");
  for (index_t k = 0; k + 1 < values_.size(); ++k)
    if (values_[k] < values_[k + 1])
      fail(ErrorCode::ShapeMismatch, "Spectrum: values not nonincreasing");
  if (!values_.empty()) {
    const double tol = 1e-9 * std::max(values_.front(), 0.0);
    for (double& v : values_)
      if (v < 0.0 && v >= -tol) v = 0.0;
  }
}

double Spectrum::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

// ---------------------------------------------------------------------------
// Symmetric eigensolver (cyclic Jacobi)

namespace {

struct JacobiResult {
  std::vector<double> values;
  DenseMatrix vectors;
};

// Cyclic-by-row Jacobi on the symmetrized input. Accuracy dominates speed at
// the matrix sizes this kernel targets (<= a few thousand).
JacobiResult jacobi_eig(const DenseMatrix& m, bool want_vectors) {
  if (m.rows() != m.cols())
    fail(ErrorCode::NonSquare, "sym_eig: matrix is not square");
  m.check_finite("sym_eig");
  const index_t n = m.rows();

  double frob = m.frobenius_norm();
  double asym = 0.0;
  for (index_t i = 0; i < n; ++i)
    for (index_t j = i + 1; j < n; ++j)
      asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
  if (frob > 0.0 && asym > 1e-10 * frob)
    fail(ErrorCode::AsymmetryTooLarge,
         "sym_eig: relative asymmetry " + std::to_string(asym / frob) +
             " exceeds 1e-10");

  // Work on (m + m^T)/2.
  DenseMatrix a(n, n);
  for (index_t i = 0; i < n; ++i)
    for (index_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));

  DenseMatrix v = want_vectors ? DenseMatrix::identity(n) : DenseMatrix();

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (index_t p = 0; p < n; ++p)
      for (index_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    off = std::sqrt(2.0 * off);
    if (off <= 1e-14 * std::max(frob, 1e-300)) break;

    for (index_t p = 0; p + 1 < n; ++p) {
      for (index_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double scale = std::abs(a(p, p)) + std::abs(a(q, q));
        if (std::abs(apq) <= 1e-18 * std::max(scale, 1e-300)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
        double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double h = t * apq;

        a(p, p) -= h;
        a(q, q) += h;
        a(p, q) = a(q, p) = 0.0;
        for (index_t j = 0; j < n; ++j) {
          if (j == p || j == q) continue;
          const double ajp = a(j, p);
          const double ajq = a(j, q);
          a(j, p) = ajp - s * (ajq + tau * ajp);
          a(j, q) = ajq + s * (ajp - tau * ajq);
          a(p, j) = a(j, p);
          a(q, j) = a(j, q);
        }
        if (want_vectors) {
          for (index_t j = 0; j < n; ++j) {
            const double vjp = v(j, p);
            const double vjq = v(j, q);
            v(j, p) = vjp - s * (vjq + tau * vjp);
            v(j, q) = vjq + s * (vjp - tau * vjq);
          }
        }
      }
    }
  }

  std::vector<index_t> order(n);
  std::iota(order.begin(), order.end(), index_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](index_t x, index_t y) { return a(x, x) > a(y, y); });

  JacobiResult out;
  out.values.resize(n);
  for (index_t k = 0; k < n; ++k) out.values[k] = a(order[k], order[k]);
  if (want_vectors) {
    out.vectors = DenseMatrix(n, n);
    for (index_t k = 0; k < n; ++k)
      for (index_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace

Spectrum sym_eig(const DenseMatrix& m) {
  return Spectrum(jacobi_eig(m, false).values);
}

EigenDecomposition sym_eig_full(const DenseMatrix& m) {
  JacobiResult r = jacobi_eig(m, true);
  return EigenDecomposition{std::move(r.values), std::move(r.vectors)};
}

// ---------------------------------------------------------------------------
// Spectral norm (power iteration)

namespace {

double power_iterate(const DenseMatrix& m, std::vector<double> v,
                     index_t max_iters, double tol) {
  const index_t rows = m.rows();
  const index_t cols = m.cols();
  std::vector<double> u(rows);
  double sigma = 0.0;
  double prev = -1.0;
  for (index_t it = 0; it < max_iters; ++it) {
    for (index_t i = 0; i < rows; ++i) {
      double s = 0.0;
      for (index_t j = 0; j < cols; ++j) s += m(i, j) * v[j];
      u[i] = s;
    }
    double un = 0.0;
    for (double x : u) un += x * x;
    sigma = std::sqrt(un);
    if (sigma == 0.0) return 0.0;  // start vector hit the null space
    for (index_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (index_t i = 0; i < rows; ++i) s += m(i, j) * u[i];
      v[j] = s;
    }
    double vn = 0.0;
    for (double x : v) vn += x * x;
    vn = std::sqrt(vn);
    if (vn == 0.0) return sigma;
    for (double& x : v) x /= vn;
    if (prev >= 0.0 && std::abs(sigma - prev) <= tol * sigma) break;
    prev = sigma;
  }
  return sigma;
}

}  // namespace

double spectral_norm(const DenseMatrix& m, index_t max_iters, double tol) {
  if (m.empty())
    fail(ErrorCode::ShapeMismatch, "spectral_norm: empty matrix");
  m.check_finite("spectral_norm");

  std::vector<double> start(m.cols(), 1.0 / std::sqrt(double(m.cols())));
  double sigma = power_iterate(m, start, max_iters, tol);
  if (sigma == 0.0 && m.frobenius_norm() > 0.0) {
    // All-ones start was annihilated; one fixed-seed random restart.
    Rng restart(0x5DEECE66DULL);
    std::vector<double> r(m.cols());
    double nrm = 0.0;
    for (double& x : r) {
      x = restart.next_gaussian();
      nrm += x * x;
    }
    nrm = std::sqrt(nrm);
    for (double& x : r) x /= nrm;
    sigma = power_iterate(m, std::move(r), max_iters, tol);
  }
  if (!std::isfinite(sigma))
    fail(ErrorCode::NonFinite, "spectral_norm: iteration diverged");
  return sigma;
}

// ---------------------------------------------------------------------------
// Gram products and sketching

DenseMatrix gram(const DenseMatrix& f) {
  f.check_finite("gram");
  const index_t d = f.rows();
  const index_t n = f.cols();
  DenseMatrix g(d, d);
  for (index_t i = 0; i < d; ++i) {
    for (index_t j = i; j < d; ++j) {
      double s = 0.0;
      for (index_t k = 0; k < n; ++k) s += f(i, k) * f(j, k);
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  g.check_finite("gram");
  return g;
}

Spectrum sketched_gram_spectrum_with(const DenseMatrix& omega,
                                     const DenseMatrix& f) {
  if (omega.cols() != f.rows())
    fail(ErrorCode::ShapeMismatch, "sketched_gram_spectrum: sketch width");
  const DenseMatrix sf = multiply(omega, f);
  Spectrum s = sym_eig(gram(sf));
  return Spectrum(s.values(), SpectrumSource::Sketched, omega.rows());
}

Spectrum sketched_gram_spectrum(const DenseMatrix& f, index_t r, Rng& rng) {
  if (r < 1 || r > f.rows())
    fail(ErrorCode::SketchDimExceedsRows,
         "sketched_gram_spectrum: need 1 <= r <= d, got r = " +
             std::to_string(r) + ", d = " + std::to_string(f.rows()));
  // Entries N(0, 1/r) preserve expected quadratic forms.
  const double scale = 1.0 / std::sqrt(double(r));
  DenseMatrix omega(r, f.rows());
  for (double& v : omega.mutable_data()) v = scale * rng.next_gaussian();
  return sketched_gram_spectrum_with(omega, f);
}

// ---------------------------------------------------------------------------
// QR orthonormalization

DenseMatrix qr_orthonormalize(const DenseMatrix& m) {
  if (m.cols() > m.rows())
    fail(ErrorCode::ShapeMismatch, "qr_orthonormalize: needs r <= d");
  m.check_finite("qr_orthonormalize");
  const index_t d = m.rows();
  const index_t r = m.cols();
  DenseMatrix q = m;
  for (index_t j = 0; j < r; ++j) {
    const double orig = q.col_norm(j);
    // Two MGS passes keep orthogonality near machine precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (index_t i = 0; i < j; ++i) {
        double dot = 0.0;
        for (index_t k = 0; k < d; ++k) dot += q(k, i) * q(k, j);
        for (index_t k = 0; k < d; ++k) q(k, j) -= dot * q(k, i);
      }
    }
    const double nrm = q.col_norm(j);
    if (orig == 0.0 || nrm < 1e-12 * orig)
      fail(ErrorCode::RankDeficient,
           "qr_orthonormalize: column " + std::to_string(j) +
               " is linearly dependent");
    for (index_t k = 0; k < d; ++k) q(k, j) /= nrm;
  }
  return q;
}

}  // namespace rd

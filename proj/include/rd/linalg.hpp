#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rd/error.hpp"

namespace rd {

using index_t = std::size_t;

/// Row-major dense real matrix, the universal numeric carrier.
/// Constructors reject NaN/Inf entries.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(index_t rows, index_t cols);  // zero-filled
  DenseMatrix(index_t rows, index_t cols, std::vector<double> data);

  static DenseMatrix identity(index_t n);

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }
  index_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(index_t i, index_t j) { return data_[i * cols_ + j]; }
  double operator()(index_t i, index_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& mutable_data() { return data_; }

  DenseMatrix transposed() const;
  double frobenius_norm() const;
  double max_col_norm() const;
  double col_norm(index_t j) const;

  /// Throws NonFinite if any entry is NaN or Inf.
  void check_finite(const char* context) const;

 private:
  index_t rows_ = 0;
  index_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);     // a * b
DenseMatrix multiply_nt(const DenseMatrix& a, const DenseMatrix& b);  // a * b^T
DenseMatrix multiply_tn(const DenseMatrix& a, const DenseMatrix& b);  // a^T * b
DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix scaled(const DenseMatrix& a, double s);

/// Deterministic splittable 64-bit generator (splitmix64). Identical seeds
/// produce identical streams. Single-owner: share across threads only by
/// splitting into independent children.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double next_uniform();   // [0, 1)
  double next_gaussian();  // standard normal, Box-Muller pair with spare

  /// Child stream seeded from this stream; advances this generator.
  Rng split();

  /// Pure derivation: child stream for a given index, this generator
  /// untouched. Lets sampling loops stay deterministic under any
  /// parallel partition of the index range.
  Rng child(std::uint64_t index) const;

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class SpectrumSource { Exact, Sketched };

/// Nonincreasing eigenvalue list of a (nominally PSD) matrix. Negative values
/// within 1e-9 of the top eigenvalue are roundoff and get clamped to zero;
/// larger negatives are kept so indefinite symmetric inputs stay representable.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> values,
                    SpectrumSource source = SpectrumSource::Exact,
                    index_t sketch_dim = 0);

  const std::vector<double>& values() const { return values_; }
  SpectrumSource source() const { return source_; }
  index_t sketch_dim() const { return sketch_dim_; }

  index_t count() const { return values_.size(); }
  double max() const { return values_.empty() ? 0.0 : values_.front(); }
  double min() const { return values_.empty() ? 0.0 : values_.back(); }
  double sum() const;

 private:
  std::vector<double> values_;
  SpectrumSource source_;
  index_t sketch_dim_;
};

struct EigenDecomposition {
  std::vector<double> values;  // nonincreasing
  DenseMatrix vectors;         // columns aligned with values
};

/// Eigenvalues of the symmetrized (m + m^T)/2 by cyclic Jacobi rotations,
/// sorted nonincreasing. Input must be square and symmetric within 1e-10
/// relative asymmetry.
Spectrum sym_eig(const DenseMatrix& m);

/// Same solver with accumulated eigenvectors.
EigenDecomposition sym_eig_full(const DenseMatrix& m);

/// Largest singular value by power iteration on m^T m. Start vector is the
/// normalized all-ones vector; a single fixed-seed random restart handles the
/// case where the start lies in the null space.
double spectral_norm(const DenseMatrix& m, index_t max_iters = 2000,
                     double tol = 1e-10);

/// F F^T for F of shape d x n, exactly symmetric by construction.
DenseMatrix gram(const DenseMatrix& f);

/// Spectrum of (Omega F)(Omega F)^T for a Gaussian sketch Omega in R^{r x d}
/// with i.i.d. N(0, 1/r) entries; approximates the top-r eigenvalues of FF^T.
Spectrum sketched_gram_spectrum(const DenseMatrix& f, index_t r, Rng& rng);

/// Sketch with an explicit matrix instead of a random draw (degenerate-sketch
/// and fidelity tests go through here).
Spectrum sketched_gram_spectrum_with(const DenseMatrix& omega,
                                     const DenseMatrix& f);

/// Orthonormalize the columns of m (d x r, r <= d) by modified Gram-Schmidt
/// with reorthogonalization. Throws RankDeficient when a pivot falls below
/// 1e-12 of the original column norm.
DenseMatrix qr_orthonormalize(const DenseMatrix& m);

}  // namespace rd

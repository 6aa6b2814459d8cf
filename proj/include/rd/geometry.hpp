#pragma once

#include <vector>

#include "rd/bounds.hpp"
#include "rd/linalg.hpp"
#include "rd/network.hpp"

namespace rd {

/// r-dimensional subspace of R^d held as an orthonormal frame. The derived
/// projector frame * frame^T depends only on the subspace, not on the frame.
class Subspace {
 public:
  /// Frame must already have orthonormal columns (within 1e-10).
  explicit Subspace(DenseMatrix orthonormal_frame);

  /// Orthonormalize the column span first.
  static Subspace from_span(const DenseMatrix& m);

  const DenseMatrix& frame() const { return frame_; }
  DenseMatrix projector() const;
  index_t ambient_dim() const { return frame_.rows(); }
  index_t rank() const { return frame_.cols(); }

 private:
  DenseMatrix frame_;
};

/// ||Sigma^{1/2} (P_V1 - P_V2)||_op for PSD Sigma, evaluated as
/// sqrt(lambda_max(D Sigma D)) with D = P_V1 - P_V2, which is the same
/// quantity computed through the symmetric eigensolver instead of a matrix
/// square root plus power iteration.
double ellipsoidal_proj_metric(const Subspace& v1, const Subspace& v2,
                               const DenseMatrix& sigma);

/// Subspace spanned by [Vbar Vbar_perp] [I_r; X] for X of shape (d-r) x r.
Subspace graph_chart(const Subspace& vbar, const DenseMatrix& x);

struct SineTangent {
  double rho;        // isotropic projection metric between chart and Vbar
  double predicted;  // ||X||_op / sqrt(1 + ||X||_op^2)
};

SineTangent sine_tangent_check(const Subspace& vbar, const DenseMatrix& x);

/// Uniform draw from Gr(d, r): QR of a standard Gaussian d x r matrix.
/// Redraws up to 8 times on rank deficiency before giving up.
Subspace sample_grassmannian(index_t d, index_t r, Rng& rng);

struct BallMass {
  double mass_hat = 0.0;
  double log_inv_mass = 0.0;  // -log(mass_hat); +inf when mass_hat = 0
  bool reliable = false;      // at least 30 hits observed
  index_t hits = 0;
};

/// Monte Carlo mass of the ellipsoidal metric ball of radius eps around
/// `center` under the uniform Grassmannian measure. Rejection counting only;
/// intended for small (d, r, eps). Honors the RD_THREADS environment
/// variable; results are identical at any thread count.
BallMass ball_mass_estimate(const Subspace& center, const DenseMatrix& sigma,
                            double eps, index_t samples, Rng& rng);

/// Covering-lemma right-hand side
///   (d-r)/2 * sum_{k<=r} log(C max{lambda_k, eps^2} / eps^2)
///   + r/2 * sum_{k<=d-r} log(C max{lambda_k, eps^2} / eps^2).
/// The default C = 5184 = 72^2 comes from the explicit covering constant.
double grassmannian_cover_rhs(index_t d, index_t r,
                              const Spectrum& sigma_spectrum, double eps,
                              double cover_c = 5184.0);

struct IsoLayer {
  index_t layer = 0;       // feature layer j in 0..L-1
  double theta = 0.0;      // finite spectral resolution at this layer
  double kappa_hat = 0.0;  // 0 flags a degenerate (empty) active subspace
  double b_sub_hat = 0.0;
  index_t active_dim = 0;
};

struct IsoCertificate {
  std::vector<IsoLayer> per_layer;
};

/// Layer-wise finite-resolution subspace isomorphism certificate for a single
/// (W, eps): theta_j = n eps^2 / (2 L m_bar(j+1)^2 R_W^2); P projects onto
/// eigendirections of Gamma_j^S with lambda >= theta_j; kappa_hat is the
/// smallest kappa with P Gamma^{S'} P <= kappa P Gamma^S P on the active
/// subspace; b_sub_hat = ||Q Gamma^{S'} Q||_op / theta_j for Q = I - P.
IsoCertificate iso_check(const LayerFeatureSet& feats_s,
                         const LayerFeatureSet& feats_sprime,
                         const FcnModel& model, const LipschitzSurrogates& lip,
                         const RdConfig& cfg, double eps);

}  // namespace rd

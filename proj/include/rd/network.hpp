#pragma once

#include <vector>

#include "rd/linalg.hpp"

namespace rd {

enum class Activation { ReLU, Identity };

/// Fully connected network: widths d_0..d_L, weight W_l of shape
/// d_l x d_{l-1} stored at weights[l-1], one activation tag per layer.
/// No bias terms.
struct FcnModel {
  std::vector<index_t> widths;
  std::vector<DenseMatrix> weights;
  std::vector<Activation> activations;

  index_t depth() const { return weights.size(); }
  index_t input_dim() const { return widths.front(); }
  index_t output_dim() const { return widths.back(); }

  /// Zero weights, ReLU hidden layers, Identity output layer.
  static FcnModel zeros(const std::vector<index_t>& widths);

  /// Throws ShapeMismatch unless widths/weights/activations agree and L >= 1.
  void validate() const;
};

/// Per-layer feature matrices: features[0] = X (d_0 x n), features[l] =
/// sigma_l(W_l * features[l-1]) for l = 1..L.
struct LayerFeatureSet {
  std::vector<DenseMatrix> features;

  index_t layer_count() const { return features.size() - 1; }
  index_t sample_count() const {
    return features.empty() ? 0 : features.front().cols();
  }
};

/// m_bar(l) = prod_{i > l} ||W_i||_op for l = 1..L, so m_bar(L) = 1. The
/// eps-dependence of the exact local Lipschitz constant is dropped; only the
/// spectral-norm product surrogate is computed.
struct LipschitzSurrogates {
  std::vector<double> products;  // products[l-1] holds m_bar(l)

  double for_layer(index_t l) const { return products.at(l - 1); }
  index_t layer_count() const { return products.size(); }
};

LayerFeatureSet forward_with_hooks(const FcnModel& model, const DenseMatrix& x);

/// Spectrum of Gamma_{l-1} = F_{l-1} F_{l-1}^T for each layer l = 1..L.
/// Rows d_{l-1} <= sketch_threshold take the exact path; larger layers use a
/// Gaussian sketch with r = min(sketch_threshold, d_{l-1} / sketch_divisor).
std::vector<Spectrum> layer_gram_spectra(const LayerFeatureSet& feats,
                                         index_t sketch_threshold,
                                         index_t sketch_divisor, Rng& rng);

LipschitzSurrogates lipschitz_surrogates(const FcnModel& model);

/// Frobenius norm of the concatenation of all weight matrices.
double frobenius_norm_all(const FcnModel& model);

}  // namespace rd

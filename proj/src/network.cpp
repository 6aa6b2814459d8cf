#include "rd/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rd {

FcnModel FcnModel::zeros(const std::vector<index_t>& widths) {
  FcnModel m;
  m.widths = widths;
  for (index_t l = 1; l < widths.size(); ++l) {
    m.weights.emplace_back(widths[l], widths[l - 1]);
    m.activations.push_back(l + 1 < widths.size() ? Activation::ReLU
                                                  : Activation::Identity);
  }
  m.validate();
  return m;
}

void FcnModel::validate() const {
  if (widths.size() < 2)
    fail(ErrorCode::ShapeMismatch, "FcnModel: needs at least one layer");
  if (weights.size() != widths.size() - 1 ||
      activations.size() != weights.size())
    fail(ErrorCode::ShapeMismatch, "FcnModel: layer count mismatch");
  for (index_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != widths[l + 1] || weights[l].cols() != widths[l])
      fail(ErrorCode::ShapeMismatch,
           "FcnModel: W" + std::to_string(l + 1) + " shape disagrees with widths");
  }
}

LayerFeatureSet forward_with_hooks(const FcnModel& model,
                                   const DenseMatrix& x) {
  model.validate();
  if (x.rows() != model.input_dim())
    fail(ErrorCode::ShapeMismatch,
         "forward: input has " + std::to_string(x.rows()) +
             " rows, model expects " + std::to_string(model.input_dim()));
  LayerFeatureSet out;
  out.features.reserve(model.depth() + 1);
  out.features.push_back(x);
  for (index_t l = 0; l < model.depth(); ++l) {
    DenseMatrix z = multiply(model.weights[l], out.features.back());
    if (model.activations[l] == Activation::ReLU)
      for (double& v : z.mutable_data()) v = std::max(v, 0.0);
    z.check_finite("forward");
    out.features.push_back(std::move(z));
  }
  return out;
}

std::vector<Spectrum> layer_gram_spectra(const LayerFeatureSet& feats,
                                         index_t sketch_threshold,
                                         index_t sketch_divisor, Rng& rng) {
  std::vector<Spectrum> spectra;
  spectra.reserve(feats.layer_count());
  for (index_t l = 1; l <= feats.layer_count(); ++l) {
    const DenseMatrix& f = feats.features[l - 1];
    const index_t d = f.rows();
    if (d <= sketch_threshold) {
      spectra.push_back(sym_eig(gram(f)));
    } else {
      const index_t r =
          std::min(sketch_threshold, sketch_divisor ? d / sketch_divisor : d);
      spectra.push_back(sketched_gram_spectrum(f, std::max<index_t>(r, 1), rng));
    }
  }
  return spectra;
}

LipschitzSurrogates lipschitz_surrogates(const FcnModel& model) {
  model.validate();
  const index_t depth = model.depth();
  LipschitzSurrogates lip;
  lip.products.assign(depth, 1.0);
  // m_bar(l) = ||W_{l+1}||_op * m_bar(l+1), built from the top layer down.
  for (index_t l = depth - 1; l >= 1; --l) {
    const double op = spectral_norm(model.weights[l], 2000, 1e-8);
    lip.products[l - 1] = op * lip.products[l];
  }
  return lip;
}

double frobenius_norm_all(const FcnModel& model) {
  double s = 0.0;
  for (const DenseMatrix& w : model.weights)
    for (double v : w.data()) s += v * v;
  return std::sqrt(s);
}

}  // namespace rd

#include "rd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rd {

namespace {

// Forward pass keeping every activation; the backward pass needs them.
std::vector<DenseMatrix> forward_cache(const FcnModel& model,
                                       const DenseMatrix& x) {
  std::vector<DenseMatrix> acts;
  acts.reserve(model.depth() + 1);
  acts.push_back(x);
  for (index_t l = 0; l < model.depth(); ++l) {
    DenseMatrix z = multiply(model.weights[l], acts.back());
    if (model.activations[l] == Activation::ReLU)
      for (double& v : z.mutable_data()) v = std::max(v, 0.0);
    acts.push_back(std::move(z));
  }
  return acts;
}

// Softmax probabilities per column, numerically stable.
DenseMatrix softmax_columns(const DenseMatrix& logits) {
  DenseMatrix p = logits;
  for (index_t j = 0; j < p.cols(); ++j) {
    double m = p(0, j);
    for (index_t i = 1; i < p.rows(); ++i) m = std::max(m, p(i, j));
    double z = 0.0;
    for (index_t i = 0; i < p.rows(); ++i) {
      p(i, j) = std::exp(p(i, j) - m);
      z += p(i, j);
    }
    for (index_t i = 0; i < p.rows(); ++i) p(i, j) /= z;
  }
  return p;
}

DenseMatrix slice_columns(const DenseMatrix& m, const std::vector<index_t>& idx,
                          index_t begin, index_t end) {
  DenseMatrix out(m.rows(), end - begin);
  for (index_t j = begin; j < end; ++j)
    for (index_t i = 0; i < m.rows(); ++i) out(i, j - begin) = m(i, idx[j]);
  return out;
}

}  // namespace

FcnModel init_fcn(const std::vector<index_t>& widths, Rng& rng) {
  FcnModel m = FcnModel::zeros(widths);
  for (DenseMatrix& w : m.weights) {
    const double bound = std::sqrt(6.0 / double(w.cols()));
    for (double& v : w.mutable_data())
      v = (2.0 * rng.next_uniform() - 1.0) * bound;
  }
  return m;
}

Gradients loss_and_gradients(const FcnModel& model, const DenseMatrix& x,
                             const std::vector<index_t>& labels) {
  if (labels.size() != x.cols())
    fail(ErrorCode::ShapeMismatch, "loss_and_gradients: label count");
  const index_t n = x.cols();
  const index_t classes = model.output_dim();
  for (index_t lab : labels)
    if (lab >= classes)
      fail(ErrorCode::ShapeMismatch, "loss_and_gradients: label out of range");

  std::vector<DenseMatrix> acts = forward_cache(model, x);
  const DenseMatrix& logits = acts.back();
  DenseMatrix probs = softmax_columns(logits);

  double loss = 0.0;
  for (index_t j = 0; j < n; ++j) {
    double m = logits(0, j);
    for (index_t i = 1; i < classes; ++i) m = std::max(m, logits(i, j));
    double z = 0.0;
    for (index_t i = 0; i < classes; ++i) z += std::exp(logits(i, j) - m);
    loss -= logits(labels[j], j) - m - std::log(z);
  }
  loss /= double(n);

  // delta at the output: (softmax - onehot) / n, then backprop.
  DenseMatrix delta = probs;
  for (index_t j = 0; j < n; ++j) delta(labels[j], j) -= 1.0;
  for (double& v : delta.mutable_data()) v /= double(n);

  Gradients out;
  out.loss = loss;
  out.weight_grads.resize(model.depth());
  for (index_t l = model.depth(); l-- > 0;) {
    out.weight_grads[l] = multiply_nt(delta, acts[l]);
    if (l == 0) break;
    DenseMatrix prev = multiply_tn(model.weights[l], delta);
    if (model.activations[l - 1] == Activation::ReLU) {
      const DenseMatrix& a = acts[l];
      for (index_t i = 0; i < prev.size(); ++i)
        if (a.data()[i] <= 0.0) prev.mutable_data()[i] = 0.0;
    }
    delta = std::move(prev);
  }
  return out;
}

double train_error(const FcnModel& model, const LabeledDataset& data) {
  if (data.sample_count() == 0) return 0.0;
  std::vector<DenseMatrix> acts = forward_cache(model, data.inputs);
  const DenseMatrix& logits = acts.back();
  index_t wrong = 0;
  for (index_t j = 0; j < logits.cols(); ++j) {
    index_t best = 0;
    for (index_t i = 1; i < logits.rows(); ++i)
      if (logits(i, j) > logits(best, j)) best = i;
    if (best != data.labels[j]) ++wrong;
  }
  return double(wrong) / double(data.sample_count());
}

std::pair<FcnModel, std::vector<TrainSnapshot>> train(
    FcnModel model, const LabeledDataset& data, const TrainConfig& cfg,
    const std::vector<index_t>& snapshot_epochs) {
  model.validate();
  if (model.output_dim() != data.num_classes)
    fail(ErrorCode::ShapeMismatch,
         "train: model output width != num_classes");
  if (data.inputs.rows() != model.input_dim())
    fail(ErrorCode::ShapeMismatch, "train: input dimension mismatch");
  if (cfg.batch_size < 1)
    fail(ErrorCode::ShapeMismatch, "train: batch_size must be >= 1");

  const index_t n = data.sample_count();
  Rng rng(cfg.seed);
  double lr = cfg.lr;

  std::vector<TrainSnapshot> snapshots;
  auto snapshot_wanted = [&](index_t epoch) {
    return std::find(snapshot_epochs.begin(), snapshot_epochs.end(), epoch) !=
           snapshot_epochs.end();
  };
  if (snapshot_wanted(0))
    snapshots.push_back({0, model, train_error(model, data), lr});

  std::vector<DenseMatrix> velocity;
  velocity.reserve(model.depth());
  for (const DenseMatrix& w : model.weights)
    velocity.emplace_back(w.rows(), w.cols());

  std::vector<index_t> order(n);
  for (index_t i = 0; i < n; ++i) order[i] = i;

  for (index_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates from the run RNG; without-replacement pass over the data.
    for (index_t i = n; i > 1; --i) {
      const index_t j = index_t(rng.next_u64() % i);
      std::swap(order[i - 1], order[j]);
    }
    for (index_t start = 0; start < n; start += cfg.batch_size) {
      const index_t end = std::min(n, start + cfg.batch_size);
      DenseMatrix xb = slice_columns(data.inputs, order, start, end);
      std::vector<index_t> yb(end - start);
      for (index_t j = start; j < end; ++j) yb[j - start] = data.labels[order[j]];

      Gradients g = loss_and_gradients(model, xb, yb);
      if (!std::isfinite(g.loss))
        fail(ErrorCode::DivergedLoss,
             "train: loss diverged at epoch " + std::to_string(epoch));

      for (index_t l = 0; l < model.depth(); ++l) {
        DenseMatrix& w = model.weights[l];
        DenseMatrix& v = velocity[l];
        const DenseMatrix& grad = g.weight_grads[l];
        for (index_t i = 0; i < w.size(); ++i) {
          const double step =
              grad.data()[i] + cfg.weight_decay * w.data()[i];
          v.mutable_data()[i] = cfg.momentum * v.data()[i] - lr * step;
          w.mutable_data()[i] += v.data()[i];
        }
      }
    }
    if (std::find(cfg.lr_decay_epochs.begin(), cfg.lr_decay_epochs.end(),
                  epoch) != cfg.lr_decay_epochs.end())
      lr *= cfg.lr_decay_factor;
    if (snapshot_wanted(epoch))
      snapshots.push_back({epoch, model, train_error(model, data), lr});
  }
  return {std::move(model), std::move(snapshots)};
}

LabeledDataset synth_blobs(index_t n, index_t d0, index_t num_classes,
                           double spread, std::uint64_t seed) {
  if (num_classes < 2)
    fail(ErrorCode::ShapeMismatch, "synth_blobs: need at least 2 classes");
  Rng rng(seed);

  // Class means: first num_classes vertices of the centered canonical simplex
  // when they fit in d0 coordinates, otherwise deterministic random
  // directions on the sphere. Either way scaled by 4 * spread.
  std::vector<std::vector<double>> means(num_classes,
                                         std::vector<double>(d0, 0.0));
  if (num_classes <= d0) {
    for (index_t c = 0; c < num_classes; ++c)
      for (index_t j = 0; j < num_classes; ++j)
        means[c][j] = 4.0 * spread * ((j == c ? 1.0 : 0.0) - 1.0 / double(num_classes));
  } else {
    for (index_t c = 0; c < num_classes; ++c) {
      double nrm = 0.0;
      for (index_t j = 0; j < d0; ++j) {
        means[c][j] = rng.next_gaussian();
        nrm += means[c][j] * means[c][j];
      }
      nrm = std::sqrt(nrm);
      if (nrm == 0.0) nrm = 1.0;
      for (index_t j = 0; j < d0; ++j) means[c][j] *= 4.0 * spread / nrm;
    }
  }

  LabeledDataset data;
  data.num_classes = num_classes;
  data.inputs = DenseMatrix(d0, n);
  data.labels.resize(n);
  for (index_t i = 0; i < n; ++i) {
    const index_t c = i % num_classes;
    data.labels[i] = c;
    for (index_t j = 0; j < d0; ++j)
      data.inputs(j, i) = means[c][j] + spread * rng.next_gaussian();
  }
  return data;
}

}  // namespace rd

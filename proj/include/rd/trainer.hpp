#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rd/network.hpp"

namespace rd {

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  index_t epochs = 0;
  index_t batch_size = 128;
  std::vector<index_t> lr_decay_epochs;
  double lr_decay_factor = 0.1;
  std::uint64_t seed = 0;
};

struct LabeledDataset {
  DenseMatrix inputs;           // d_0 x n, one column per sample
  std::vector<index_t> labels;  // class indices, length n
  index_t num_classes = 0;

  index_t sample_count() const { return labels.size(); }
};

struct TrainSnapshot {
  index_t epoch;
  FcnModel model;
  double train_error;  // fraction misclassified over the full training set
  double lr;           // learning rate in effect after this epoch's step decay
};

struct Gradients {
  std::vector<DenseMatrix> weight_grads;
  double loss = 0.0;  // mean softmax cross-entropy over the batch
};

/// Kaiming-uniform fan-in initialization (U(-b, b), b = sqrt(6 / fan_in)),
/// ReLU hidden layers and an Identity output layer.
FcnModel init_fcn(const std::vector<index_t>& widths, Rng& rng);

/// Mean softmax cross-entropy and its analytic weight gradients for a batch.
Gradients loss_and_gradients(const FcnModel& model, const DenseMatrix& x,
                             const std::vector<index_t>& labels);

double train_error(const FcnModel& model, const LabeledDataset& data);

/// Mini-batch SGD with classical momentum (v <- mu v - lr (g + wd w),
/// w <- w + v), per-epoch shuffling without replacement, step decay applied
/// at the end of each listed epoch. Deterministic from cfg.seed. Snapshots
/// are taken at the requested epochs; epoch 0 means the untouched input
/// model. Throws DivergedLoss when the loss turns NaN.
std::pair<FcnModel, std::vector<TrainSnapshot>> train(
    FcnModel model, const LabeledDataset& data, const TrainConfig& cfg,
    const std::vector<index_t>& snapshot_epochs);

/// Balanced Gaussian blobs: class means on a centered simplex scaled by
/// 4 * spread, noise std = spread, labels round-robin, deterministic from
/// seed.
LabeledDataset synth_blobs(index_t n, index_t d0, index_t num_classes,
                           double spread, std::uint64_t seed);

}  // namespace rd

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rd/trainer.hpp"
#include "support.hpp"

using rd::DenseMatrix;
using rd::FcnModel;
using rd::index_t;
using rd::LabeledDataset;
using rd::TrainConfig;

TEST_CASE("analytic gradients match central finite differences") {
  rd::Rng rng(2025);
  FcnModel model = rd::init_fcn({8, 8, 8, 4}, rng);
  const DenseMatrix x = rdtest::random_matrix(8, 16, rng);
  std::vector<index_t> labels(16);
  for (index_t& l : labels) l = rng.next_u64() % 4;

  const rd::Gradients analytic = rd::loss_and_gradients(model, x, labels);
  const double h = 1e-5;
  for (int probe = 0; probe < 20; ++probe) {
    const index_t layer = rng.next_u64() % model.depth();
    const index_t idx = rng.next_u64() % model.weights[layer].size();

    FcnModel plus = model;
    plus.weights[layer].mutable_data()[idx] += h;
    FcnModel minus = model;
    minus.weights[layer].mutable_data()[idx] -= h;
    const double fd = (rd::loss_and_gradients(plus, x, labels).loss -
                       rd::loss_and_gradients(minus, x, labels).loss) /
                      (2.0 * h);
    const double an = analytic.weight_grads[layer].data()[idx];
    CHECK(std::abs(fd - an) <=
          1e-4 * std::max({std::abs(fd), std::abs(an), 1e-6}));
  }
}

TEST_CASE("zero epochs returns the input model untouched") {
  rd::Rng rng(4);
  const FcnModel model = rd::init_fcn({4, 6, 2}, rng);
  const LabeledDataset data = rd::synth_blobs(20, 4, 2, 0.3, 9);
  TrainConfig cfg;
  cfg.epochs = 0;
  auto [out, snaps] = rd::train(model, data, cfg, {0});
  REQUIRE(snaps.size() == 1);
  CHECK(snaps[0].epoch == 0);
  for (index_t l = 0; l < model.depth(); ++l)
    CHECK(rd::subtract(out.weights[l], model.weights[l]).frobenius_norm() ==
          0.0);
}

TEST_CASE("separable blobs train to zero error") {
  const LabeledDataset data = rd::synth_blobs(60, 2, 2, 0.25, 11);
  rd::Rng rng(5);
  FcnModel model = rd::init_fcn({2, 16, 2}, rng);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 16;
  cfg.lr = 0.05;
  cfg.seed = 3;
  auto [trained, snaps] = rd::train(std::move(model), data, cfg, {50});
  REQUIRE(snaps.size() == 1);
  CHECK(snaps[0].train_error == 0.0);
}

TEST_CASE("step decay arithmetic is visible in snapshots") {
  const LabeledDataset data = rd::synth_blobs(8, 2, 2, 0.1, 1);
  rd::Rng rng(6);
  FcnModel model = rd::init_fcn({2, 4, 2}, rng);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.lr = 0.01;
  cfg.lr_decay_epochs = {1};
  cfg.lr_decay_factor = 0.1;
  auto [trained, snaps] = rd::train(std::move(model), data, cfg, {0, 1, 2});
  REQUIRE(snaps.size() == 3);
  CHECK(snaps[0].lr == doctest::Approx(0.01));
  CHECK(snaps[1].lr == doctest::Approx(0.001));  // decayed at end of epoch 1
  CHECK(snaps[2].lr == doctest::Approx(0.001));
}

TEST_CASE("full-batch descent on the convex single-layer problem") {
  const LabeledDataset data = rd::synth_blobs(40, 3, 2, 0.5, 17);
  rd::Rng rng(7);
  FcnModel model = rd::init_fcn({3, 2}, rng);  // softmax regression, convex
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 40;  // full batch
  cfg.lr = 0.05;
  cfg.momentum = 0.0;
  cfg.weight_decay = 0.0;
  double prev = rd::loss_and_gradients(model, data.inputs, data.labels).loss;
  for (int epoch = 0; epoch < 25; ++epoch) {
    auto [next, snaps] = rd::train(std::move(model), data, cfg, {});
    model = std::move(next);
    const double loss =
        rd::loss_and_gradients(model, data.inputs, data.labels).loss;
    CHECK(loss <= prev + 1e-12);
    prev = loss;
  }
}

TEST_CASE("training is bitwise deterministic in the seed") {
  const LabeledDataset data = rd::synth_blobs(30, 4, 3, 0.4, 23);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 8;
  cfg.seed = 99;
  rd::Rng r1(12), r2(12);
  FcnModel m1 = rd::init_fcn({4, 8, 3}, r1);
  FcnModel m2 = rd::init_fcn({4, 8, 3}, r2);
  auto [t1, s1] = rd::train(std::move(m1), data, cfg, {});
  auto [t2, s2] = rd::train(std::move(m2), data, cfg, {});
  for (index_t l = 0; l < t1.depth(); ++l)
    for (index_t i = 0; i < t1.weights[l].size(); ++i)
      CHECK(t1.weights[l].data()[i] == t2.weights[l].data()[i]);
}

TEST_CASE("train validates shapes and labels") {
  const LabeledDataset data = rd::synth_blobs(10, 4, 3, 0.4, 2);
  rd::Rng rng(1);
  FcnModel wrong_out = rd::init_fcn({4, 8, 2}, rng);  // 2 outputs, 3 classes
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(rd::train(std::move(wrong_out), data, cfg, {}), rd::Error);
}

TEST_CASE("synth_blobs structure") {
  // Balance: 100 points, two classes, 50/50.
  const LabeledDataset data = rd::synth_blobs(100, 3, 2, 0.5, 31);
  index_t c0 = 0;
  for (index_t l : data.labels) c0 += (l == 0) ? 1 : 0;
  CHECK(c0 == 50);

  // Determinism.
  const LabeledDataset again = rd::synth_blobs(100, 3, 2, 0.5, 31);
  CHECK(rd::subtract(data.inputs, again.inputs).frobenius_norm() == 0.0);

  // spread = 0 collapses each class to a single point.
  const LabeledDataset tight = rd::synth_blobs(12, 3, 3, 0.0, 7);
  for (index_t i = 3; i < 12; ++i)
    for (index_t j = 0; j < 3; ++j)
      CHECK(tight.inputs(j, i) == tight.inputs(j, i % 3));

  CHECK_THROWS_AS(rd::synth_blobs(10, 3, 1, 0.5, 1), rd::Error);
}

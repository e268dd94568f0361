#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "axiomgrad/dataset.h"
#include "axiomgrad/network.h"
#include "axiomgrad/parallel.h"

namespace axiomgrad {

enum class Loss { kCrossEntropy };

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  Loss loss = Loss::kCrossEntropy;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
};

// Minibatch SGD on softmax cross-entropy. A trailing softmax layer is treated
// as part of the loss; networks without one are trained on their raw outputs
// as logits. Sample order is a seeded shuffle per epoch, so a run is fully
// determined by (net, data, cfg).
Network train(const Network& net, const LabeledDataset& data,
              const TrainConfig& cfg,
              const std::function<void(const EpochStats&)>& on_epoch = {});

std::size_t argmax(const Tensor& t);
double accuracy(const Network& net, const LabeledDataset& data,
                Workers workers = {});

// ---- model builders

// Table-1 Fashion-MNIST classifier on [1, 28, 28] inputs in [0, 1]:
//   conv 5x5x5 + tanh, maxpool 2x2, conv 5x5x10 + tanh, maxpool 2x2,
//   dense 160 + tanh, dense 64 + tanh, dense 10, softmax.
// Activation layers carry the block names ("conv1", "dense160", "dense64");
// the affine part before each is suffixed "_pre".
Network table1_network(std::uint64_t seed);

// Fully connected chain sizes[0] -> ... -> sizes.back() with `hidden`
// activations between layers named "dense<k>" (activation output) and
// "dense<k>_pre". The output layer is "out"; a softmax is appended when
// `softmax` is set.
Network mlp(const std::vector<std::size_t>& sizes, ActivationKind hidden,
            std::uint64_t seed, std::optional<DomainBox> box = std::nullopt,
            bool softmax = false);

}  // namespace axiomgrad

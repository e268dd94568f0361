#include "axiomgrad/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "axiomgrad/error.h"

namespace axiomgrad {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValueError("learning rate must be a non-negative finite number");
  }
  if (batch_size < 1) throw ValueError("batch size must be at least 1");
  if (epochs < 1) throw ValueError("epochs must be at least 1");
}

std::size_t argmax(const Tensor& t) {
  return static_cast<std::size_t>(
      std::max_element(t.data().begin(), t.data().end()) - t.data().begin());
}

namespace {

Tensor softmax_of(const Tensor& logits) {
  Tensor p({logits.size()});
  const double m = *std::max_element(logits.data().begin(), logits.data().end());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p.data()) v /= z;
  return p;
}

}  // namespace

Network train(const Network& net, const LabeledDataset& data,
              const TrainConfig& cfg,
              const std::function<void(const EpochStats&)>& on_epoch) {
  cfg.validate();
  data.validate();
  if (data.empty()) throw ValueError("cannot train on an empty dataset");
  const bool strip_softmax =
      net.num_layers() > 0 && net.layer(net.num_layers() - 1).kind() == "softmax";
  const std::size_t body_layers = net.num_layers() - (strip_softmax ? 1 : 0);
  if (net.output_size() < static_cast<std::size_t>(data.num_classes)) {
    throw ShapeError("network has fewer outputs than dataset classes");
  }

  std::vector<std::shared_ptr<Layer>> work;
  std::vector<LayerPtr> frozen;
  for (std::size_t k = 0; k < body_layers; ++k) {
    work.push_back(net.layer(k).clone());
    frozen.push_back(work.back());
  }
  const Network body(net.input_shape(), frozen, net.domain_box());

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<ParamGrads> grads(body_layers);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (ParamGrads& g : grads) {
        for (Tensor& t : g) std::fill(t.data().begin(), t.data().end(), 0.0);
      }
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t i = order[b];
        const Trace tr = body.trace(data.images[i]);
        Tensor p = softmax_of(tr.output());
        const auto label = static_cast<std::size_t>(data.labels[i]);
        loss_sum += -std::log(std::max(p[label], 1e-300));
        if (argmax(p) == label) ++correct;
        p[label] -= 1.0;
        body.backward(tr, p, &grads);
      }
      const double step = cfg.learning_rate / static_cast<double>(end - start);
      for (std::size_t k = 0; k < body_layers; ++k) {
        auto params = work[k]->mutable_parameters();
        for (std::size_t p = 0; p < params.size() && p < grads[k].size(); ++p) {
          Tensor& w = *params[p];
          const Tensor& g = grads[k][p];
          for (std::size_t e = 0; e < w.size(); ++e) w[e] -= step * g[e];
        }
      }
    }
    if (on_epoch) {
      on_epoch(EpochStats{epoch + 1, loss_sum / static_cast<double>(data.size()),
                          static_cast<double>(correct) /
                              static_cast<double>(data.size())});
    }
  }

  std::vector<LayerPtr> layers(frozen.begin(), frozen.end());
  if (strip_softmax) layers.push_back(net.layers().back());
  return Network(net.input_shape(), std::move(layers), net.domain_box());
}

double accuracy(const Network& net, const LabeledDataset& data, Workers workers) {
  if (data.empty()) throw ValueError("accuracy of an empty dataset");
  std::vector<std::uint8_t> hit(data.size(), 0);
  parallel_for(data.size(), workers, [&](std::size_t i) {
    hit[i] = argmax(net.forward(data.images[i])) ==
             static_cast<std::size_t>(data.labels[i]);
  });
  const auto correct = std::count(hit.begin(), hit.end(), std::uint8_t{1});
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

Network table1_network(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LayerPtr> layers;
  layers.push_back(Conv2d::random("conv1_pre", 1, 5, 5, 5, rng));
  layers.push_back(std::make_shared<Activation>("conv1", ActivationKind::kTanh));
  layers.push_back(std::make_shared<MaxPool2d>("pool1", 2, 2));
  layers.push_back(Conv2d::random("conv2_pre", 5, 10, 5, 5, rng));
  layers.push_back(std::make_shared<Activation>("conv2", ActivationKind::kTanh));
  layers.push_back(std::make_shared<MaxPool2d>("pool2", 2, 2));
  layers.push_back(Dense::random("dense160_pre", 160, 160, rng));
  layers.push_back(std::make_shared<Activation>("dense160", ActivationKind::kTanh));
  layers.push_back(Dense::random("dense64_pre", 160, 64, rng));
  layers.push_back(std::make_shared<Activation>("dense64", ActivationKind::kTanh));
  layers.push_back(Dense::random("logits", 64, 10, rng));
  layers.push_back(std::make_shared<Softmax>("softmax"));
  const Shape input{1, 28, 28};
  DomainBox box{Tensor(input), Tensor::filled(input, 1.0)};
  return Network(input, std::move(layers), std::move(box));
}

Network mlp(const std::vector<std::size_t>& sizes, ActivationKind hidden,
            std::uint64_t seed, std::optional<DomainBox> box, bool softmax) {
  if (sizes.size() < 2) throw ValueError("mlp needs at least two sizes");
  std::mt19937_64 rng(seed);
  std::vector<LayerPtr> layers;
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    const bool last = k + 1 == sizes.size();
    const std::string name = last ? "out" : "dense" + std::to_string(k);
    layers.push_back(Dense::random(last ? name : name + "_pre", sizes[k - 1],
                                   sizes[k], rng));
    if (!last) layers.push_back(std::make_shared<Activation>(name, hidden));
  }
  if (softmax) layers.push_back(std::make_shared<Softmax>("softmax"));
  return Network({sizes.front()}, std::move(layers), std::move(box));
}

}  // namespace axiomgrad

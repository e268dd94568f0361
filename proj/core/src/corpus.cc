#include "axiomgrad/corpus.h"

#include <memory>
#include <random>
#include <utility>

#include "axiomgrad/error.h"
#include "axiomgrad/train.h"

namespace axiomgrad::corpus {

DomainBox cube(std::size_t n, double lower, double upper) {
  return DomainBox{Tensor::filled({n}, lower), Tensor::filled({n}, upper)};
}

Network monomial(std::vector<std::size_t> factors, std::size_t inputs,
                 const DomainBox& box) {
  std::vector<LayerPtr> layers{std::make_shared<Product>(
      "product", std::vector<std::vector<std::size_t>>{std::move(factors)})};
  return Network({inputs}, std::move(layers), box);
}

Network x1x2(double upper) { return monomial({0, 1}, 2, cube(2, 0.0, upper)); }

Network x1x2_squared() { return monomial({0, 1, 1}, 2, cube(2, 0.0, 1.0)); }

Network x1_squared_x2() { return monomial({0, 0, 1}, 2, cube(2, 0.0, 1.0)); }

Network abs_difference() {
  std::vector<LayerPtr> layers{
      std::make_shared<Dense>("diff", Tensor({2, 2}, {-1, 1, 1, -1}),
                              Tensor({2})),
      std::make_shared<Reshape>("grid", Shape{1, 1, 2}),
      std::make_shared<MaxPool2d>("max", 1, 2),
  };
  return Network({2}, std::move(layers), cube(2, 0.0, 2.0));
}

Network linear(const Tensor& weights, double bias, const DomainBox& box) {
  std::vector<LayerPtr> layers{std::make_shared<Dense>(
      "linear", weights.reshaped({1, weights.size()}), Tensor::vector({bias}))};
  return Network({weights.size()}, std::move(layers), box);
}

Network tanh_net(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  return mlp(sizes, ActivationKind::kTanh, seed, cube(sizes.front(), -1.0, 1.0));
}

Network relu_net(const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  return mlp(sizes, ActivationKind::kRelu, seed, cube(sizes.front(), -1.0, 1.0));
}

Network weighted_sum(const Network& f, double alpha, const Network& g,
                     double beta) {
  if (f.output_size() != 1 || g.output_size() != 1) {
    throw ValueError("weighted_sum needs single-output networks");
  }
  if (f.input_size() != g.input_size()) {
    throw ShapeError("weighted_sum operands take different inputs");
  }
  std::vector<LayerPtr> layers{
      std::make_shared<Parallel>("terms", std::vector<Network>{f, g}),
      std::make_shared<Dense>("combine", Tensor({1, 2}, {alpha, beta}),
                              Tensor({1})),
  };
  return Network(f.input_shape(), std::move(layers), f.domain_box());
}

Network plus_constant(const Network& f, double c) {
  if (f.output_size() != 1) throw ValueError("plus_constant needs one output");
  std::vector<LayerPtr> layers{
      std::make_shared<Parallel>("term", std::vector<Network>{f}),
      std::make_shared<Dense>("shift", Tensor({1, 1}, {1.0}),
                              Tensor::vector({c})),
  };
  return Network(f.input_shape(), std::move(layers), f.domain_box());
}

std::vector<Network> equivalent_pair(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_tensor = [&](Shape shape) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = u(rng);
    return t;
  };
  // W = W2 * W1 and b = W2 * b1 + b2.
  const Tensor w1 = random_tensor({4, 2});
  const Tensor b1 = random_tensor({4});
  const Tensor w2 = random_tensor({3, 4});
  const Tensor b2 = random_tensor({3});
  Tensor w({3, 2});
  Tensor b = b2;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t k = 0; k < 4; ++k) {
      for (std::size_t c = 0; c < 2; ++c) w[r * 2 + c] += w2[r * 4 + k] * w1[k * 2 + c];
      b[r] += w2[r * 4 + k] * b1[k];
    }
  }
  const Tensor v = random_tensor({1, 3});
  const Tensor v0 = random_tensor({1});
  auto head = [&](std::vector<LayerPtr> layers) {
    layers.push_back(std::make_shared<Activation>("hidden", ActivationKind::kTanh));
    layers.push_back(std::make_shared<Dense>("out", v, v0));
    return Network({2}, std::move(layers), cube(2, -1.0, 1.0));
  };
  return {head({std::make_shared<Dense>("single", w, b)}),
          head({std::make_shared<Dense>("first", w1, b1),
                std::make_shared<Dense>("second", w2, b2)})};
}

std::vector<SplittableNet> splittable_nets() {
  std::vector<SplittableNet> nets;
  nets.push_back({tanh_net({4, 8, 6, 1}, 11), "dense1"});
  nets.push_back({tanh_net({3, 5, 4, 2}, 12), "dense2"});
  nets.push_back({relu_net({3, 6, 1}, 13), "dense1"});
  {
    std::vector<LayerPtr> layers{
        std::make_shared<Dense>("mix", Tensor({2, 2}, {1.0, 0.5, 0.2, 1.0}),
                                Tensor::vector({0.1, 0.0})),
        std::make_shared<Product>("product",
                                  std::vector<std::vector<std::size_t>>{{0, 1, 1}}),
    };
    nets.push_back({Network({2}, std::move(layers), cube(2, 0.0, 1.0)), "mix"});
  }
  nets.push_back({abs_difference(), "diff"});
  {
    std::mt19937_64 rng(14);
    std::vector<LayerPtr> layers;
    layers.push_back(Conv2d::random("conv_pre", 1, 2, 3, 3, rng));
    layers.push_back(std::make_shared<Activation>("conv", ActivationKind::kTanh));
    layers.push_back(std::make_shared<MaxPool2d>("pool", 2, 2));
    layers.push_back(Dense::random("out", 8, 1, rng));
    const Shape input{1, 6, 6};
    nets.push_back({Network(input, std::move(layers),
                            DomainBox{Tensor(input), Tensor::filled(input, 1.0)}),
                    "conv"});
  }
  return nets;
}

}  // namespace axiomgrad::corpus

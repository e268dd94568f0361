#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "axiomgrad/layer.h"
#include "axiomgrad/tensor.h"

namespace axiomgrad {

// Axis-aligned box [lower, upper] of valid inputs.
struct DomainBox {
  Tensor lower;
  Tensor upper;

  bool contains(const Tensor& x) const;
};

// Activations recorded by a forward pass. acts[k] is the input of layer k and
// acts.back() the network output. raw[k] holds the pre-mask output of layer k
// for masked layers and is empty otherwise.
struct Trace {
  std::vector<Tensor> acts;
  std::vector<Tensor> raw;

  const Tensor& output() const { return acts.back(); }
};

// Feed-forward chain of layers. Immutable after construction; every
// evaluation method is const and safe to call concurrently.
class Network {
 public:
  Network() = default;
  Network(Shape input_shape, std::vector<LayerPtr> layers,
          std::optional<DomainBox> box = std::nullopt);

  const Shape& input_shape() const { return shapes_.front(); }
  const Shape& output_shape() const { return shapes_.back(); }
  std::size_t input_size() const { return shape_size(input_shape()); }
  std::size_t output_size() const { return shape_size(output_shape()); }
  // Input shape of layer k; activation_shape(num_layers()) is the output.
  const Shape& activation_shape(std::size_t k) const { return shapes_.at(k); }

  const std::optional<DomainBox>& domain_box() const { return box_; }
  bool in_domain(const Tensor& x) const;

  std::span<const LayerPtr> layers() const { return layers_; }
  std::size_t num_layers() const { return layers_.size(); }
  const Layer& layer(std::size_t k) const { return *layers_.at(k); }
  std::optional<std::size_t> find_layer(std::string_view name) const;

  // F(x). Throws ShapeError on shape mismatch, ValueError on non-finite x.
  Tensor forward(const Tensor& x) const;
  Trace trace(const Tensor& x) const;

  // Reverse-mode pass: returns cotangent^T dF/dx at the traced point. When
  // param_grads is non-null it must hold one ParamGrads per layer (sized to
  // that layer's parameters) and receives the accumulated weight gradients.
  Tensor backward(const Trace& trace, const Tensor& cotangent,
                  std::vector<ParamGrads>* param_grads = nullptr) const;
  Tensor vjp(const Tensor& x, const Tensor& cotangent) const;

  // Gradient of output component `output_index` with respect to x.
  Tensor gradient(const Tensor& x, std::size_t output_index) const;

  // Copy with layer k replaced. Shapes are re-validated.
  Network with_layer(std::size_t k, LayerPtr layer) const;
  Network with_domain_box(std::optional<DomainBox> box) const;

  nlohmann::json to_json() const;
  static Network from_json(const nlohmann::json& j);

 private:
  std::vector<LayerPtr> layers_;
  std::vector<Shape> shapes_{Shape{}};
  std::optional<DomainBox> box_;
};

// F = back(front(x)), split after the named layer.
struct SplitNetwork {
  Network front;
  Network back;
  std::string layer_name;

  std::size_t width() const { return front.output_size(); }
};

// Splits after `layer_name`, which must not be the last layer. The front
// half keeps the domain box.
SplitNetwork split(const Network& net, std::string_view layer_name);

// Gradient of back-half output `output_index` at internal activations h.
Tensor backprop_from_internal(const SplitNetwork& split, const Tensor& h,
                              std::size_t output_index);

// Which scalar of the network output an attribution explains.
enum class TargetMode {
  kConfidence,  // the network output as is (post-softmax when present)
  kLogit,       // the input of a trailing softmax layer
};

struct Target {
  constexpr Target(std::size_t i = 0, TargetMode m = TargetMode::kConfidence)
      : index(i), mode(m) {}

  std::size_t index;
  TargetMode mode;
};

// The network whose output `index` is the attributed scalar: `net` itself for
// kConfidence, `net` without its trailing softmax for kLogit.
Network target_network(const Network& net, TargetMode mode);

}  // namespace axiomgrad

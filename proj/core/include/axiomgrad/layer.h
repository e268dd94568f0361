#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axiomgrad/tensor.h"

namespace axiomgrad {

class Network;
class Layer;
using LayerPtr = std::shared_ptr<const Layer>;

// Gradients of a layer's trainable parameters, aligned with parameters().
using ParamGrads = std::vector<Tensor>;

// One stage of a feed-forward chain. Layers are immutable once placed in a
// Network; the trainer works on clones.
//
// Kinks follow the left-branch convention: d max(u, v) = du whenever u >= v.
// So relu'(0) = 1 and max pooling routes the gradient to the first maximal
// element.
class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  const std::string& name() const { return name_; }
  virtual std::string kind() const = 0;

  // Throws ShapeError when `input` is not accepted.
  virtual Shape output_shape(const Shape& input) const = 0;

  virtual Tensor compute(const Tensor& in) const = 0;

  // Vector-Jacobian product: returns d<grad_out, f(in)>/d in. `out` is the
  // unmasked compute(in). When param_grads is non-null the parameter
  // gradients are accumulated into it.
  virtual Tensor vjp(const Tensor& in, const Tensor& out,
                     const Tensor& grad_out, ParamGrads* param_grads) const = 0;

  virtual std::vector<const Tensor*> parameters() const { return {}; }
  virtual std::vector<Tensor*> mutable_parameters() { return {}; }

  virtual std::shared_ptr<Layer> clone() const = 0;

  // Output positions forced to zero on every pass (zero-out pruning).
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  void set_mask(std::vector<std::uint8_t> mask) { mask_ = std::move(mask); }
  bool has_mask() const { return !mask_.empty(); }

  nlohmann::json to_json() const;

 protected:
  virtual void write_json(nlohmann::json& j) const = 0;

 private:
  std::string name_;
  std::vector<std::uint8_t> mask_;
};

// y = W x + b over the flattened input. W is [out, in].
class Dense final : public Layer {
 public:
  Dense(std::string name, Tensor weights, Tensor bias);
  // Uniform(-1/sqrt(in), 1/sqrt(in)) init for weights and bias.
  static std::shared_ptr<Dense> random(std::string name, std::size_t in,
                                       std::size_t out, std::mt19937_64& rng);

  std::size_t in_features() const { return weights_.shape()[1]; }
  std::size_t out_features() const { return weights_.shape()[0]; }
  const Tensor& weights() const { return weights_; }
  const Tensor& bias() const { return bias_; }

  std::string kind() const override { return "dense"; }
  Shape output_shape(const Shape& input) const override;
  Tensor compute(const Tensor& in) const override;
  Tensor vjp(const Tensor& in, const Tensor& out, const Tensor& grad_out,
             ParamGrads* param_grads) const override;
  std::vector<const Tensor*> parameters() const override;
  std::vector<Tensor*> mutable_parameters() override;
  std::shared_ptr<Layer> clone() const override;

 protected:
  void write_json(nlohmann::json& j) const override;

 private:
  Tensor weights_;
  Tensor bias_;
};

// Valid-padding, stride-1 convolution over NCHW-without-N input [C, H, W].
// Kernel is [out_channels, in_channels, kh, kw].
class Conv2d final : public Layer {
 public:
  Conv2d(std::string name, Tensor kernel, Tensor bias);
  static std::shared_ptr<Conv2d> random(std::string name,
                                        std::size_t in_channels,
                                        std::size_t out_channels,
                                        std::size_t kh, std::size_t kw,
                                        std::mt19937_64& rng);

  const Tensor& kernel() const { return kernel_; }
  const Tensor& bias() const { return bias_; }

  std::string kind() const override { return "conv2d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor compute(const Tensor& in) const override;
  Tensor vjp(const Tensor& in, const Tensor& out, const Tensor& grad_out,
             ParamGrads* param_grads) const override;
  std::vector<const Tensor*> parameters() const override;
  std::vector<Tensor*> mutable_parameters() override;
  std::shared_ptr<Layer> clone() const override;

 protected:
  void write_json(nlohmann::json& j) const override;

 private:
  Tensor kernel_;
  Tensor bias_;
};

// Non-overlapping max pooling (stride == pool size) over [C, H, W].
class MaxPool2d final : public Layer {
 public:
  MaxPool2d(std::string name, std::size_t pool_h, std::size_t pool_w);

  std::string kind() const override { return "maxpool2d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor compute(const Tensor& in) const override;
  Tensor vjp(const Tensor& in, const Tensor& out, const Tensor& grad_out,
             ParamGrads* param_grads) const override;
  std::shared_ptr<Layer> clone() const override;

 protected:
  void write_json(nlohmann::json& j) const override;

 private:
  std::size_t pool_h_;
  std::size_t pool_w_;
};

enum class ActivationKind { kTanh, kRelu, kLeakyRelu };

class Activation final : public Layer {
 public:
  Activation(std::string name, ActivationKind kind, double slope = 0.01);

  ActivationKind activation() const { return activation_; }

  std::string kind() const override;
  Shape output_shape(const Shape& input) const override { return input; }
  Tensor compute(const Tensor& in) const override;
  Tensor vjp(const Tensor& in, const Tensor& out, const Tensor& grad_out,
             ParamGrads* param_grads) const override;
  std::shared_ptr<Layer> clone() const override;

 protected:
  void write_json(nlohmann::json& j) const override;

 private:
  ActivationKind activation_;
  double slope_;  // negative-side slope of leaky-relu
};

// Softmax over the flattened input; output is rank 1.
class Softmax final : public Layer {
 public:
  explicit Softmax(std::string name) : Layer(std::move(name)) {}

  std::string kind() const override { return "softmax"; }
  Shape output_shape(const Shape& input) const override;
  Tensor compute(const Tensor& in) const override;
  Tensor vjp(const Tensor& in, const Tensor& out, const Tensor& grad_out,
             ParamGrads* param_grads) const override;
  std::shared_ptr<Layer> clone() const override;

 protected:
  void write_json(nlohmann::json& j) const override;
};

// out[k] = product of in[i] over the (possibly repeated) indices in
// factors[k]. x1 * x2^2 is the single factor list {0, 1, 1}.
class Product final : public Layer {
 public:
  Product(std::string name, std::vector<std::vector<std::size_t>> factors);

  std::string kind() const override { return "product"; }
  Shape output_shape(const Shape& input) const override;
  Tensor compute(const Tensor& in) const override;
  Tensor vjp(const Tensor& in, const Tensor& out, const Tensor& grad_out,
             ParamGrads* param_grads) const override;
  std::shared_ptr<Layer> clone() const override;

 protected:
  void write_json(nlohmann::json& j) const override;

 private:
  std::vector<std::vector<std::size_t>> factors_;
};

// y = scale * x + shift, elementwise, shape preserving.
class Affine final : public Layer {
 public:
  Affine(std::string name, Tensor scale, Tensor shift);

  const Tensor& scale() const { return scale_; }
  const Tensor& shift() const { return shift_; }

  std::string kind() const override { return "affine"; }
  Shape output_shape(const Shape& input) const override;
  Tensor compute(const Tensor& in) const override;
  Tensor vjp(const Tensor& in, const Tensor& out, const Tensor& grad_out,
             ParamGrads* param_grads) const override;
  std::shared_ptr<Layer> clone() const override;

 protected:
  void write_json(nlohmann::json& j) const override;

 private:
  Tensor scale_;
  Tensor shift_;
};

class Reshape final : public Layer {
 public:
  Reshape(std::string name, Shape shape);

  std::string kind() const override { return "reshape"; }
  Shape output_shape(const Shape& input) const override;
  Tensor compute(const Tensor& in) const override;
  Tensor vjp(const Tensor& in, const Tensor& out, const Tensor& grad_out,
             ParamGrads* param_grads) const override;
  std::shared_ptr<Layer> clone() const override;

 protected:
  void write_json(nlohmann::json& j) const override;

 private:
  Shape shape_;
};

// Runs every branch on the same input and concatenates their flattened
// outputs. Branch parameters are not trained.
class Parallel final : public Layer {
 public:
  Parallel(std::string name, std::vector<Network> branches);
  ~Parallel() override;

  const std::vector<Network>& branches() const { return *branches_; }

  std::string kind() const override { return "parallel"; }
  Shape output_shape(const Shape& input) const override;
  Tensor compute(const Tensor& in) const override;
  Tensor vjp(const Tensor& in, const Tensor& out, const Tensor& grad_out,
             ParamGrads* param_grads) const override;
  std::shared_ptr<Layer> clone() const override;

 protected:
  void write_json(nlohmann::json& j) const override;

 private:
  std::shared_ptr<const std::vector<Network>> branches_;
};

// Rebuilds a layer from Layer::to_json output. Throws FormatError.
LayerPtr layer_from_json(const nlohmann::json& j);

}  // namespace axiomgrad

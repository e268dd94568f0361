#include "axiomgrad/layer.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "axiomgrad/error.h"
#include "axiomgrad/network.h"

namespace axiomgrad {

using nlohmann::json;

namespace {

void require_input_size(const Layer& layer, const Tensor& in,
                        std::size_t expected) {
  if (in.size() != expected) {
    throw ShapeError("layer '" + layer.name() + "' expects " +
                     std::to_string(expected) + " inputs, got " +
                     std::to_string(in.size()));
  }
}

Tensor uniform_tensor(Shape shape, double limit, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return t;
}

void accumulate(ParamGrads* grads, std::size_t slot, const Tensor& shape_of,
                auto&& fill) {
  if (grads == nullptr) return;
  if (grads->size() <= slot) grads->resize(slot + 1);
  Tensor& g = (*grads)[slot];
  if (g.shape() != shape_of.shape()) g = Tensor(shape_of.shape());
  fill(g);
}

std::vector<double> json_doubles(const json& j, const std::string& layer,
                                 const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw FormatError("layer '" + layer + "': missing array '" + key + "'");
  }
  return j.at(key).get<std::vector<double>>();
}

Tensor json_tensor(const json& j, const std::string& layer, const char* key,
                   Shape shape) {
  std::vector<double> values = json_doubles(j, layer, key);
  if (values.size() != shape_size(shape)) {
    throw FormatError("layer '" + layer + "': '" + key + "' has " +
                      std::to_string(values.size()) + " values, shape " +
                      shape_to_string(shape) + " needs " +
                      std::to_string(shape_size(shape)));
  }
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace

json Layer::to_json() const {
  json j;
  j["kind"] = kind();
  j["name"] = name_;
  j["hyper"] = json::object();
  write_json(j);
  if (has_mask()) {
    std::vector<int> m(mask_.begin(), mask_.end());
    j["mask"] = m;
  }
  return j;
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::string name, Tensor weights, Tensor bias)
    : Layer(std::move(name)),
      weights_(std::move(weights)),
      bias_(std::move(bias)) {
  if (weights_.shape().size() != 2 || bias_.shape().size() != 1 ||
      bias_.size() != weights_.shape()[0]) {
    throw ShapeError("dense layer '" + this->name() + "': weights " +
                     shape_to_string(weights_.shape()) + " and bias " +
                     shape_to_string(bias_.shape()) + " are inconsistent");
  }
}

std::shared_ptr<Dense> Dense::random(std::string name, std::size_t in,
                                     std::size_t out, std::mt19937_64& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(in));
  Tensor w = uniform_tensor({out, in}, limit, rng);
  Tensor b = uniform_tensor({out}, limit, rng);
  return std::make_shared<Dense>(std::move(name), std::move(w), std::move(b));
}

Shape Dense::output_shape(const Shape& input) const {
  if (shape_size(input) != in_features()) {
    throw ShapeError("dense layer '" + name() + "' expects " +
                     std::to_string(in_features()) + " inputs, got shape " +
                     shape_to_string(input));
  }
  return {out_features()};
}

Tensor Dense::compute(const Tensor& in) const {
  const std::size_t n_in = in_features();
  const std::size_t n_out = out_features();
  require_input_size(*this, in, n_in);
  Tensor out({n_out});
  const double* w = weights_.data().data();
  const double* x = in.data().data();
  for (std::size_t o = 0; o < n_out; ++o) {
    double s = bias_[o];
    const double* row = w + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) s += row[i] * x[i];
    out[o] = s;
  }
  return out;
}

Tensor Dense::vjp(const Tensor& in, const Tensor& /*out*/,
                  const Tensor& grad_out, ParamGrads* param_grads) const {
  const std::size_t n_in = in_features();
  const std::size_t n_out = out_features();
  Tensor grad_in(in.shape());
  const double* w = weights_.data().data();
  for (std::size_t o = 0; o < n_out; ++o) {
    const double g = grad_out[o];
    if (g == 0.0) continue;
    const double* row = w + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) grad_in[i] += row[i] * g;
  }
  accumulate(param_grads, 0, weights_, [&](Tensor& dw) {
    for (std::size_t o = 0; o < n_out; ++o) {
      const double g = grad_out[o];
      double* row = dw.data().data() + o * n_in;
      for (std::size_t i = 0; i < n_in; ++i) row[i] += g * in[i];
    }
  });
  accumulate(param_grads, 1, bias_, [&](Tensor& db) {
    for (std::size_t o = 0; o < n_out; ++o) db[o] += grad_out[o];
  });
  return grad_in;
}

std::vector<const Tensor*> Dense::parameters() const {
  return {&weights_, &bias_};
}

std::vector<Tensor*> Dense::mutable_parameters() {
  return {&weights_, &bias_};
}

std::shared_ptr<Layer> Dense::clone() const {
  return std::make_shared<Dense>(*this);
}

void Dense::write_json(json& j) const {
  j["hyper"] = {{"in", in_features()}, {"out", out_features()}};
  j["weights"] = weights_.values();
  j["bias"] = bias_.values();
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(std::string name, Tensor kernel, Tensor bias)
    : Layer(std::move(name)), kernel_(std::move(kernel)), bias_(std::move(bias)) {
  const Shape& k = kernel_.shape();
  if (k.size() != 4 || bias_.shape().size() != 1 || bias_.size() != k[0]) {
    throw ShapeError("conv2d layer '" + this->name() + "': kernel " +
                     shape_to_string(k) + " and bias " +
                     shape_to_string(bias_.shape()) + " are inconsistent");
  }
  if (k[0] == 0 || k[1] == 0 || k[2] == 0 || k[3] == 0) {
    throw ShapeError("conv2d layer '" + this->name() +
                     "': kernel dimensions must be positive");
  }
}

std::shared_ptr<Conv2d> Conv2d::random(std::string name,
                                       std::size_t in_channels,
                                       std::size_t out_channels,
                                       std::size_t kh, std::size_t kw,
                                       std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(in_channels * kh * kw);
  const double limit = 1.0 / std::sqrt(fan_in);
  Tensor k = uniform_tensor({out_channels, in_channels, kh, kw}, limit, rng);
  Tensor b = uniform_tensor({out_channels}, limit, rng);
  return std::make_shared<Conv2d>(std::move(name), std::move(k), std::move(b));
}

Shape Conv2d::output_shape(const Shape& input) const {
  const Shape& k = kernel_.shape();
  if (input.size() != 3 || input[0] != k[1] || input[1] < k[2] ||
      input[2] < k[3]) {
    throw ShapeError("conv2d layer '" + name() + "' with kernel " +
                     shape_to_string(k) + " cannot take input " +
                     shape_to_string(input));
  }
  return {k[0], input[1] - k[2] + 1, input[2] - k[3] + 1};
}

Tensor Conv2d::compute(const Tensor& in) const {
  const Shape out_shape = output_shape(in.shape());
  const Shape& k = kernel_.shape();
  const std::size_t oc = k[0], ic = k[1], kh = k[2], kw = k[3];
  const std::size_t h = in.shape()[1], w = in.shape()[2];
  const std::size_t oh = out_shape[1], ow = out_shape[2];
  Tensor out(out_shape);
  const double* x = in.data().data();
  const double* kern = kernel_.data().data();
  double* y = out.data().data();
  for (std::size_t o = 0; o < oc; ++o) {
    double* yo = y + o * oh * ow;
    std::fill(yo, yo + oh * ow, bias_[o]);
    for (std::size_t c = 0; c < ic; ++c) {
      const double* xc = x + c * h * w;
      for (std::size_t ky = 0; ky < kh; ++ky) {
        for (std::size_t kx = 0; kx < kw; ++kx) {
          const double wt = kern[((o * ic + c) * kh + ky) * kw + kx];
          for (std::size_t r = 0; r < oh; ++r) {
            const double* src = xc + (r + ky) * w + kx;
            double* dst = yo + r * ow;
            for (std::size_t col = 0; col < ow; ++col) dst[col] += wt * src[col];
          }
        }
      }
    }
  }
  return out;
}

Tensor Conv2d::vjp(const Tensor& in, const Tensor& /*out*/,
                   const Tensor& grad_out, ParamGrads* param_grads) const {
  const Shape& k = kernel_.shape();
  const std::size_t oc = k[0], ic = k[1], kh = k[2], kw = k[3];
  const std::size_t h = in.shape()[1], w = in.shape()[2];
  const std::size_t oh = h - kh + 1, ow = w - kw + 1;
  Tensor grad_in(in.shape());
  const double* x = in.data().data();
  const double* g = grad_out.data().data();
  const double* kern = kernel_.data().data();
  double* gx = grad_in.data().data();
  for (std::size_t o = 0; o < oc; ++o) {
    const double* go = g + o * oh * ow;
    for (std::size_t c = 0; c < ic; ++c) {
      double* gxc = gx + c * h * w;
      for (std::size_t ky = 0; ky < kh; ++ky) {
        for (std::size_t kx = 0; kx < kw; ++kx) {
          const double wt = kern[((o * ic + c) * kh + ky) * kw + kx];
          for (std::size_t r = 0; r < oh; ++r) {
            double* dst = gxc + (r + ky) * w + kx;
            const double* src = go + r * ow;
            for (std::size_t col = 0; col < ow; ++col) dst[col] += wt * src[col];
          }
        }
      }
    }
  }
  accumulate(param_grads, 0, kernel_, [&](Tensor& dk) {
    double* d = dk.data().data();
    for (std::size_t o = 0; o < oc; ++o) {
      const double* go = g + o * oh * ow;
      for (std::size_t c = 0; c < ic; ++c) {
        const double* xc = x + c * h * w;
        for (std::size_t ky = 0; ky < kh; ++ky) {
          for (std::size_t kx = 0; kx < kw; ++kx) {
            double s = 0.0;
            for (std::size_t r = 0; r < oh; ++r) {
              const double* src = xc + (r + ky) * w + kx;
              const double* gr = go + r * ow;
              for (std::size_t col = 0; col < ow; ++col) s += gr[col] * src[col];
            }
            d[((o * ic + c) * kh + ky) * kw + kx] += s;
          }
        }
      }
    }
  });
  accumulate(param_grads, 1, bias_, [&](Tensor& db) {
    for (std::size_t o = 0; o < oc; ++o) {
      const double* go = g + o * oh * ow;
      double s = 0.0;
      for (std::size_t i = 0; i < oh * ow; ++i) s += go[i];
      db[o] += s;
    }
  });
  return grad_in;
}

std::vector<const Tensor*> Conv2d::parameters() const {
  return {&kernel_, &bias_};
}

std::vector<Tensor*> Conv2d::mutable_parameters() {
  return {&kernel_, &bias_};
}

std::shared_ptr<Layer> Conv2d::clone() const {
  return std::make_shared<Conv2d>(*this);
}

void Conv2d::write_json(json& j) const {
  const Shape& k = kernel_.shape();
  j["hyper"] = {{"in_channels", k[1]},
                {"out_channels", k[0]},
                {"kernel", {k[2], k[3]}}};
  j["weights"] = kernel_.values();
  j["bias"] = bias_.values();
}

// ---------------------------------------------------------------- MaxPool2d

MaxPool2d::MaxPool2d(std::string name, std::size_t pool_h, std::size_t pool_w)
    : Layer(std::move(name)), pool_h_(pool_h), pool_w_(pool_w) {
  if (pool_h_ == 0 || pool_w_ == 0) {
    throw ShapeError("maxpool2d layer '" + this->name() +
                     "': pool dimensions must be positive");
  }
}

Shape MaxPool2d::output_shape(const Shape& input) const {
  if (input.size() != 3 || input[1] < pool_h_ || input[2] < pool_w_) {
    throw ShapeError("maxpool2d layer '" + name() + "' cannot take input " +
                     shape_to_string(input));
  }
  return {input[0], input[1] / pool_h_, input[2] / pool_w_};
}

Tensor MaxPool2d::compute(const Tensor& in) const {
  const Shape out_shape = output_shape(in.shape());
  const std::size_t h = in.shape()[1], w = in.shape()[2];
  const std::size_t oh = out_shape[1], ow = out_shape[2];
  Tensor out(out_shape);
  for (std::size_t c = 0; c < out_shape[0]; ++c) {
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t col = 0; col < ow; ++col) {
        double best = in[(c * h + r * pool_h_) * w + col * pool_w_];
        for (std::size_t py = 0; py < pool_h_; ++py) {
          for (std::size_t px = 0; px < pool_w_; ++px) {
            best = std::max(
                best, in[(c * h + r * pool_h_ + py) * w + col * pool_w_ + px]);
          }
        }
        out[(c * oh + r) * ow + col] = best;
      }
    }
  }
  return out;
}

Tensor MaxPool2d::vjp(const Tensor& in, const Tensor& /*out*/,
                      const Tensor& grad_out, ParamGrads* /*param_grads*/) const {
  const Shape out_shape = output_shape(in.shape());
  const std::size_t h = in.shape()[1], w = in.shape()[2];
  const std::size_t oh = out_shape[1], ow = out_shape[2];
  Tensor grad_in(in.shape());
  for (std::size_t c = 0; c < out_shape[0]; ++c) {
    for (std::size_t r = 0; r < oh; ++r) {
      for (std::size_t col = 0; col < ow; ++col) {
        std::size_t arg = (c * h + r * pool_h_) * w + col * pool_w_;
        for (std::size_t py = 0; py < pool_h_; ++py) {
          for (std::size_t px = 0; px < pool_w_; ++px) {
            const std::size_t idx =
                (c * h + r * pool_h_ + py) * w + col * pool_w_ + px;
            // Strict comparison keeps the first maximal element.
            if (in[idx] > in[arg]) arg = idx;
          }
        }
        grad_in[arg] += grad_out[(c * oh + r) * ow + col];
      }
    }
  }
  return grad_in;
}

std::shared_ptr<Layer> MaxPool2d::clone() const {
  return std::make_shared<MaxPool2d>(*this);
}

void MaxPool2d::write_json(json& j) const {
  j["hyper"] = {{"pool", {pool_h_, pool_w_}}};
}

// ---------------------------------------------------------------- Activation

Activation::Activation(std::string name, ActivationKind kind, double slope)
    : Layer(std::move(name)), activation_(kind), slope_(slope) {}

std::string Activation::kind() const {
  switch (activation_) {
    case ActivationKind::kTanh:
      return "tanh";
    case ActivationKind::kRelu:
      return "relu";
    case ActivationKind::kLeakyRelu:
      return "leaky-relu";
  }
  return "tanh";
}

Tensor Activation::compute(const Tensor& in) const {
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double z = in[i];
    switch (activation_) {
      case ActivationKind::kTanh:
        out[i] = std::tanh(z);
        break;
      case ActivationKind::kRelu:
        out[i] = z >= 0.0 ? z : 0.0;
        break;
      case ActivationKind::kLeakyRelu:
        out[i] = z >= 0.0 ? z : slope_ * z;
        break;
    }
  }
  return out;
}

Tensor Activation::vjp(const Tensor& in, const Tensor& out,
                       const Tensor& grad_out, ParamGrads* /*param_grads*/) const {
  Tensor grad_in(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) {
    double d = 1.0;
    switch (activation_) {
      case ActivationKind::kTanh:
        d = 1.0 - out[i] * out[i];
        break;
      case ActivationKind::kRelu:
        d = in[i] >= 0.0 ? 1.0 : 0.0;
        break;
      case ActivationKind::kLeakyRelu:
        d = in[i] >= 0.0 ? 1.0 : slope_;
        break;
    }
    grad_in[i] = d * grad_out[i];
  }
  return grad_in;
}

std::shared_ptr<Layer> Activation::clone() const {
  return std::make_shared<Activation>(*this);
}

void Activation::write_json(json& j) const {
  if (activation_ == ActivationKind::kLeakyRelu) j["hyper"] = {{"slope", slope_}};
}

// ---------------------------------------------------------------- Softmax

Shape Softmax::output_shape(const Shape& input) const {
  return {shape_size(input)};
}

Tensor Softmax::compute(const Tensor& in) const {
  Tensor out({in.size()});
  double m = in[0];
  for (double v : in.data()) m = std::max(m, v);
  double z = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - m);
    z += out[i];
  }
  for (double& v : out.data()) v /= z;
  return out;
}

Tensor Softmax::vjp(const Tensor& in, const Tensor& out, const Tensor& grad_out,
                    ParamGrads* /*param_grads*/) const {
  const double s = dot(out, grad_out);
  Tensor grad_in(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) {
    grad_in[i] = out[i] * (grad_out[i] - s);
  }
  return grad_in;
}

std::shared_ptr<Layer> Softmax::clone() const {
  return std::make_shared<Softmax>(*this);
}

void Softmax::write_json(json& /*j*/) const {}

// ---------------------------------------------------------------- Product

Product::Product(std::string name, std::vector<std::vector<std::size_t>> factors)
    : Layer(std::move(name)), factors_(std::move(factors)) {
  if (factors_.empty()) {
    throw ShapeError("product layer '" + this->name() + "' has no outputs");
  }
}

Shape Product::output_shape(const Shape& input) const {
  const std::size_t n = shape_size(input);
  for (const auto& group : factors_) {
    for (std::size_t i : group) {
      if (i >= n) {
        throw ShapeError("product layer '" + name() + "' references input " +
                         std::to_string(i) + " of " + std::to_string(n));
      }
    }
  }
  return {factors_.size()};
}

Tensor Product::compute(const Tensor& in) const {
  Tensor out({factors_.size()});
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    double p = 1.0;
    for (std::size_t i : factors_[k]) p *= in[i];
    out[k] = p;
  }
  return out;
}

Tensor Product::vjp(const Tensor& in, const Tensor& /*out*/,
                    const Tensor& grad_out, ParamGrads* /*param_grads*/) const {
  Tensor grad_in(in.shape());
  for (std::size_t k = 0; k < factors_.size(); ++k) {
    const auto& group = factors_[k];
    for (std::size_t p = 0; p < group.size(); ++p) {
      double others = 1.0;
      for (std::size_t q = 0; q < group.size(); ++q) {
        if (q != p) others *= in[group[q]];
      }
      grad_in[group[p]] += grad_out[k] * others;
    }
  }
  return grad_in;
}

std::shared_ptr<Layer> Product::clone() const {
  return std::make_shared<Product>(*this);
}

void Product::write_json(json& j) const { j["hyper"] = {{"factors", factors_}}; }

// ---------------------------------------------------------------- Affine

Affine::Affine(std::string name, Tensor scale, Tensor shift)
    : Layer(std::move(name)), scale_(std::move(scale)), shift_(std::move(shift)) {
  require_same_shape(scale_, shift_, "affine layer '" + this->name() + "'");
}

Shape Affine::output_shape(const Shape& input) const {
  if (shape_size(input) != scale_.size()) {
    throw ShapeError("affine layer '" + name() + "' expects " +
                     std::to_string(scale_.size()) + " inputs, got shape " +
                     shape_to_string(input));
  }
  return input;
}

Tensor Affine::compute(const Tensor& in) const {
  require_input_size(*this, in, scale_.size());
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = scale_[i] * in[i] + shift_[i];
  }
  return out;
}

Tensor Affine::vjp(const Tensor& in, const Tensor& /*out*/,
                   const Tensor& grad_out, ParamGrads* /*param_grads*/) const {
  Tensor grad_in(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) {
    grad_in[i] = scale_[i] * grad_out[i];
  }
  return grad_in;
}

std::shared_ptr<Layer> Affine::clone() const {
  return std::make_shared<Affine>(*this);
}

void Affine::write_json(json& j) const {
  j["hyper"] = {{"shape", scale_.shape()}};
  j["weights"] = scale_.values();
  j["bias"] = shift_.values();
}

// ---------------------------------------------------------------- Reshape

Reshape::Reshape(std::string name, Shape shape)
    : Layer(std::move(name)), shape_(std::move(shape)) {}

Shape Reshape::output_shape(const Shape& input) const {
  if (shape_size(input) != shape_size(shape_)) {
    throw ShapeError("reshape layer '" + name() + "' cannot map " +
                     shape_to_string(input) + " to " + shape_to_string(shape_));
  }
  return shape_;
}

Tensor Reshape::compute(const Tensor& in) const {
  return in.reshaped(output_shape(in.shape()));
}

Tensor Reshape::vjp(const Tensor& in, const Tensor& /*out*/,
                    const Tensor& grad_out, ParamGrads* /*param_grads*/) const {
  return grad_out.reshaped(in.shape());
}

std::shared_ptr<Layer> Reshape::clone() const {
  return std::make_shared<Reshape>(*this);
}

void Reshape::write_json(json& j) const { j["hyper"] = {{"shape", shape_}}; }

// ---------------------------------------------------------------- Parallel

Parallel::Parallel(std::string name, std::vector<Network> branches)
    : Layer(std::move(name)),
      branches_(std::make_shared<const std::vector<Network>>(std::move(branches))) {
  if (branches_->empty()) {
    throw ShapeError("parallel layer '" + this->name() + "' has no branches");
  }
}

Parallel::~Parallel() = default;

Shape Parallel::output_shape(const Shape& input) const {
  std::size_t total = 0;
  for (const Network& b : *branches_) {
    if (b.input_shape() != input) {
      throw ShapeError("parallel layer '" + name() + "': branch expects " +
                       shape_to_string(b.input_shape()) + ", got " +
                       shape_to_string(input));
    }
    total += b.output_size();
  }
  return {total};
}

Tensor Parallel::compute(const Tensor& in) const {
  Tensor out(output_shape(in.shape()));
  std::size_t offset = 0;
  for (const Network& b : *branches_) {
    const Tensor y = b.forward(in);
    std::copy(y.data().begin(), y.data().end(), out.data().begin() + offset);
    offset += y.size();
  }
  return out;
}

Tensor Parallel::vjp(const Tensor& in, const Tensor& /*out*/,
                     const Tensor& grad_out, ParamGrads* /*param_grads*/) const {
  Tensor grad_in(in.shape());
  std::size_t offset = 0;
  for (const Network& b : *branches_) {
    const std::size_t n = b.output_size();
    std::vector<double> slice(grad_out.data().begin() + offset,
                              grad_out.data().begin() + offset + n);
    offset += n;
    const Tensor g = b.vjp(in, Tensor(b.output_shape(), std::move(slice)));
    for (std::size_t i = 0; i < g.size(); ++i) grad_in[i] += g[i];
  }
  return grad_in;
}

std::shared_ptr<Layer> Parallel::clone() const {
  return std::make_shared<Parallel>(*this);
}

void Parallel::write_json(json& j) const {
  json branches = json::array();
  for (const Network& b : *branches_) branches.push_back(b.to_json());
  j["hyper"] = {{"branches", branches}};
}

// ---------------------------------------------------------------- factory

LayerPtr layer_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) {
    throw FormatError("layer entry without 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  const std::string name = j.value("name", kind);
  const json hyper = j.value("hyper", json::object());
  std::shared_ptr<Layer> layer;
  try {
    if (kind == "dense") {
      const auto in = hyper.at("in").get<std::size_t>();
      const auto out = hyper.at("out").get<std::size_t>();
      layer = std::make_shared<Dense>(name, json_tensor(j, name, "weights", {out, in}),
                                      json_tensor(j, name, "bias", {out}));
    } else if (kind == "conv2d") {
      const auto ic = hyper.at("in_channels").get<std::size_t>();
      const auto oc = hyper.at("out_channels").get<std::size_t>();
      const auto k = hyper.at("kernel").get<std::vector<std::size_t>>();
      if (k.size() != 2) throw FormatError("layer '" + name + "': kernel needs 2 dims");
      layer = std::make_shared<Conv2d>(
          name, json_tensor(j, name, "weights", {oc, ic, k[0], k[1]}),
          json_tensor(j, name, "bias", {oc}));
    } else if (kind == "maxpool2d") {
      const auto p = hyper.at("pool").get<std::vector<std::size_t>>();
      if (p.size() != 2) throw FormatError("layer '" + name + "': pool needs 2 dims");
      layer = std::make_shared<MaxPool2d>(name, p[0], p[1]);
    } else if (kind == "tanh") {
      layer = std::make_shared<Activation>(name, ActivationKind::kTanh);
    } else if (kind == "relu") {
      layer = std::make_shared<Activation>(name, ActivationKind::kRelu);
    } else if (kind == "leaky-relu") {
      layer = std::make_shared<Activation>(name, ActivationKind::kLeakyRelu,
                                           hyper.value("slope", 0.01));
    } else if (kind == "softmax") {
      layer = std::make_shared<Softmax>(name);
    } else if (kind == "product") {
      layer = std::make_shared<Product>(
          name, hyper.at("factors").get<std::vector<std::vector<std::size_t>>>());
    } else if (kind == "affine") {
      const auto shape = hyper.at("shape").get<Shape>();
      layer = std::make_shared<Affine>(name, json_tensor(j, name, "weights", shape),
                                       json_tensor(j, name, "bias", shape));
    } else if (kind == "reshape") {
      layer = std::make_shared<Reshape>(name, hyper.at("shape").get<Shape>());
    } else if (kind == "parallel") {
      std::vector<Network> branches;
      for (const json& b : hyper.at("branches")) {
        branches.push_back(Network::from_json(b));
      }
      layer = std::make_shared<Parallel>(name, std::move(branches));
    } else {
      throw FormatError("layer '" + name + "': unknown kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw FormatError("layer '" + name + "': " + e.what());
  } catch (const ShapeError& e) {
    throw FormatError(std::string("layer '") + name + "': " + e.what());
  }
  if (j.contains("mask")) {
    const auto m = j.at("mask").get<std::vector<int>>();
    layer->set_mask(std::vector<std::uint8_t>(m.begin(), m.end()));
  }
  return layer;
}

}  // namespace axiomgrad

#include "axiomgrad/network.h"

#include <utility>

#include "axiomgrad/error.h"

namespace axiomgrad {

using nlohmann::json;

bool DomainBox::contains(const Tensor& x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] || x[i] > upper[i]) return false;
  }
  return true;
}

Network::Network(Shape input_shape, std::vector<LayerPtr> layers,
                 std::optional<DomainBox> box)
    : layers_(std::move(layers)), box_(std::move(box)) {
  shapes_.assign(1, std::move(input_shape));
  shapes_.reserve(layers_.size() + 1);
  for (const LayerPtr& layer : layers_) {
    if (!layer) throw ValueError("network contains a null layer");
    Shape out = layer->output_shape(shapes_.back());
    if (layer->has_mask() && layer->mask().size() != shape_size(out)) {
      throw ShapeError("layer '" + layer->name() + "': mask has " +
                       std::to_string(layer->mask().size()) +
                       " entries, output has " +
                       std::to_string(shape_size(out)));
    }
    shapes_.push_back(std::move(out));
  }
  if (box_) {
    const std::size_t n = shape_size(shapes_.front());
    if (box_->lower.size() != n || box_->upper.size() != n) {
      throw ShapeError("domain box does not match input shape " +
                       shape_to_string(shapes_.front()));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(box_->lower[i] <= box_->upper[i])) {
        throw ValueError("domain box has lower > upper at index " +
                         std::to_string(i));
      }
    }
  }
}

bool Network::in_domain(const Tensor& x) const {
  return !box_ || box_->contains(x);
}

std::optional<std::size_t> Network::find_layer(std::string_view name) const {
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (layers_[k]->name() == name) return k;
  }
  return std::nullopt;
}

namespace {

Shape without_unit_dims(const Shape& shape) {
  Shape out;
  for (std::size_t d : shape) {
    if (d != 1) out.push_back(d);
  }
  return out;
}

void check_input(const Network& net, const Tensor& x) {
  if (x.shape() != net.input_shape()) {
    // A flat vector of the right length is accepted for any input shape, and
    // so is the input shape with unit dimensions added or dropped.
    const bool flat = x.shape().size() == 1 && x.size() == net.input_size();
    if (!flat && without_unit_dims(x.shape()) != without_unit_dims(net.input_shape())) {
      throw ShapeError("network expects input shape " +
                       shape_to_string(net.input_shape()) + ", got " +
                       shape_to_string(x.shape()));
    }
  }
  require_finite(x, "network input");
}

void apply_mask(const Layer& layer, Tensor& y) {
  const auto& mask = layer.mask();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) y[i] = 0.0;
  }
}

}  // namespace

Tensor Network::forward(const Tensor& x) const {
  check_input(*this, x);
  Tensor a = x.shape() == input_shape() ? x : x.reshaped(input_shape());
  for (const LayerPtr& layer : layers_) {
    a = layer->compute(a);
    if (layer->has_mask()) apply_mask(*layer, a);
  }
  return a;
}

Trace Network::trace(const Tensor& x) const {
  check_input(*this, x);
  Trace t;
  t.acts.reserve(layers_.size() + 1);
  t.raw.resize(layers_.size());
  t.acts.push_back(x.shape() == input_shape() ? x : x.reshaped(input_shape()));
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    Tensor y = layers_[k]->compute(t.acts.back());
    if (layers_[k]->has_mask()) {
      t.raw[k] = y;
      apply_mask(*layers_[k], y);
    }
    t.acts.push_back(std::move(y));
  }
  return t;
}

Tensor Network::backward(const Trace& trace, const Tensor& cotangent,
                         std::vector<ParamGrads>* param_grads) const {
  if (cotangent.size() != output_size()) {
    throw ShapeError("cotangent has " + std::to_string(cotangent.size()) +
                     " entries, network output has " +
                     std::to_string(output_size()));
  }
  if (param_grads != nullptr && param_grads->size() != layers_.size()) {
    param_grads->resize(layers_.size());
  }
  Tensor g = cotangent.reshaped(output_shape());
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Layer& layer = *layers_[k];
    const Tensor* out = &trace.acts[k + 1];
    if (layer.has_mask()) {
      apply_mask(layer, g);
      out = &trace.raw[k];
    }
    g = layer.vjp(trace.acts[k], *out, g,
                  param_grads ? &(*param_grads)[k] : nullptr);
  }
  return g;
}

Tensor Network::vjp(const Tensor& x, const Tensor& cotangent) const {
  Tensor g = backward(trace(x), cotangent);
  return x.shape() == g.shape() ? g : std::move(g).reshaped(x.shape());
}

Tensor Network::gradient(const Tensor& x, std::size_t output_index) const {
  if (output_index >= output_size()) {
    throw ValueError("output index " + std::to_string(output_index) +
                     " out of range for " + std::to_string(output_size()) +
                     " outputs");
  }
  Tensor seed(output_shape());
  seed[output_index] = 1.0;
  return vjp(x, seed);
}

Network Network::with_layer(std::size_t k, LayerPtr layer) const {
  std::vector<LayerPtr> layers = layers_;
  layers.at(k) = std::move(layer);
  return Network(input_shape(), std::move(layers), box_);
}

Network Network::with_domain_box(std::optional<DomainBox> box) const {
  return Network(input_shape(), layers_, std::move(box));
}

json Network::to_json() const {
  json j;
  j["input_shape"] = input_shape();
  if (box_) {
    j["domain_box"] = {{"a", box_->lower.values()}, {"b", box_->upper.values()}};
  }
  json layers = json::array();
  for (const LayerPtr& layer : layers_) layers.push_back(layer->to_json());
  j["layers"] = std::move(layers);
  return j;
}

Network Network::from_json(const json& j) {
  try {
    Shape input = j.at("input_shape").get<Shape>();
    std::optional<DomainBox> box;
    if (j.contains("domain_box")) {
      const json& b = j.at("domain_box");
      box = DomainBox{Tensor(input, b.at("a").get<std::vector<double>>()),
                      Tensor(input, b.at("b").get<std::vector<double>>())};
    }
    std::vector<LayerPtr> layers;
    for (const json& layer : j.at("layers")) {
      layers.push_back(layer_from_json(layer));
    }
    return Network(std::move(input), std::move(layers), std::move(box));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed network: ") + e.what());
  }
}

SplitNetwork split(const Network& net, std::string_view layer_name) {
  const auto k = net.find_layer(layer_name);
  if (!k) throw ValueError("unknown layer '" + std::string(layer_name) + "'");
  if (*k + 1 >= net.num_layers()) {
    throw ValueError("cannot split at layer '" + std::string(layer_name) +
                     "': it is the last layer");
  }
  const auto layers = net.layers();
  std::vector<LayerPtr> front(layers.begin(), layers.begin() + *k + 1);
  std::vector<LayerPtr> back(layers.begin() + *k + 1, layers.end());
  Network front_net(net.input_shape(), std::move(front), net.domain_box());
  Network back_net(front_net.output_shape(), std::move(back));
  return SplitNetwork{std::move(front_net), std::move(back_net),
                      std::string(layer_name)};
}

Tensor backprop_from_internal(const SplitNetwork& split, const Tensor& h,
                              std::size_t output_index) {
  if (h.size() != split.back.input_size()) {
    throw ShapeError("internal activation has " + std::to_string(h.size()) +
                     " entries, layer '" + split.layer_name + "' has " +
                     std::to_string(split.back.input_size()));
  }
  return split.back.gradient(h, output_index);
}

Network target_network(const Network& net, TargetMode mode) {
  if (mode == TargetMode::kConfidence || net.num_layers() == 0) return net;
  if (net.layer(net.num_layers() - 1).kind() != "softmax") return net;
  const auto layers = net.layers();
  return Network(net.input_shape(),
                 std::vector<LayerPtr>(layers.begin(), layers.end() - 1),
                 net.domain_box());
}

}  // namespace axiomgrad

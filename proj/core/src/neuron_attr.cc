#include "axiomgrad/neuron_attr.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "axiomgrad/error.h"

namespace axiomgrad {

using nlohmann::json;

PatchSpec::PatchSpec(std::vector<std::size_t> indices, std::size_t input_size)
    : indices_(std::move(indices)), input_size_(input_size) {
  std::sort(indices_.begin(), indices_.end());
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] >= input_size_) {
      throw ValueError("patch index " + std::to_string(indices_[k]) +
                       " out of range for " + std::to_string(input_size_) +
                       " inputs");
    }
    if (k > 0 && indices_[k] == indices_[k - 1]) {
      throw ValueError("patch index " + std::to_string(indices_[k]) +
                       " listed twice");
    }
  }
}

PatchSpec PatchSpec::from_box(const Shape& input_shape, const PixelBox& box) {
  if (input_shape.size() != 2 && input_shape.size() != 3) {
    throw ShapeError("pixel box needs an [H, W] or [C, H, W] input, got " +
                     shape_to_string(input_shape));
  }
  const std::size_t channels = input_shape.size() == 3 ? input_shape[0] : 1;
  const std::size_t height = input_shape[input_shape.size() - 2];
  const std::size_t width = input_shape.back();
  if (box.col0 > box.col1 || box.row0 > box.row1 || box.col1 >= width ||
      box.row1 >= height) {
    throw ValueError("pixel box cols " + std::to_string(box.col0) + ".." +
                     std::to_string(box.col1) + ", rows " +
                     std::to_string(box.row0) + ".." + std::to_string(box.row1) +
                     " does not fit a " + std::to_string(height) + "x" +
                     std::to_string(width) + " image");
  }
  std::vector<std::size_t> indices;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t r = box.row0; r <= box.row1; ++r) {
      for (std::size_t col = box.col0; col <= box.col1; ++col) {
        indices.push_back((c * height + r) * width + col);
      }
    }
  }
  return PatchSpec(std::move(indices), channels * height * width);
}

PatchSpec PatchSpec::all(std::size_t input_size) {
  std::vector<std::size_t> indices(input_size);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  return PatchSpec(std::move(indices), input_size);
}

bool PatchSpec::contains(std::size_t i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

PatchSpec PatchSpec::complement() const {
  std::vector<std::size_t> rest;
  rest.reserve(input_size_ - indices_.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < input_size_; ++i) {
    if (k < indices_.size() && indices_[k] == i) {
      ++k;
    } else {
      rest.push_back(i);
    }
  }
  return PatchSpec(std::move(rest), input_size_);
}

json NeuronAttribution::sidecar() const {
  json j = {{"layer", layer_name}, {"N", steps}, {"method", method}};
  switch (kind) {
    case NeuronAttrKind::kPerInput:
      j["kind"] = "per_input";
      j["input_index"] = input_index;
      j["patch_indices"] = json::array();
      break;
    case NeuronAttrKind::kConductance:
      j["kind"] = "conductance";
      j["patch_indices"] = json::array();
      break;
    case NeuronAttrKind::kPatch:
      j["kind"] = "patch";
      j["patch_indices"] = patch_indices;
      break;
  }
  return j;
}

namespace {

struct Setup {
  const Network& front;
  Network back;
  std::size_t target;
  Tensor x_prime;
  Tensor delta;
};

Setup prepare(const SplitNetwork& split, const Tensor& x, const Tensor& x_prime,
              Target target, int steps) {
  if (steps < 1) throw ValueError("steps must be at least 1");
  require_same_shape(x, x_prime, "input and baseline");
  if (x.size() != split.front.input_size()) {
    throw ShapeError("input has " + std::to_string(x.size()) +
                     " entries, network expects " +
                     std::to_string(split.front.input_size()));
  }
  require_finite(x, "input");
  require_finite(x_prime, "baseline");
  Network back = target_network(split.back, target.mode);
  if (target.index >= back.output_size()) {
    throw ValueError("target " + std::to_string(target.index) +
                     " out of range for " + std::to_string(back.output_size()) +
                     " outputs");
  }
  return Setup{split.front, std::move(back), target.index, x_prime,
               x - x_prime};
}

Tensor point_at(const Setup& s, double t) { return axpy(s.x_prime, t, s.delta); }

// integrand[j][i] = mean_k dG/dH_j(H(gamma(t_k))) * dH_j/dx_i(gamma(t_k)) at
// midpoints t_k, one backward pass through H per neuron and node. The sum over
// k runs in node order for every neuron, so the result is worker independent.
std::vector<Tensor> neuron_gradient_means(const Setup& s, int steps,
                                          Workers workers) {
  const std::size_t n = static_cast<std::size_t>(steps);
  std::vector<Trace> traces(n);
  std::vector<Tensor> g(n);
  parallel_for(n, workers, [&](std::size_t k) {
    const Tensor point = point_at(s, (static_cast<double>(k) + 0.5) / steps);
    traces[k] = s.front.trace(point);
    g[k] = s.back.gradient(traces[k].output(), s.target);
  });
  const std::size_t width = s.front.output_size();
  std::vector<Tensor> means(width);
  parallel_for(width, workers, [&](std::size_t j) {
    Tensor seed(Shape{width});
    seed[j] = 1.0;
    Tensor acc(Shape{s.delta.size()});
    for (std::size_t k = 0; k < n; ++k) {
      if (g[k][j] == 0.0) continue;
      const Tensor row = s.front.backward(traces[k], seed);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[k][j] * row[i];
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] /= steps;
    means[j] = std::move(acc);
  });
  return means;
}

Tensor contract_patch(const std::vector<Tensor>& means, const Tensor& delta,
                      const std::vector<std::size_t>& indices) {
  Tensor out(Shape{means.size()});
  for (std::size_t j = 0; j < means.size(); ++j) {
    double acc = 0.0;
    for (std::size_t i : indices) acc += delta[i] * means[j][i];
    out[j] = acc;
  }
  return out;
}

NeuronAttribution make_attr(const SplitNetwork& split, Tensor values,
                            NeuronAttrKind kind, int steps, std::string method) {
  NeuronAttribution a;
  a.layer_name = split.layer_name;
  a.values = std::move(values);
  a.kind = kind;
  a.steps = steps;
  a.method = std::move(method);
  return a;
}

}  // namespace

Tensor flow_matrix(const SplitNetwork& split, const Tensor& x,
                   const Tensor& x_prime, Target target, int steps,
                   Workers workers) {
  const Setup s = prepare(split, x, x_prime, target, steps);
  const std::vector<Tensor> means = neuron_gradient_means(s, steps, workers);
  const std::size_t n_in = x.size();
  const std::size_t width = means.size();
  Tensor out(Shape{n_in, width});
  for (std::size_t i = 0; i < n_in; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      out[i * width + j] = s.delta[i] * means[j][i];
    }
  }
  return out;
}

NeuronAttribution flow_ij(const SplitNetwork& split, const Tensor& x,
                          const Tensor& x_prime, Target target, std::size_t i,
                          int steps, Workers workers) {
  if (i >= x.size()) {
    throw ValueError("input index " + std::to_string(i) + " out of range for " +
                     std::to_string(x.size()) + " inputs");
  }
  const Setup s = prepare(split, x, x_prime, target, steps);
  Tensor values(Shape{s.front.output_size()});
  if (s.delta[i] != 0.0) {
    const std::vector<Tensor> means = neuron_gradient_means(s, steps, workers);
    for (std::size_t j = 0; j < means.size(); ++j) {
      values[j] = s.delta[i] * means[j][i];
    }
  }
  NeuronAttribution a =
      make_attr(split, std::move(values), NeuronAttrKind::kPerInput, steps, "exact");
  a.input_index = i;
  return a;
}

NeuronAttribution conductance(const SplitNetwork& split, const Tensor& x,
                              const Tensor& x_prime, Target target, int steps,
                              Workers workers, ConductanceMethod method) {
  const Setup s = prepare(split, x, x_prime, target, steps);
  if (method == ConductanceMethod::kExact) {
    const std::vector<Tensor> means = neuron_gradient_means(s, steps, workers);
    return make_attr(split,
                     contract_patch(means, s.delta, PatchSpec::all(x.size()).indices()),
                     NeuronAttrKind::kConductance, steps, "exact");
  }
  // Knots t_k = k / steps bound each difference; G is differentiated at the
  // midpoint of every interval.
  const std::size_t n = static_cast<std::size_t>(steps);
  std::vector<Tensor> h(n + 1);
  parallel_for(n + 1, workers, [&](std::size_t k) {
    h[k] = k == 0 ? s.front.forward(x_prime)
           : k == n ? s.front.forward(x)
                    : s.front.forward(point_at(s, static_cast<double>(k) / steps));
  });
  std::vector<Tensor> parts(n);
  parallel_for(n, workers, [&](std::size_t k) {
    const Tensor mid =
        s.front.forward(point_at(s, (static_cast<double>(k) + 0.5) / steps));
    Tensor g = s.back.gradient(mid, s.target).reshaped(Shape{mid.size()});
    for (std::size_t j = 0; j < g.size(); ++j) g[j] *= h[k + 1][j] - h[k][j];
    parts[k] = std::move(g);
  });
  return make_attr(split, pairwise_sum(parts), NeuronAttrKind::kConductance,
                   steps, "path-difference");
}

NeuronAttribution patch_attr_exact(const SplitNetwork& split, const Tensor& x,
                                   const Tensor& x_prime, Target target,
                                   const PatchSpec& patch, int steps,
                                   Workers workers) {
  if (patch.empty()) throw ValueError("patch is empty");
  if (patch.input_size() != x.size()) {
    throw ShapeError("patch was built for " + std::to_string(patch.input_size()) +
                     " inputs, input has " + std::to_string(x.size()));
  }
  const Setup s = prepare(split, x, x_prime, target, steps);
  const std::vector<Tensor> means = neuron_gradient_means(s, steps, workers);
  NeuronAttribution a =
      make_attr(split, contract_patch(means, s.delta, patch.indices()),
                NeuronAttrKind::kPatch, steps, "exact");
  a.patch_indices = patch.indices();
  return a;
}

NeuronAttribution patch_attr_fast(const SplitNetwork& split, const Tensor& x,
                                  const Tensor& x_prime, Target target,
                                  const PatchSpec& patch, int steps,
                                  Workers workers) {
  if (patch.empty()) throw ValueError("patch is empty");
  if (patch.input_size() != x.size()) {
    throw ShapeError("patch was built for " + std::to_string(patch.input_size()) +
                     " inputs, input has " + std::to_string(x.size()));
  }
  const Setup s = prepare(split, x, x_prime, target, steps);
  Tensor d(x.shape());
  for (std::size_t i : patch.indices()) d[i] = s.delta[i];
  const double norm = norm2(d);
  NeuronAttribution a = make_attr(split, Tensor(Shape{s.front.output_size()}),
                                  NeuronAttrKind::kPatch, steps, "fast");
  a.patch_indices = patch.indices();
  if (norm == 0.0) return a;

  const Tensor nudge = (1.0 / (norm * steps)) * d;
  const std::size_t n = static_cast<std::size_t>(steps);
  std::vector<Tensor> parts(n);
  parallel_for(n, workers, [&](std::size_t k) {
    const Tensor point =
        k + 1 == n ? x : point_at(s, static_cast<double>(k + 1) / steps);
    const Tensor h = s.front.forward(point);
    const Tensor h_nudged = s.front.forward(point + nudge);
    Tensor g = s.back.gradient(h, s.target).reshaped(Shape{h.size()});
    for (std::size_t j = 0; j < g.size(); ++j) g[j] *= h_nudged[j] - h[j];
    parts[k] = std::move(g);
  });
  a.values = norm * pairwise_sum(parts);
  return a;
}

double patch_consistency_residual(const SplitNetwork& split, const Tensor& x,
                                  const Tensor& x_prime, Target target,
                                  const PatchSpec& patch, int steps,
                                  Workers workers) {
  const Tensor inside =
      patch_attr_fast(split, x, x_prime, target, patch, steps, workers).values;
  const PatchSpec rest = patch.complement();
  const Tensor outside =
      rest.empty() ? Tensor(inside.shape())
                   : patch_attr_fast(split, x, x_prime, target, rest, steps, workers)
                         .values;
  const Tensor total = conductance(split, x, x_prime, target, steps, workers).values;
  return max_abs_diff(inside + outside, total);
}

std::vector<std::size_t> rank_values(const Tensor& values, RankOrder order) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (order == RankOrder::kDescending) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return values[a] > values[b];
    });
  } else {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return values[a] < values[b];
    });
  }
  return idx;
}

std::vector<std::size_t> rank_neurons(const NeuronAttribution& attr,
                                      RankOrder order) {
  return rank_values(attr.values, order);
}

}  // namespace axiomgrad

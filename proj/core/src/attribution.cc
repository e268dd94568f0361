#include "axiomgrad/attribution.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "axiomgrad/error.h"

namespace axiomgrad {

using nlohmann::json;

namespace {

void require_steps(int steps) {
  if (steps < 1) throw ValueError("steps must be at least 1");
}

void require_target(const Network& scalar_net, Target target) {
  if (target.index >= scalar_net.output_size()) {
    throw ValueError("target " + std::to_string(target.index) +
                     " out of range for " +
                     std::to_string(scalar_net.output_size()) + " outputs");
  }
}

void require_in_domain(const Network& net, const Tensor& x, const char* what) {
  if (x.size() != net.input_size()) {
    throw ShapeError(std::string(what) + " has " + std::to_string(x.size()) +
                     " entries, network expects " +
                     std::to_string(net.input_size()));
  }
  require_finite(x, what);
  if (!net.in_domain(x)) {
    throw ValueError(std::string(what) + " lies outside the network domain box");
  }
}

std::string mode_name(TargetMode mode) {
  return mode == TargetMode::kLogit ? "logit" : "confidence";
}

}  // namespace

json AttributionMap::sidecar() const {
  json baseline;
  if (baseline_kind == BaselineKind::kPoint) {
    baseline = {{"kind", "point"},
                {"point", baselines.empty() ? std::vector<double>{}
                                            : baselines.front().values()}};
  } else {
    baseline = {{"kind", "distribution"}, {"samples", baselines.size()}};
  }
  return {{"method", method},
          {"steps", steps},
          {"target", target.index},
          {"target_mode", mode_name(target.mode)},
          {"completeness_gap", completeness_gap},
          {"baseline", baseline}};
}

double evaluate(const Network& net, const Tensor& x, Target target) {
  const Network scalar = target_network(net, target.mode);
  require_target(scalar, target);
  return scalar.forward(x)[target.index];
}

std::vector<int> allocate_nodes(const std::vector<double>& lengths, int steps) {
  require_steps(steps);
  const double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);
  std::vector<int> counts(lengths.size(), 0);
  if (total <= 0.0) return counts;
  std::vector<double> remainder(lengths.size(), 0.0);
  int assigned = 0;
  for (std::size_t s = 0; s < lengths.size(); ++s) {
    const double ideal = steps * lengths[s] / total;
    counts[s] = static_cast<int>(std::floor(ideal));
    remainder[s] = ideal - counts[s];
    assigned += counts[s];
  }
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t r = 0; assigned < steps && r < order.size(); ++r) {
    if (lengths[order[r]] > 0.0) {
      ++counts[order[r]];
      ++assigned;
    }
  }
  for (std::size_t s = 0; s < lengths.size(); ++s) {
    if (lengths[s] > 0.0 && counts[s] == 0) counts[s] = 1;
  }
  return counts;
}

AttributionMap path_attribute(const Network& net, const Path& path,
                              Target target, int steps, Workers workers) {
  require_steps(steps);
  const Network scalar = target_network(net, target.mode);
  require_target(scalar, target);
  for (const Tensor& w : path.waypoints()) require_in_domain(net, w, "path waypoint");

  struct Node {
    std::size_t segment;
    double s;
    int count;
  };
  std::vector<double> lengths(path.num_segments());
  for (std::size_t k = 0; k < lengths.size(); ++k) lengths[k] = path.segment(k).length;
  const std::vector<int> counts = allocate_nodes(lengths, steps);
  std::vector<Node> nodes;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (int m = 0; m < counts[k]; ++m) {
      nodes.push_back({k, (m + 0.5) / counts[k], counts[k]});
    }
  }

  AttributionMap map;
  map.input = path.input();
  map.baselines = {path.baseline()};
  map.target = target;
  map.steps = steps;
  map.method = "path";
  if (nodes.empty()) {
    map.values = Tensor(path.shape());
  } else {
    std::vector<Tensor> parts(nodes.size());
    parallel_for(nodes.size(), workers, [&](std::size_t n) {
      const Node& node = nodes[n];
      const Path::Segment seg = path.segment(node.segment);
      const Tensor delta = *seg.end - *seg.start;
      const Tensor point = axpy(*seg.start, node.s, delta);
      Tensor g = scalar.gradient(point, target.index);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= delta[i] / node.count;
      parts[n] = std::move(g).reshaped(path.shape());
    });
    map.values = pairwise_sum(parts);
  }
  map.completeness_gap = completeness_gap(map, net, map.input);
  return map;
}

AttributionMap integrated_gradients(const Network& net, const Tensor& x,
                                    const Tensor& x_prime, Target target,
                                    int steps, Workers workers) {
  require_steps(steps);
  require_same_shape(x, x_prime, "integrated_gradients endpoints");
  const Network scalar = target_network(net, target.mode);
  require_target(scalar, target);
  require_in_domain(net, x, "input");
  require_in_domain(net, x_prime, "baseline");

  const Tensor delta = x - x_prime;
  std::vector<Tensor> grads(static_cast<std::size_t>(steps));
  parallel_for(grads.size(), workers, [&](std::size_t k) {
    const double t = (static_cast<double>(k) + 0.5) / steps;
    grads[k] = scalar.gradient(axpy(x_prime, t, delta), target.index)
                   .reshaped(x.shape());
  });
  const Tensor total = pairwise_sum(grads);

  AttributionMap map;
  map.values = Tensor(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    map.values[i] = delta[i] * (total[i] / steps);
  }
  map.input = x;
  map.baselines = {x_prime};
  map.target = target;
  map.steps = steps;
  map.method = "integrated-gradients";
  map.completeness_gap = completeness_gap(map, net, x);
  return map;
}

AttributionMap ensemble_attribute(const Network& net, const EnsembleSpec& ensemble,
                                  Target target, int steps, Workers workers) {
  std::vector<Tensor> parts;
  parts.reserve(ensemble.members().size());
  for (const auto& member : ensemble.members()) {
    AttributionMap m = path_attribute(net, member.path, target, steps, workers);
    parts.push_back(member.weight * m.values);
  }
  const Path& first = ensemble.members().front().path;
  AttributionMap map;
  map.values = pairwise_sum(parts);
  map.input = first.input();
  map.baselines = {first.baseline()};
  map.target = target;
  map.steps = steps;
  map.method = "ensemble";
  map.completeness_gap = completeness_gap(map, net, map.input);
  return map;
}

AttributionMap distributional_ig(const Network& net, const Tensor& x,
                                 const BaselineDistribution& dist, Target target,
                                 int steps, Workers workers) {
  if (dist.samples.empty()) throw ValueError("baseline distribution is empty");
  std::vector<Tensor> parts;
  parts.reserve(dist.samples.size());
  for (const Tensor& sample : dist.samples) {
    parts.push_back(
        integrated_gradients(net, x, sample, target, steps, workers).values);
  }
  AttributionMap map;
  map.values = (1.0 / static_cast<double>(parts.size())) * pairwise_sum(parts);
  map.input = x;
  map.baselines = dist.samples;
  map.baseline_kind = BaselineKind::kDistribution;
  map.target = target;
  map.steps = steps;
  map.method = "distributional-ig";
  map.completeness_gap = completeness_gap(map, net, x);
  return map;
}

double completeness_gap(const AttributionMap& map, const Network& net,
                        const Tensor& x) {
  if (x.size() != map.input.size() || x.values() != map.input.values()) {
    throw ValueError("attribution map was computed for a different input");
  }
  if (map.baselines.empty()) throw ValueError("attribution map has no baseline");
  std::vector<double> baseline_values;
  baseline_values.reserve(map.baselines.size());
  for (const Tensor& b : map.baselines) {
    baseline_values.push_back(evaluate(net, b, map.target));
  }
  const double mean_baseline =
      pairwise_sum(baseline_values) / static_cast<double>(baseline_values.size());
  return std::abs(sum(map.values) - (evaluate(net, x, map.target) - mean_baseline));
}

}  // namespace axiomgrad

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axiomgrad/network.h"
#include "axiomgrad/parallel.h"
#include "axiomgrad/paths.h"
#include "axiomgrad/tensor.h"

namespace axiomgrad {

inline constexpr int kDefaultSteps = 300;

enum class BaselineKind { kPoint, kDistribution };

// Empirical baseline distribution with uniform weights.
struct BaselineDistribution {
  std::vector<Tensor> samples;
};

// Per-feature attribution together with what it was computed from.
struct AttributionMap {
  Tensor values;
  Tensor input;
  // The single baseline point, or every sample of a distribution.
  std::vector<Tensor> baselines;
  BaselineKind baseline_kind = BaselineKind::kPoint;
  Target target;
  int steps = 0;
  std::string method;
  double completeness_gap = 0.0;

  nlohmann::json sidecar() const;
};

// F_target(x) for the scalar an attribution explains.
double evaluate(const Network& net, const Tensor& x, Target target);

// Number of midpoint nodes per segment: proportional to segment length by the
// largest-remainder rule, at least one per segment of positive length, and
// none for zero-length segments.
std::vector<int> allocate_nodes(const std::vector<double>& lengths, int steps);

// A_i = integral of dF/dx_i(gamma) * gamma_i' dt, composite midpoint rule on
// each linear segment.
AttributionMap path_attribute(const Network& net, const Path& path,
                              Target target, int steps = kDefaultSteps,
                              Workers workers = {});

// IG_i = (x_i - x'_i) * mean_k dF/dx_i(x' + t_k (x - x')), t_k = (k + 1/2)/steps.
AttributionMap integrated_gradients(const Network& net, const Tensor& x,
                                    const Tensor& x_prime, Target target,
                                    int steps = kDefaultSteps,
                                    Workers workers = {});

// Weighted sum of the members' path attributions.
AttributionMap ensemble_attribute(const Network& net, const EnsembleSpec& ensemble,
                                  Target target, int steps = kDefaultSteps,
                                  Workers workers = {});

// Uniform average of integrated_gradients over the baseline samples.
AttributionMap distributional_ig(const Network& net, const Tensor& x,
                                 const BaselineDistribution& dist, Target target,
                                 int steps = kDefaultSteps, Workers workers = {});

// |sum_i A_i - (F(x) - mean F(baselines))|. Throws ValueError when the map
// was computed for a different input.
double completeness_gap(const AttributionMap& map, const Network& net,
                        const Tensor& x);

}  // namespace axiomgrad

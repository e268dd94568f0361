#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axiomgrad/dataset.h"
#include "axiomgrad/network.h"
#include "axiomgrad/neuron_attr.h"
#include "axiomgrad/parallel.h"
#include "axiomgrad/tensor.h"

namespace axiomgrad {

// Neurons of one layer whose outputs are forced to zero.
struct PruneMask {
  std::string layer_name;
  std::vector<std::uint8_t> zeroed;

  std::size_t count() const;
  // Zeroes the first `count` entries of `ranking`.
  static PruneMask top(std::string layer_name, std::size_t width,
                       const std::vector<std::size_t>& ranking, std::size_t count);
};

// Copy of `net` whose named layer outputs zero at masked positions on every
// pass. Masks accumulate, so applying the same mask twice equals once.
// Throws ValueError for an unknown layer, ShapeError for a width mismatch.
Network apply_mask(const Network& net, const PruneMask& mask);

// ceil(fraction * width), guarded against rounding just above an integer.
std::size_t pruned_count(double fraction, std::size_t width);

// {0, 0.05, 0.1, 0.2, ..., 0.9, 1.0}
std::vector<double> default_fractions();

std::vector<std::size_t> random_ranking(std::size_t width, std::uint64_t seed);

// Mean conductance over the samples with each sample's true label as target
// and the black (all-zero) baseline.
NeuronAttribution average_conductance(const SplitNetwork& split,
                                      const LabeledDataset& data, int steps,
                                      Workers workers = {},
                                      TargetMode mode = TargetMode::kConfidence);

struct SweepPoint {
  double fraction = 0.0;
  std::size_t pruned = 0;
  std::optional<double> test_accuracy;
  std::optional<double> class_accuracy;
  std::optional<double> ig_inside;
  std::optional<double> ig_outside;
  std::optional<double> ig_all;
};

struct SweepResult {
  std::string layer;
  std::string ranking_name;
  std::vector<std::size_t> ranking;
  int steps = 0;
  std::vector<SweepPoint> points;

  // fraction,pruned then one column per metric present in the first point.
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

struct SweepEval {
  const LabeledDataset* test = nullptr;  // accuracy over this set when set
  std::optional<int> class_label;        // also accuracy restricted to a class
};

// For each fraction, masks the top ceil(fraction * width) neurons of
// `ranking` and records the requested metrics. Fractions must be strictly
// increasing in [0, 1].
SweepResult prune_sweep(const Network& net, const std::string& layer,
                        const std::vector<std::size_t>& ranking,
                        const std::vector<double>& fractions,
                        const SweepEval& eval, std::string ranking_name,
                        Workers workers = {});

struct RegionSums {
  double inside = 0.0;
  double outside = 0.0;
  double all = 0.0;  // inside + outside
};

// Straight-line IG summed over the patch and over its complement.
RegionSums region_ig_sums(const Network& net, const Tensor& x,
                          const Tensor& x_prime, Target target,
                          const PatchSpec& box, int steps, Workers workers = {});

struct PatchExperiment {
  SweepResult patch_arm;
  SweepResult conductance_arm;
};

// Ranks the layer's neurons by fast patch attribution over `box` (mean over
// the images, each targeting its label, black baseline), prunes in descending
// order and tracks the mean inside/outside/all IG sums at each fraction. The
// conductance arm ranks by mean conductance instead. `steps` drives IG and
// conductance, `patch_steps` the fast patch attribution.
PatchExperiment patch_rank_prune_experiment(const Network& net,
                                            const std::string& layer,
                                            const LabeledDataset& images,
                                            const PatchSpec& box,
                                            const std::vector<double>& fractions,
                                            int steps, int patch_steps,
                                            Workers workers = {},
                                            TargetMode mode = TargetMode::kConfidence);

}  // namespace axiomgrad

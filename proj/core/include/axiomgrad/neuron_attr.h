#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axiomgrad/attribution.h"
#include "axiomgrad/network.h"
#include "axiomgrad/parallel.h"
#include "axiomgrad/tensor.h"

namespace axiomgrad {

// Inclusive pixel rectangle: columns col0..col1, rows row0..row1.
struct PixelBox {
  std::size_t col0 = 0;
  std::size_t row0 = 0;
  std::size_t col1 = 0;
  std::size_t row1 = 0;

  bool contains(std::size_t row, std::size_t col) const {
    return row >= row0 && row <= row1 && col >= col0 && col <= col1;
  }
};

// A set of input-feature indices, kept sorted and duplicate free.
class PatchSpec {
 public:
  PatchSpec() = default;
  // Sorts `indices`; throws ValueError on duplicates or indices >= input_size.
  PatchSpec(std::vector<std::size_t> indices, std::size_t input_size);

  // Every feature whose pixel lies in `box`, over all channels of an input of
  // shape [H, W] or [C, H, W].
  static PatchSpec from_box(const Shape& input_shape, const PixelBox& box);
  static PatchSpec all(std::size_t input_size);

  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t input_size() const { return input_size_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(std::size_t i) const;

  PatchSpec complement() const;

 private:
  std::vector<std::size_t> indices_;
  std::size_t input_size_ = 0;
};

enum class NeuronAttrKind { kPerInput, kConductance, kPatch };

enum class ConductanceMethod {
  // Forward differences of H along the path, gradient of G at midpoints.
  kPathDifference,
  // Per-neuron input gradients of H contracted with x - x' at midpoints. Uses
  // the same nodes as the flow and exact patch attributions.
  kExact,
};

// Values over the neurons of the split layer.
struct NeuronAttribution {
  std::string layer_name;
  Tensor values;
  NeuronAttrKind kind = NeuronAttrKind::kConductance;
  std::size_t input_index = 0;            // kPerInput only
  std::vector<std::size_t> patch_indices;  // kPatch only
  int steps = 0;
  std::string method;

  nlohmann::json sidecar() const;
};

// Flow through each neuron j for input feature i along the straight line:
// (x_i - x'_i) * mean_k dG/dH_j(H(gamma(t_k))) * dH_j/dx_i(gamma(t_k)).
NeuronAttribution flow_ij(const SplitNetwork& split, const Tensor& x,
                          const Tensor& x_prime, Target target, std::size_t i,
                          int steps = kDefaultSteps, Workers workers = {});

// All flows at once as a [input_size, width] tensor.
Tensor flow_matrix(const SplitNetwork& split, const Tensor& x,
                   const Tensor& x_prime, Target target,
                   int steps = kDefaultSteps, Workers workers = {});

NeuronAttribution conductance(
    const SplitNetwork& split, const Tensor& x, const Tensor& x_prime,
    Target target, int steps = kDefaultSteps, Workers workers = {},
    ConductanceMethod method = ConductanceMethod::kPathDifference);

// Flow through each neuron restricted to the features in `patch`, from the
// per-neuron input gradients of H (one backward pass per neuron and node).
NeuronAttribution patch_attr_exact(const SplitNetwork& split, const Tensor& x,
                                   const Tensor& x_prime, Target target,
                                   const PatchSpec& patch,
                                   int steps = kDefaultSteps,
                                   Workers workers = {});

// Directional-difference approximation of patch_attr_exact:
//   |d| * sum_{k=1..N} dG/dH_j(H(gamma(k/N))) * [H_j(gamma(k/N) + dhat/N) - H_j(gamma(k/N))]
// with d = (x - x') restricted to the patch and dhat = d / |d|. Two forward
// passes through H and one backward pass through G per node. Zero when |d| = 0.
NeuronAttribution patch_attr_fast(const SplitNetwork& split, const Tensor& x,
                                  const Tensor& x_prime, Target target,
                                  const PatchSpec& patch, int steps,
                                  Workers workers = {});

// max_j |fast(S)_j + fast(S^c)_j - conductance_j|, the consistency check for
// choosing N. Conductance uses the path-difference method at the same N.
double patch_consistency_residual(const SplitNetwork& split, const Tensor& x,
                                  const Tensor& x_prime, Target target,
                                  const PatchSpec& patch, int steps,
                                  Workers workers = {});

enum class RankOrder { kDescending, kAscending };

// Stable ordering of neuron indices by value; ties keep the lower index first.
std::vector<std::size_t> rank_neurons(const NeuronAttribution& attr,
                                      RankOrder order = RankOrder::kDescending);
std::vector<std::size_t> rank_values(const Tensor& values, RankOrder order);

}  // namespace axiomgrad

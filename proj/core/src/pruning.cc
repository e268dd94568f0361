#include "axiomgrad/pruning.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include "axiomgrad/attribution.h"
#include "axiomgrad/error.h"
#include "axiomgrad/train.h"

namespace axiomgrad {

using nlohmann::json;

std::size_t PruneMask::count() const {
  return static_cast<std::size_t>(std::count(zeroed.begin(), zeroed.end(), 1));
}

PruneMask PruneMask::top(std::string layer_name, std::size_t width,
                         const std::vector<std::size_t>& ranking,
                         std::size_t count) {
  if (count > ranking.size()) throw ValueError("cannot prune more neurons than ranked");
  PruneMask mask{std::move(layer_name), std::vector<std::uint8_t>(width, 0)};
  for (std::size_t k = 0; k < count; ++k) {
    if (ranking[k] >= width) throw ValueError("ranking entry out of range");
    mask.zeroed[ranking[k]] = 1;
  }
  return mask;
}

Network apply_mask(const Network& net, const PruneMask& mask) {
  const auto k = net.find_layer(mask.layer_name);
  if (!k) throw ValueError("unknown layer '" + mask.layer_name + "'");
  const std::size_t width = shape_size(net.activation_shape(*k + 1));
  if (mask.zeroed.size() != width) {
    throw ShapeError("mask has " + std::to_string(mask.zeroed.size()) +
                     " entries, layer '" + mask.layer_name + "' has " +
                     std::to_string(width));
  }
  const Layer& layer = net.layer(*k);
  std::vector<std::uint8_t> merged =
      layer.has_mask() ? layer.mask() : std::vector<std::uint8_t>(width, 0);
  for (std::size_t i = 0; i < width; ++i) merged[i] = merged[i] || mask.zeroed[i];
  std::shared_ptr<Layer> copy = layer.clone();
  copy->set_mask(std::move(merged));
  return net.with_layer(*k, std::move(copy));
}

std::size_t pruned_count(double fraction, std::size_t width) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ValueError("fraction must lie in [0, 1]");
  }
  const double scaled = fraction * static_cast<double>(width);
  return std::min(width, static_cast<std::size_t>(std::ceil(scaled - 1e-9)));
}

std::vector<double> default_fractions() {
  std::vector<double> f{0.0, 0.05};
  for (int k = 1; k <= 10; ++k) f.push_back(k / 10.0);
  return f;
}

std::vector<std::size_t> random_ranking(std::size_t width, std::uint64_t seed) {
  std::vector<std::size_t> r(width);
  std::iota(r.begin(), r.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(r.begin(), r.end(), rng);
  return r;
}

NeuronAttribution average_conductance(const SplitNetwork& split,
                                      const LabeledDataset& data, int steps,
                                      Workers workers, TargetMode mode) {
  if (data.empty()) throw ValueError("average conductance of an empty dataset");
  std::vector<Tensor> parts(data.size());
  parallel_for(data.size(), workers, [&](std::size_t s) {
    const Tensor& x = data.images[s];
    const Target target(static_cast<std::size_t>(data.labels[s]), mode);
    parts[s] = conductance(split, x, Tensor(x.shape()), target, steps).values;
  });
  NeuronAttribution out;
  out.layer_name = split.layer_name;
  out.values = (1.0 / static_cast<double>(parts.size())) * pairwise_sum(parts);
  out.kind = NeuronAttrKind::kConductance;
  out.steps = steps;
  out.method = "path-difference";
  return out;
}

namespace {

void check_fractions(const std::vector<double>& fractions) {
  if (fractions.empty()) throw ValueError("no pruning fractions given");
  for (std::size_t k = 0; k < fractions.size(); ++k) {
    if (!(fractions[k] >= 0.0 && fractions[k] <= 1.0)) {
      throw ValueError("fraction outside [0, 1]");
    }
    if (k > 0 && !(fractions[k] > fractions[k - 1])) {
      throw ValueError("fractions must be strictly increasing");
    }
  }
}

void check_ranking(const std::vector<std::size_t>& ranking, std::size_t width) {
  if (ranking.size() != width) {
    throw ValueError("ranking has " + std::to_string(ranking.size()) +
                     " entries, layer has " + std::to_string(width));
  }
  std::vector<bool> seen(width, false);
  for (std::size_t r : ranking) {
    if (r >= width || seen[r]) throw ValueError("ranking is not a permutation");
    seen[r] = true;
  }
}

std::size_t layer_width(const Network& net, const std::string& layer) {
  const auto k = net.find_layer(layer);
  if (!k) throw ValueError("unknown layer '" + layer + "'");
  return shape_size(net.activation_shape(*k + 1));
}

}  // namespace

SweepResult prune_sweep(const Network& net, const std::string& layer,
                        const std::vector<std::size_t>& ranking,
                        const std::vector<double>& fractions,
                        const SweepEval& eval, std::string ranking_name,
                        Workers workers) {
  check_fractions(fractions);
  const std::size_t width = layer_width(net, layer);
  check_ranking(ranking, width);
  LabeledDataset class_subset;
  if (eval.test && eval.class_label) class_subset = eval.test->with_label(*eval.class_label);

  SweepResult result;
  result.layer = layer;
  result.ranking_name = std::move(ranking_name);
  result.ranking = ranking;
  for (double f : fractions) {
    SweepPoint p;
    p.fraction = f;
    p.pruned = pruned_count(f, width);
    const Network pruned = apply_mask(net, PruneMask::top(layer, width, ranking, p.pruned));
    if (eval.test) {
      p.test_accuracy = accuracy(pruned, *eval.test, workers);
      if (!class_subset.empty()) p.class_accuracy = accuracy(pruned, class_subset, workers);
    }
    result.points.push_back(p);
  }
  return result;
}

RegionSums region_ig_sums(const Network& net, const Tensor& x,
                          const Tensor& x_prime, Target target,
                          const PatchSpec& box, int steps, Workers workers) {
  if (!box.empty() && box.input_size() != x.size()) {
    throw ShapeError("box was built for " + std::to_string(box.input_size()) +
                     " inputs, input has " + std::to_string(x.size()));
  }
  const Tensor ig = integrated_gradients(net, x, x_prime, target, steps, workers).values;
  RegionSums sums;
  std::size_t k = 0;
  const auto& inside = box.indices();
  for (std::size_t i = 0; i < ig.size(); ++i) {
    if (k < inside.size() && inside[k] == i) {
      sums.inside += ig[i];
      ++k;
    } else {
      sums.outside += ig[i];
    }
  }
  sums.all = sums.inside + sums.outside;
  return sums;
}

namespace {

// Mean region sums over the images at each fraction of `ranking`.
SweepResult region_sweep(const Network& net, const std::string& layer,
                         const std::vector<std::size_t>& ranking,
                         std::string ranking_name, const LabeledDataset& images,
                         const PatchSpec& box, const std::vector<double>& fractions,
                         int steps, Workers workers, TargetMode mode) {
  const std::size_t width = layer_width(net, layer);
  SweepResult result;
  result.layer = layer;
  result.ranking_name = std::move(ranking_name);
  result.ranking = ranking;
  result.steps = steps;
  for (double f : fractions) {
    SweepPoint p;
    p.fraction = f;
    p.pruned = pruned_count(f, width);
    const Network pruned = apply_mask(net, PruneMask::top(layer, width, ranking, p.pruned));
    std::vector<RegionSums> sums(images.size());
    parallel_for(images.size(), workers, [&](std::size_t s) {
      const Tensor& x = images.images[s];
      sums[s] = region_ig_sums(
          pruned, x, Tensor(x.shape()),
          Target(static_cast<std::size_t>(images.labels[s]), mode), box, steps);
    });
    std::vector<double> in(sums.size()), out(sums.size()), all(sums.size());
    for (std::size_t s = 0; s < sums.size(); ++s) {
      in[s] = sums[s].inside;
      out[s] = sums[s].outside;
      all[s] = sums[s].all;
    }
    const double n = static_cast<double>(sums.size());
    p.ig_inside = pairwise_sum(in) / n;
    p.ig_outside = pairwise_sum(out) / n;
    p.ig_all = pairwise_sum(all) / n;
    result.points.push_back(p);
  }
  return result;
}

}  // namespace

PatchExperiment patch_rank_prune_experiment(const Network& net,
                                            const std::string& layer,
                                            const LabeledDataset& images,
                                            const PatchSpec& box,
                                            const std::vector<double>& fractions,
                                            int steps, int patch_steps,
                                            Workers workers, TargetMode mode) {
  if (images.empty()) throw ValueError("patch experiment needs at least one image");
  if (box.empty()) throw ValueError("patch experiment needs a non-empty box");
  check_fractions(fractions);
  const SplitNetwork parts = split(net, layer);

  std::vector<Tensor> patch_values(images.size());
  std::vector<Tensor> conductance_values(images.size());
  parallel_for(images.size(), workers, [&](std::size_t s) {
    const Tensor& x = images.images[s];
    const Tensor black(x.shape());
    const Target target(static_cast<std::size_t>(images.labels[s]), mode);
    patch_values[s] = patch_attr_fast(parts, x, black, target, box, patch_steps).values;
    conductance_values[s] = conductance(parts, x, black, target, steps).values;
  });
  const double n = static_cast<double>(images.size());
  const Tensor patch_mean = (1.0 / n) * pairwise_sum(patch_values);
  const Tensor conductance_mean = (1.0 / n) * pairwise_sum(conductance_values);

  PatchExperiment out;
  out.patch_arm = region_sweep(net, layer, rank_values(patch_mean, RankOrder::kDescending),
                               "patch", images, box, fractions, steps, workers, mode);
  out.conductance_arm =
      region_sweep(net, layer, rank_values(conductance_mean, RankOrder::kDescending),
                   "conductance", images, box, fractions, steps, workers, mode);
  return out;
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out << "fraction,pruned";
  const SweepPoint* first = points.empty() ? nullptr : &points.front();
  const bool acc = first && first->test_accuracy;
  const bool cls = first && first->class_accuracy;
  const bool ig = first && first->ig_inside;
  if (acc) out << ",test_accuracy";
  if (cls) out << ",class_accuracy";
  if (ig) out << ",ig_inside,ig_outside,ig_all";
  out << '\n';
  for (const SweepPoint& p : points) {
    out << format_number(p.fraction) << ',' << p.pruned;
    if (acc) out << ',' << format_number(p.test_accuracy.value_or(NAN));
    if (cls) out << ',' << format_number(p.class_accuracy.value_or(NAN));
    if (ig) {
      out << ',' << format_number(p.ig_inside.value_or(NAN)) << ','
          << format_number(p.ig_outside.value_or(NAN)) << ','
          << format_number(p.ig_all.value_or(NAN));
    }
    out << '\n';
  }
  return out.str();
}

json SweepResult::to_json() const {
  json pts = json::array();
  for (const SweepPoint& p : points) {
    json j = {{"fraction", p.fraction}, {"pruned", p.pruned}};
    if (p.test_accuracy) j["test_accuracy"] = *p.test_accuracy;
    if (p.class_accuracy) j["class_accuracy"] = *p.class_accuracy;
    if (p.ig_inside) {
      j["ig_inside"] = *p.ig_inside;
      j["ig_outside"] = *p.ig_outside;
      j["ig_all"] = *p.ig_all;
    }
    pts.push_back(std::move(j));
  }
  return {{"layer", layer},
          {"ranking", ranking_name},
          {"order", ranking},
          {"steps", steps},
          {"points", pts}};
}

}  // namespace axiomgrad

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "axiomgrad/tensor.h"

namespace axiomgrad {

enum class SplitTag { kTrain, kTest };

// Images scaled to [0, 1] with integer class labels.
struct LabeledDataset {
  std::vector<Tensor> images;
  std::vector<int> labels;
  SplitTag split = SplitTag::kTrain;
  int num_classes = 10;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }

  // Throws ValueError on length mismatch or out-of-range labels.
  void validate() const;

  LabeledDataset subset(std::span<const std::size_t> indices) const;
  LabeledDataset first(std::size_t n) const;
  LabeledDataset with_label(int label) const;
};

}  // namespace axiomgrad

#pragma once

#include <cstdint>
#include <vector>

#include "robustseg/tensor.hpp"

namespace robustseg {

// Global confusion counts, rows = ground truth, cols = prediction.
// IGNORE pixels are never counted.
struct ConfusionMatrix {
  int num_classes = 0;
  std::vector<std::int64_t> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int k)
      : num_classes(k), counts(static_cast<std::size_t>(k) * k, 0) {}

  std::int64_t& at(int gt, int pred) {
    return counts[static_cast<std::size_t>(gt) * num_classes + pred];
  }
  std::int64_t at(int gt, int pred) const {
    return counts[static_cast<std::size_t>(gt) * num_classes + pred];
  }

  void add(const LabelMap& pred, const LabelMap& gt);
  void merge(const ConfusionMatrix& other);
  std::int64_t total() const;
};

// Mean of class-wise IoU over classes with nonzero union.
// Throws std::invalid_argument when no pixel was scored.
double miou(const ConfusionMatrix& cm);
double miou(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& labels,
            int num_classes);

}  // namespace robustseg

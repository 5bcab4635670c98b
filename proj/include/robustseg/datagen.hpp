#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "robustseg/tensor.hpp"

namespace robustseg {

// Procedural scene parameters. Classes are color coded: class 0 is the
// background, classes 1..K-1 draw non-overlapping shapes in a characteristic
// base color.
struct SceneConfig {
  int h = 32, w = 32;
  int num_classes = 4;
  double noise_sigma = 0.05;
  int shapes_min = 1, shapes_max = 3;
  int train_size = 512, val_size = 128;
  std::uint64_t seed = 0;
};

enum class Split { train, val };

struct Dataset {
  std::vector<Tensor> images;
  std::vector<LabelMap> labels;
  Split split = Split::train;
  SceneConfig config;

  std::size_t size() const { return images.size(); }
};

// Deterministic generation; train and val come from disjoint seed streams and
// every class appears in both splits. Throws on infeasible configs.
std::pair<Dataset, Dataset> generate(const SceneConfig& config);

// Base color of a class (used by generation; exposed for tests).
void class_color(int cls, int num_classes, double rgb[3]);

// Directory layout: manifest.txt + images/NNNN.pfm + labels/NNNN.pgm.
void save(const Dataset& ds, const std::filesystem::path& dir);
Dataset load(const std::filesystem::path& dir);

// Epoch-shuffled batches; the final partial batch of each epoch is dropped.
class BatchIterator {
 public:
  BatchIterator(const Dataset& ds, int batch_size, std::uint64_t seed);

  struct Batch {
    std::vector<int> indices;
    std::vector<const Tensor*> images;
    std::vector<const LabelMap*> labels;
  };
  Batch next();

 private:
  void reshuffle();

  const Dataset* ds_;
  int batch_size_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  std::size_t cursor_ = 0;
  std::vector<int> order_;
};

}  // namespace robustseg

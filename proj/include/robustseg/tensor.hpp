#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace robustseg {

// Label value excluded from every loss and metric.
inline constexpr std::int32_t kIgnoreLabel = 255;

// Dense H x W x C array of doubles, channel innermost, row-major.
struct Tensor {
  int h = 0, w = 0, c = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int h_, int w_, int c_)
      : h(h_), w(w_), c(c_), v(static_cast<std::size_t>(h_) * w_ * c_, 0.0) {}

  double& at(int y, int x, int ch) {
    return v[(static_cast<std::size_t>(y) * w + x) * c + ch];
  }
  double at(int y, int x, int ch) const {
    return v[(static_cast<std::size_t>(y) * w + x) * c + ch];
  }

  std::size_t size() const { return v.size(); }
  int pixels() const { return h * w; }
  bool same_shape(const Tensor& o) const {
    return h == o.h && w == o.w && c == o.c;
  }
  void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

// H x W integer class map; values in {0..K-1} or kIgnoreLabel.
struct LabelMap {
  int h = 0, w = 0;
  std::vector<std::int32_t> v;

  LabelMap() = default;
  LabelMap(int h_, int w_, std::int32_t fill = 0)
      : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, fill) {}

  std::int32_t& at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
  std::int32_t at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
  std::size_t size() const { return v.size(); }
};

// H x W {0,1} matrix.
struct BinaryMask {
  int h = 0, w = 0;
  std::vector<std::uint8_t> v;

  BinaryMask() = default;
  BinaryMask(int h_, int w_, std::uint8_t fill = 0)
      : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, fill) {}

  std::uint8_t& at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
  std::uint8_t at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
  std::size_t size() const { return v.size(); }

  double mean() const {
    if (v.empty()) return 0.0;
    std::size_t ones = 0;
    for (auto b : v) ones += b;
    return static_cast<double>(ones) / static_cast<double>(v.size());
  }
};

}  // namespace robustseg

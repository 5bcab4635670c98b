#include "robustseg/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace robustseg {

LossValue masked_ce(const Tensor& logits, const LabelMap& y, const BinaryMask* gate,
                    Tensor* d_logits, double scale) {
  if (y.h != logits.h || y.w != logits.w)
    throw std::invalid_argument("masked_ce: label shape mismatch");
  if (gate && (gate->h != logits.h || gate->w != logits.w))
    throw std::invalid_argument("masked_ce: gate shape mismatch");
  const int k = logits.c;

  if (d_logits) {
    *d_logits = Tensor(logits.h, logits.w, k);
  }

  // First pass: count scorable pixels. The mean is over every non-IGNORE
  // pixel, gated or not, so masked halves of a partition sum to the full mean.
  std::size_t n_valid = 0;
  for (auto label : y.v) {
    if (label != kIgnoreLabel) ++n_valid;
  }
  if (n_valid == 0) {
    return {0.0, true};
  }
  const double inv_n = 1.0 / static_cast<double>(n_valid);

  double total = 0.0;
  for (int py = 0; py < logits.h; ++py) {
    for (int px = 0; px < logits.w; ++px) {
      const std::int32_t label = y.at(py, px);
      if (label == kIgnoreLabel) continue;
      if (label < 0 || label >= k)
        throw std::invalid_argument("masked_ce: label out of range");
      const bool gated = !gate || gate->at(py, px) != 0;
      if (!gated) continue;  // gated-out pixels contribute nothing, grad included

      const double* z = &logits.v[(static_cast<std::size_t>(py) * logits.w + px) * k];
      double zmax = z[0];
      for (int i = 1; i < k; ++i) zmax = std::max(zmax, z[i]);
      double sum = 0.0;
      for (int i = 0; i < k; ++i) sum += std::exp(z[i] - zmax);
      const double lse = zmax + std::log(sum);
      total += lse - z[label];

      if (d_logits) {
        double* dz = &d_logits->v[(static_cast<std::size_t>(py) * logits.w + px) * k];
        for (int i = 0; i < k; ++i) {
          const double p = std::exp(z[i] - lse);
          dz[i] = scale * inv_n * (p - (i == label ? 1.0 : 0.0));
        }
      }
    }
  }
  return {total * inv_n, false};
}

LossValue mask_ce(const Tensor& mask_logits, const BinaryMask& label,
                  const BinaryMask* valid, Tensor* d_logits, double scale) {
  if (mask_logits.c != 2)
    throw std::invalid_argument("mask_ce: mask logits must have 2 channels");
  if (label.h != mask_logits.h || label.w != mask_logits.w)
    throw std::invalid_argument("mask_ce: label shape mismatch");
  LabelMap as_labels(label.h, label.w);
  for (int y = 0; y < label.h; ++y) {
    for (int x = 0; x < label.w; ++x) {
      const bool scored = !valid || valid->at(y, x) != 0;
      as_labels.at(y, x) = scored ? static_cast<std::int32_t>(label.at(y, x)) : kIgnoreLabel;
    }
  }
  return masked_ce(mask_logits, as_labels, nullptr, d_logits, scale);
}

}  // namespace robustseg

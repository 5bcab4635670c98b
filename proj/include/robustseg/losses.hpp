#pragma once

#include "robustseg/tensor.hpp"

namespace robustseg {

struct LossWeights {
  double lambda_n = 1.0, lambda_a = 1.0, lambda_m = 1.0;
};

struct LossValue {
  double value = 0.0;
  bool empty = false;  // set when no non-IGNORE pixel was scorable
};

// Mean over all non-IGNORE pixels of (per-pixel softmax cross-entropy) * gate.
// Masked-out pixels stay in the denominator, so a q-masked loss and a p-masked
// loss over the same logits sum to the plain mean. gate == nullptr scores every
// non-IGNORE pixel. When d_logits is non-null it receives scale * dLoss/dlogits.
LossValue masked_ce(const Tensor& logits, const LabelMap& y, const BinaryMask* gate,
                    Tensor* d_logits = nullptr, double scale = 1.0);

// Two-class cross-entropy of mask logits against a binary mask label.
// `valid` marks pixels that count (non-IGNORE); nullptr means all.
LossValue mask_ce(const Tensor& mask_logits, const BinaryMask& label,
                  const BinaryMask* valid = nullptr, Tensor* d_logits = nullptr,
                  double scale = 1.0);

inline double total_loss(double l_n, double l_a, double l_m, const LossWeights& w) {
  return w.lambda_n * l_n + w.lambda_a * l_a + w.lambda_m * l_m;
}

}  // namespace robustseg

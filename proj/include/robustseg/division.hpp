#pragma once

#include <string>

#include "robustseg/attacks.hpp"
#include "robustseg/model.hpp"
#include "robustseg/tensor.hpp"

namespace robustseg {

// Pixel partition between the two conquering branches: p(i,j) = 1 sends the
// pixel to the auxiliary branch, q = 1 - p keeps it on the main branch.
struct DivisionMask {
  BinaryMask p;

  BinaryMask q() const {
    BinaryMask out(p.h, p.w);
    for (std::size_t i = 0; i < p.v.size(); ++i) out.v[i] = p.v[i] ? 0 : 1;
    return out;
  }
};

// Ideal-division ground truth for the mask branch.
struct MaskLabel {
  BinaryMask m;

  Tensor one_hot() const {
    Tensor out(m.h, m.w, 2);
    for (int y = 0; y < m.h; ++y)
      for (int x = 0; x < m.w; ++x) out.at(y, x, m.at(y, x) ? 1 : 0) = 1.0;
    return out;
  }
};

// ddc_at routes only boundary-property clean pixels to the auxiliary branch;
// the -m / -n settings are the ablation alternatives.
enum class DivisionPolicy { ddc_at, ddc_at_m, ddc_at_n };

DivisionPolicy division_policy_from_string(const std::string& s);

// p = per-pixel argmax of the 2-channel mask logits (ties -> 0).
DivisionMask predict_division(const Tensor& mask_logits);

// o = o_a where p = 1, o_n where p = 0.
Tensor combine(const Tensor& o_n, const Tensor& o_a, const DivisionMask& mask);

struct MaskLabelResult {
  MaskLabel m_clean, m_adv;
  Tensor x_adv;
  // Divisions predicted while generating the labels; the model state is
  // unchanged, so the training step can reuse them.
  DivisionMask p_clean, p_adv;
};

// Mask-label generation: forwards the clean sample, attacks the main-branch
// loss, forwards the adversarial sample, and marks pixels whose combined-output
// label changed. IGNORE pixels get label 0 under every policy.
MaskLabelResult make_mask_labels(const SegModel& model, const Tensor& x_clean,
                                 const LabelMap& y, const AttackConfig& attack,
                                 DivisionPolicy policy);

}  // namespace robustseg

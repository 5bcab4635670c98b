#include "robustseg/division.hpp"

#include <stdexcept>

namespace robustseg {

DivisionPolicy division_policy_from_string(const std::string& s) {
  if (s == "ddc_at") return DivisionPolicy::ddc_at;
  if (s == "ddc_at_m") return DivisionPolicy::ddc_at_m;
  if (s == "ddc_at_n") return DivisionPolicy::ddc_at_n;
  throw std::invalid_argument("unknown division policy '" + s + "'");
}

DivisionMask predict_division(const Tensor& mask_logits) {
  if (mask_logits.c != 2)
    throw std::invalid_argument("predict_division: expected 2 channels");
  DivisionMask out;
  out.p = BinaryMask(mask_logits.h, mask_logits.w);
  for (int y = 0; y < mask_logits.h; ++y) {
    for (int x = 0; x < mask_logits.w; ++x) {
      out.p.at(y, x) = mask_logits.at(y, x, 1) > mask_logits.at(y, x, 0) ? 1 : 0;
    }
  }
  return out;
}

Tensor combine(const Tensor& o_n, const Tensor& o_a, const DivisionMask& mask) {
  if (!o_n.same_shape(o_a))
    throw std::invalid_argument("combine: branch output shapes differ");
  if (mask.p.h != o_n.h || mask.p.w != o_n.w)
    throw std::invalid_argument("combine: mask shape mismatch");
  Tensor out = o_n;
  for (int y = 0; y < o_n.h; ++y) {
    for (int x = 0; x < o_n.w; ++x) {
      if (!mask.p.at(y, x)) continue;
      const std::size_t base = (static_cast<std::size_t>(y) * o_n.w + x) * o_n.c;
      for (int k = 0; k < o_n.c; ++k) out.v[base + k] = o_a.v[base + k];
    }
  }
  return out;
}

MaskLabelResult make_mask_labels(const SegModel& model, const Tensor& x_clean,
                                 const LabelMap& y, const AttackConfig& attack,
                                 DivisionPolicy policy) {
  MaskLabelResult res;

  BranchOutputs clean = forward_all(model, x_clean);
  res.p_clean = predict_division(clean.mask);
  const LabelMap b_clean = argmax_labels(combine(clean.main, clean.aux, res.p_clean));

  // Adversarial examples come from the main-branch loss only.
  res.x_adv = run_attack(model, x_clean, y, attack);

  BranchOutputs adv = forward_all(model, res.x_adv);
  res.p_adv = predict_division(adv.mask);
  const LabelMap b_adv = argmax_labels(combine(adv.main, adv.aux, res.p_adv));

  BinaryMask boundary(y.h, y.w);
  for (int py = 0; py < y.h; ++py) {
    for (int px = 0; px < y.w; ++px) {
      if (y.at(py, px) == kIgnoreLabel) continue;  // unscored pixels stay on main
      boundary.at(py, px) = b_clean.at(py, px) != b_adv.at(py, px) ? 1 : 0;
    }
  }

  res.m_clean.m = BinaryMask(y.h, y.w);
  res.m_adv.m = BinaryMask(y.h, y.w);
  switch (policy) {
    case DivisionPolicy::ddc_at:
      res.m_clean.m = boundary;
      break;
    case DivisionPolicy::ddc_at_m:
      res.m_clean.m = boundary;
      res.m_adv.m = boundary;
      break;
    case DivisionPolicy::ddc_at_n:
      res.m_adv.m = boundary;
      break;
  }
  return res;
}

}  // namespace robustseg

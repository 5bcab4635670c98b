#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "robustseg/model.hpp"
#include "robustseg/tensor.hpp"

namespace robustseg {

enum class AttackFamily { fgsm, bim };

AttackFamily attack_family_from_string(const std::string& s);
std::string to_string(AttackFamily f);

// L-inf attacker parameters. `steps` is ignored for FGSM (single step).
struct AttackConfig {
  double epsilon = 0.03;
  double alpha = 0.01;
  int steps = 3;
  AttackFamily family = AttackFamily::bim;
};

// Elementwise clamp of x_adv into [x_clean - eps, x_clean + eps] and [0, 1].
Tensor project(const Tensor& x_adv, const Tensor& x_clean, double epsilon);

// Single signed-gradient step from a precomputed gradient: clamp01(x + eps * sign(g)).
// sign(0) is 0, so zero-gradient pixels stay put.
Tensor fgsm_from_gradient(const Tensor& x_clean, const Tensor& grad, double epsilon);

// Untargeted FGSM against the main-branch cross-entropy.
Tensor fgsm(const SegModel& model, const Tensor& x_clean, const LabelMap& y,
            double epsilon);

// BIM: `steps` iterations of x <- project(x + alpha * sign(grad(x))), starting
// from x_clean (no random start). `visit`, when given, sees each iterate.
using GradFn = std::function<Tensor(const Tensor&)>;
using StepVisitor = std::function<void(int step, const Tensor& x_adv)>;

Tensor bim_with(const GradFn& grad, const Tensor& x_clean, const AttackConfig& cfg,
                const StepVisitor& visit = nullptr);

Tensor bim(const SegModel& model, const Tensor& x_clean, const LabelMap& y,
           const AttackConfig& cfg, const StepVisitor& visit = nullptr);

// Dispatch on cfg.family.
Tensor run_attack(const SegModel& model, const Tensor& x_clean, const LabelMap& y,
                  const AttackConfig& cfg);

// Process-wide count of fgsm/bim invocations (one per attacked image).
std::uint64_t attack_call_count();
void reset_attack_call_count();

}  // namespace robustseg

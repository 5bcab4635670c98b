#include "robustseg/attacks.hpp"

#include <atomic>
#include <stdexcept>

namespace robustseg {

namespace {

std::atomic<std::uint64_t> g_attack_calls{0};

inline double sign(double g) { return g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0); }

}  // namespace

AttackFamily attack_family_from_string(const std::string& s) {
  if (s == "fgsm") return AttackFamily::fgsm;
  if (s == "bim") return AttackFamily::bim;
  throw std::invalid_argument("unknown attack family '" + s + "'");
}

std::string to_string(AttackFamily f) {
  return f == AttackFamily::fgsm ? "fgsm" : "bim";
}

Tensor project(const Tensor& x_adv, const Tensor& x_clean, double epsilon) {
  if (!x_adv.same_shape(x_clean))
    throw std::invalid_argument("project: shape mismatch");
  if (epsilon < 0.0) throw std::invalid_argument("project: epsilon must be >= 0");
  Tensor out = x_adv;
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    const double lo = x_clean.v[i] - epsilon;
    const double hi = x_clean.v[i] + epsilon;
    double r = out.v[i];
    r = r < lo ? lo : (r > hi ? hi : r);
    r = r < 0.0 ? 0.0 : (r > 1.0 ? 1.0 : r);
    out.v[i] = r;
  }
  return out;
}

Tensor fgsm_from_gradient(const Tensor& x_clean, const Tensor& grad, double epsilon) {
  if (!grad.same_shape(x_clean))
    throw std::invalid_argument("fgsm: gradient shape mismatch");
  if (epsilon < 0.0) throw std::invalid_argument("fgsm: epsilon must be >= 0");
  Tensor out = x_clean;
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    double r = x_clean.v[i] + epsilon * sign(grad.v[i]);
    out.v[i] = r < 0.0 ? 0.0 : (r > 1.0 ? 1.0 : r);
  }
  return out;
}

Tensor fgsm(const SegModel& model, const Tensor& x_clean, const LabelMap& y,
            double epsilon) {
  g_attack_calls.fetch_add(1, std::memory_order_relaxed);
  return fgsm_from_gradient(x_clean, input_gradient(model, x_clean, y), epsilon);
}

Tensor bim_with(const GradFn& grad, const Tensor& x_clean, const AttackConfig& cfg,
                const StepVisitor& visit) {
  if (cfg.steps < 1) throw std::invalid_argument("bim: steps must be >= 1");
  if (cfg.epsilon < 0.0) throw std::invalid_argument("bim: epsilon must be >= 0");
  Tensor x = x_clean;
  for (int t = 1; t <= cfg.steps; ++t) {
    Tensor g = grad(x);
    for (std::size_t i = 0; i < x.v.size(); ++i) {
      x.v[i] += cfg.alpha * sign(g.v[i]);
    }
    x = project(x, x_clean, cfg.epsilon);
    if (visit) visit(t, x);
  }
  return x;
}

Tensor bim(const SegModel& model, const Tensor& x_clean, const LabelMap& y,
           const AttackConfig& cfg, const StepVisitor& visit) {
  g_attack_calls.fetch_add(1, std::memory_order_relaxed);
  return bim_with([&](const Tensor& x) { return input_gradient(model, x, y); },
                  x_clean, cfg, visit);
}

Tensor run_attack(const SegModel& model, const Tensor& x_clean, const LabelMap& y,
                  const AttackConfig& cfg) {
  if (cfg.family == AttackFamily::fgsm) {
    return fgsm(model, x_clean, y, cfg.epsilon);
  }
  return bim(model, x_clean, y, cfg);
}

std::uint64_t attack_call_count() {
  return g_attack_calls.load(std::memory_order_relaxed);
}
void reset_attack_call_count() { g_attack_calls.store(0, std::memory_order_relaxed); }

}  // namespace robustseg

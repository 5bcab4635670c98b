#include "robustseg/metrics.hpp"

#include <stdexcept>

namespace robustseg {

void ConfusionMatrix::add(const LabelMap& pred, const LabelMap& gt) {
  if (pred.h != gt.h || pred.w != gt.w)
    throw std::invalid_argument("confusion: shape mismatch");
  for (std::size_t i = 0; i < gt.v.size(); ++i) {
    const std::int32_t g = gt.v[i];
    if (g == kIgnoreLabel) continue;
    const std::int32_t p = pred.v[i];
    if (g < 0 || g >= num_classes || p < 0 || p >= num_classes)
      throw std::invalid_argument("confusion: label out of range");
    at(g, p) += 1;
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.num_classes != num_classes)
    throw std::invalid_argument("confusion: class count mismatch");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double miou(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("miou: zero scored pixels");
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < cm.num_classes; ++c) {
    const std::int64_t tp = cm.at(c, c);
    std::int64_t fp = 0, fn = 0;
    for (int r = 0; r < cm.num_classes; ++r) {
      if (r == c) continue;
      fp += cm.at(r, c);
      fn += cm.at(c, r);
    }
    const std::int64_t uni = tp + fp + fn;
    if (uni == 0) continue;  // class absent from both preds and labels
    sum += static_cast<double>(tp) / static_cast<double>(uni);
    ++present;
  }
  return sum / static_cast<double>(present);
}

double miou(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& labels,
            int num_classes) {
  if (preds.size() != labels.size())
    throw std::invalid_argument("miou: list length mismatch");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) cm.add(preds[i], labels[i]);
  return miou(cm);
}

}  // namespace robustseg

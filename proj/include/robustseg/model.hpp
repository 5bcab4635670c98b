#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "robustseg/tensor.hpp"

namespace robustseg {

// One convolution layer, stride 1, zero padding that preserves H x W.
// Weights are stored patch-major: weight[(dy*k + dx)*in_ch + ci][co],
// flattened row-major into a single vector.
struct ConvLayer {
  int in_ch = 0, out_ch = 0, ksize = 1;
  std::vector<double> weight;
  std::vector<double> bias;

  std::size_t weight_rows() const {
    return static_cast<std::size_t>(ksize) * ksize * in_ch;
  }
  std::size_t param_count() const { return weight.size() + bias.size(); }
};

// Shared backbone S with three 1x1 heads: main f_n (K channels),
// auxiliary f_a (K channels), mask f_m (2 channels). Inference uses only
// backbone + head_main.
struct SegModel {
  std::string arch_id;  // "A" or "B"
  int num_classes = 0;
  std::uint64_t seed = 0;
  std::vector<ConvLayer> backbone;  // 3x3 convs, ReLU after each
  ConvLayer head_main, head_aux, head_mask;

  int feature_channels() const {
    return backbone.empty() ? 0 : backbone.back().out_ch;
  }
};

// Per-branch logit maps: main/aux are H x W x K, mask is H x W x 2.
struct BranchOutputs {
  Tensor main, aux, mask;
};

enum class ForwardMode { all_branches, main_only };

// Registered toy architectures. Throws std::invalid_argument for an unknown
// arch name or K < 2. Initialization is He-normal, deterministic in `seed`.
SegModel build_model(const std::string& arch, int num_classes, std::uint64_t seed);

bool known_arch(const std::string& arch);
std::size_t param_count(const SegModel& model);

// Visits every parameter array as (name, vector). Order is fixed:
// backbone.<i>.{weight,bias}, then head_main, head_aux, head_mask.
void for_each_param(SegModel& model,
                    const std::function<void(const std::string&, std::vector<double>&)>& fn);
void for_each_param(const SegModel& model,
                    const std::function<void(const std::string&, const std::vector<double>&)>& fn);

// Activations cached by a forward pass, consumed by backward().
struct ForwardTrace {
  Tensor input;
  std::vector<Tensor> acts;  // post-ReLU output of each backbone layer
};

// Forward through backbone + main head only. `eval_log`, when given, records
// the name of every parameter tensor the pass evaluates.
Tensor forward_main(const SegModel& model, const Tensor& x,
                    ForwardTrace* trace = nullptr,
                    std::vector<std::string>* eval_log = nullptr);

// Forward through backbone and all three heads.
BranchOutputs forward_all(const SegModel& model, const Tensor& x,
                          ForwardTrace* trace = nullptr,
                          std::vector<std::string>* eval_log = nullptr);

// Per-pixel argmax over channels; ties break toward the lowest index.
LabelMap argmax_labels(const Tensor& logits);

// Gradients mirroring a model's parameter arrays. backward() accumulates (+=).
struct ConvGrads {
  std::vector<double> weight, bias;
};
struct ModelGrads {
  std::vector<ConvGrads> backbone;
  ConvGrads head_main, head_aux, head_mask;
};
ModelGrads make_grads(const SegModel& model);
void add_scaled(ModelGrads& acc, const ModelGrads& g, double scale);

// dL/dlogits per head; a null pointer means that head is not in the graph.
struct HeadDeltas {
  const Tensor* main = nullptr;
  const Tensor* aux = nullptr;
  const Tensor* mask = nullptr;
};

// Backpropagates head deltas through the heads and backbone. Parameter
// gradients are accumulated into *grads when non-null; the input gradient is
// written to *dx when non-null.
void backward(const SegModel& model, const ForwardTrace& trace,
              const HeadDeltas& deltas, ModelGrads* grads, Tensor* dx);

// d(mean cross-entropy of main logits, IGNORE pixels excluded)/dx.
Tensor input_gradient(const SegModel& model, const Tensor& x, const LabelMap& y);

}  // namespace robustseg

#include "robustseg/model.hpp"

#include <Eigen/Dense>

#include <cstring>
#include <stdexcept>

#include "robustseg/losses.hpp"
#include "robustseg/rng.hpp"

namespace robustseg {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

struct ArchSpec {
  std::vector<int> widths;  // backbone output channels
};

const ArchSpec* lookup_arch(const std::string& arch) {
  static const ArchSpec arch_a{{16, 32, 32}};
  static const ArchSpec arch_b{{24, 48, 48, 48}};
  if (arch == "A") return &arch_a;
  if (arch == "B") return &arch_b;
  return nullptr;
}

ConvLayer make_layer(int in_ch, int out_ch, int ksize, Rng& rng) {
  ConvLayer l;
  l.in_ch = in_ch;
  l.out_ch = out_ch;
  l.ksize = ksize;
  const std::size_t rows = l.weight_rows();
  l.weight.resize(rows * out_ch);
  l.bias.assign(out_ch, 0.0);
  const double stdev = std::sqrt(2.0 / static_cast<double>(rows));
  for (auto& w : l.weight) w = rng.normal(0.0, stdev);
  return l;
}

// Patch matrix of x for a k x k window, zero padded: rows = h*w pixels,
// cols = k*k*in_ch, patch-offset major to match ConvLayer::weight.
void im2col(const Tensor& x, int ksize, std::vector<double>& col) {
  const int h = x.h, w = x.w, cin = x.c;
  const int pad = ksize / 2;
  const std::size_t cols = static_cast<std::size_t>(ksize) * ksize * cin;
  col.assign(static_cast<std::size_t>(h) * w * cols, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int dy = 0; dy < ksize; ++dy) {
      const int sy = y + dy - pad;
      if (sy < 0 || sy >= h) continue;
      for (int dx = 0; dx < ksize; ++dx) {
        const std::size_t patch_off = (static_cast<std::size_t>(dy) * ksize + dx) * cin;
        const int x_lo = std::max(0, pad - dx);
        const int x_hi = std::min(w, w + pad - dx);
        for (int px = x_lo; px < x_hi; ++px) {
          const int sx = px + dx - pad;
          std::memcpy(&col[(static_cast<std::size_t>(y) * w + px) * cols + patch_off],
                      &x.v[(static_cast<std::size_t>(sy) * w + sx) * cin],
                      sizeof(double) * cin);
        }
      }
    }
  }
}

// Scatter-add of a patch-matrix gradient back onto the input layout.
void col2im_add(const std::vector<double>& dcol, int h, int w, int cin, int ksize,
                Tensor& dx) {
  const int pad = ksize / 2;
  const std::size_t cols = static_cast<std::size_t>(ksize) * ksize * cin;
  for (int y = 0; y < h; ++y) {
    for (int dy = 0; dy < ksize; ++dy) {
      const int sy = y + dy - pad;
      if (sy < 0 || sy >= h) continue;
      for (int dx_ = 0; dx_ < ksize; ++dx_) {
        const std::size_t patch_off = (static_cast<std::size_t>(dy) * ksize + dx_) * cin;
        for (int px = 0; px < w; ++px) {
          const int sx = px + dx_ - pad;
          if (sx < 0 || sx >= w) continue;
          const double* src = &dcol[(static_cast<std::size_t>(y) * w + px) * cols + patch_off];
          double* dst = &dx.v[(static_cast<std::size_t>(sy) * w + sx) * cin];
          for (int ci = 0; ci < cin; ++ci) dst[ci] += src[ci];
        }
      }
    }
  }
}

// y = conv(x) with optional ReLU fused in.
Tensor conv_forward(const ConvLayer& l, const Tensor& x, bool relu,
                    std::vector<double>* col_scratch) {
  Tensor out(x.h, x.w, l.out_ch);
  const std::size_t n = static_cast<std::size_t>(x.h) * x.w;
  CMapRM wmat(l.weight.data(), static_cast<Eigen::Index>(l.weight_rows()), l.out_ch);
  MapRM omat(out.v.data(), static_cast<Eigen::Index>(n), l.out_ch);
  if (l.ksize == 1) {
    CMapRM xmat(x.v.data(), static_cast<Eigen::Index>(n), x.c);
    omat.noalias() = xmat * wmat;
  } else {
    std::vector<double> local;
    std::vector<double>& col = col_scratch ? *col_scratch : local;
    im2col(x, l.ksize, col);
    CMapRM cmat(col.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l.weight_rows()));
    omat.noalias() = cmat * wmat;
  }
  Eigen::Map<const Eigen::RowVectorXd> b(l.bias.data(), l.out_ch);
  omat.rowwise() += b;
  if (relu) {
    for (auto& v : out.v) v = v > 0.0 ? v : 0.0;
  }
  return out;
}

// Backward through one conv given dY; accumulates parameter grads and returns
// dX (when want_dx). The layer input is `x`.
Tensor conv_backward(const ConvLayer& l, const Tensor& x, const Tensor& dy,
                     ConvGrads* grads, bool want_dx) {
  const std::size_t n = static_cast<std::size_t>(x.h) * x.w;
  CMapRM dymat(dy.v.data(), static_cast<Eigen::Index>(n), l.out_ch);
  CMapRM wmat(l.weight.data(), static_cast<Eigen::Index>(l.weight_rows()), l.out_ch);

  std::vector<double> col;
  const double* in_mat = x.v.data();
  Eigen::Index in_cols = x.c;
  if (l.ksize != 1) {
    im2col(x, l.ksize, col);
    in_mat = col.data();
    in_cols = static_cast<Eigen::Index>(l.weight_rows());
  }

  if (grads) {
    CMapRM cmat(in_mat, static_cast<Eigen::Index>(n), in_cols);
    MapRM dwmat(grads->weight.data(), static_cast<Eigen::Index>(l.weight_rows()), l.out_ch);
    dwmat.noalias() += cmat.transpose() * dymat;
    Eigen::Map<Eigen::RowVectorXd> db(grads->bias.data(), l.out_ch);
    db += dymat.colwise().sum();
  }

  Tensor dx;
  if (want_dx) {
    dx = Tensor(x.h, x.w, x.c);
    if (l.ksize == 1) {
      MapRM dxmat(dx.v.data(), static_cast<Eigen::Index>(n), x.c);
      dxmat.noalias() = dymat * wmat.transpose();
    } else {
      std::vector<double> dcol(n * l.weight_rows());
      MapRM dcmat(dcol.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l.weight_rows()));
      dcmat.noalias() = dymat * wmat.transpose();
      col2im_add(dcol, x.h, x.w, x.c, l.ksize, dx);
    }
  }
  return dx;
}

void check_input(const SegModel& model, const Tensor& x) {
  if (x.c != 3 || x.h <= 0 || x.w <= 0)
    throw std::invalid_argument("forward: input must be H x W x 3");
  if (model.backbone.empty() || model.backbone.front().in_ch != x.c)
    throw std::invalid_argument("forward: input channels do not match model");
}

void log_layer(std::vector<std::string>* eval_log, const std::string& name) {
  if (eval_log) {
    eval_log->push_back(name + ".weight");
    eval_log->push_back(name + ".bias");
  }
}

// Runs the backbone, filling trace/eval_log, and returns the feature map.
Tensor backbone_forward(const SegModel& model, const Tensor& x, ForwardTrace* trace,
                        std::vector<std::string>* eval_log) {
  check_input(model, x);
  if (trace) {
    trace->input = x;
    trace->acts.clear();
    trace->acts.reserve(model.backbone.size());
  }
  std::vector<double> col_scratch;
  Tensor act = x;
  for (std::size_t i = 0; i < model.backbone.size(); ++i) {
    act = conv_forward(model.backbone[i], act, /*relu=*/true, &col_scratch);
    log_layer(eval_log, "backbone." + std::to_string(i));
    if (trace) trace->acts.push_back(act);
  }
  return act;
}

}  // namespace

bool known_arch(const std::string& arch) { return lookup_arch(arch) != nullptr; }

SegModel build_model(const std::string& arch, int num_classes, std::uint64_t seed) {
  const ArchSpec* spec = lookup_arch(arch);
  if (!spec)
    throw std::invalid_argument("build_model: unknown architecture '" + arch + "'");
  if (num_classes < 2)
    throw std::invalid_argument("build_model: need at least 2 classes");

  SegModel m;
  m.arch_id = arch;
  m.num_classes = num_classes;
  m.seed = seed;
  Rng rng(derive_seed(seed, 0x6d6f64656cULL));  // init stream
  int in_ch = 3;
  for (int width : spec->widths) {
    m.backbone.push_back(make_layer(in_ch, width, 3, rng));
    in_ch = width;
  }
  m.head_main = make_layer(in_ch, num_classes, 1, rng);
  m.head_aux = make_layer(in_ch, num_classes, 1, rng);
  m.head_mask = make_layer(in_ch, 2, 1, rng);
  return m;
}

std::size_t param_count(const SegModel& model) {
  std::size_t n = 0;
  for (const auto& l : model.backbone) n += l.param_count();
  return n + model.head_main.param_count() + model.head_aux.param_count() +
         model.head_mask.param_count();
}

template <class Model, class Fn>
static void for_each_param_impl(Model& model, const Fn& fn) {
  for (std::size_t i = 0; i < model.backbone.size(); ++i) {
    const std::string base = "backbone." + std::to_string(i);
    fn(base + ".weight", model.backbone[i].weight);
    fn(base + ".bias", model.backbone[i].bias);
  }
  fn("head_main.weight", model.head_main.weight);
  fn("head_main.bias", model.head_main.bias);
  fn("head_aux.weight", model.head_aux.weight);
  fn("head_aux.bias", model.head_aux.bias);
  fn("head_mask.weight", model.head_mask.weight);
  fn("head_mask.bias", model.head_mask.bias);
}

void for_each_param(SegModel& model,
                    const std::function<void(const std::string&, std::vector<double>&)>& fn) {
  for_each_param_impl(model, fn);
}
void for_each_param(const SegModel& model,
                    const std::function<void(const std::string&, const std::vector<double>&)>& fn) {
  for_each_param_impl(model, fn);
}

Tensor forward_main(const SegModel& model, const Tensor& x, ForwardTrace* trace,
                    std::vector<std::string>* eval_log) {
  Tensor feat = backbone_forward(model, x, trace, eval_log);
  Tensor o_n = conv_forward(model.head_main, feat, /*relu=*/false, nullptr);
  log_layer(eval_log, "head_main");
  return o_n;
}

BranchOutputs forward_all(const SegModel& model, const Tensor& x, ForwardTrace* trace,
                          std::vector<std::string>* eval_log) {
  Tensor feat = backbone_forward(model, x, trace, eval_log);
  BranchOutputs out;
  out.main = conv_forward(model.head_main, feat, false, nullptr);
  log_layer(eval_log, "head_main");
  out.aux = conv_forward(model.head_aux, feat, false, nullptr);
  log_layer(eval_log, "head_aux");
  out.mask = conv_forward(model.head_mask, feat, false, nullptr);
  log_layer(eval_log, "head_mask");
  return out;
}

LabelMap argmax_labels(const Tensor& logits) {
  if (logits.c < 2) throw std::invalid_argument("argmax_labels: need >= 2 channels");
  LabelMap out(logits.h, logits.w);
  for (int y = 0; y < logits.h; ++y) {
    for (int x = 0; x < logits.w; ++x) {
      const double* px = &logits.v[(static_cast<std::size_t>(y) * logits.w + x) * logits.c];
      int best = 0;
      for (int k = 1; k < logits.c; ++k) {
        if (px[k] > px[best]) best = k;  // ties keep the lowest index
      }
      out.at(y, x) = best;
    }
  }
  return out;
}

ModelGrads make_grads(const SegModel& model) {
  ModelGrads g;
  g.backbone.resize(model.backbone.size());
  for (std::size_t i = 0; i < model.backbone.size(); ++i) {
    g.backbone[i].weight.assign(model.backbone[i].weight.size(), 0.0);
    g.backbone[i].bias.assign(model.backbone[i].bias.size(), 0.0);
  }
  auto init_head = [](ConvGrads& cg, const ConvLayer& l) {
    cg.weight.assign(l.weight.size(), 0.0);
    cg.bias.assign(l.bias.size(), 0.0);
  };
  init_head(g.head_main, model.head_main);
  init_head(g.head_aux, model.head_aux);
  init_head(g.head_mask, model.head_mask);
  return g;
}

void add_scaled(ModelGrads& acc, const ModelGrads& g, double scale) {
  auto axpy = [scale](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += scale * b[i];
  };
  for (std::size_t i = 0; i < acc.backbone.size(); ++i) {
    axpy(acc.backbone[i].weight, g.backbone[i].weight);
    axpy(acc.backbone[i].bias, g.backbone[i].bias);
  }
  axpy(acc.head_main.weight, g.head_main.weight);
  axpy(acc.head_main.bias, g.head_main.bias);
  axpy(acc.head_aux.weight, g.head_aux.weight);
  axpy(acc.head_aux.bias, g.head_aux.bias);
  axpy(acc.head_mask.weight, g.head_mask.weight);
  axpy(acc.head_mask.bias, g.head_mask.bias);
}

void backward(const SegModel& model, const ForwardTrace& trace, const HeadDeltas& deltas,
              ModelGrads* grads, Tensor* dx) {
  if (trace.acts.size() != model.backbone.size())
    throw std::invalid_argument("backward: trace does not match model");
  const Tensor& feat = trace.acts.back();

  // Heads: 1x1 convs on the shared feature map; their dX sum into d_feat.
  Tensor d_feat(feat.h, feat.w, feat.c);
  auto add_head = [&](const ConvLayer& head, const Tensor* delta, ConvGrads* hg) {
    if (!delta) return;
    Tensor part = conv_backward(head, feat, *delta, hg, /*want_dx=*/true);
    for (std::size_t i = 0; i < d_feat.v.size(); ++i) d_feat.v[i] += part.v[i];
  };
  add_head(model.head_main, deltas.main, grads ? &grads->head_main : nullptr);
  add_head(model.head_aux, deltas.aux, grads ? &grads->head_aux : nullptr);
  add_head(model.head_mask, deltas.mask, grads ? &grads->head_mask : nullptr);

  // Backbone, reversed; ReLU gate uses the cached post-activation sign.
  Tensor d_act = std::move(d_feat);
  for (int i = static_cast<int>(model.backbone.size()) - 1; i >= 0; --i) {
    const Tensor& act = trace.acts[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < d_act.v.size(); ++j) {
      if (act.v[j] <= 0.0) d_act.v[j] = 0.0;
    }
    const Tensor& layer_in = (i == 0) ? trace.input : trace.acts[static_cast<std::size_t>(i - 1)];
    const bool want_dx = (i > 0) || dx != nullptr;
    d_act = conv_backward(model.backbone[static_cast<std::size_t>(i)], layer_in, d_act,
                          grads ? &grads->backbone[static_cast<std::size_t>(i)] : nullptr,
                          want_dx);
  }
  if (dx) *dx = std::move(d_act);
}

Tensor input_gradient(const SegModel& model, const Tensor& x, const LabelMap& y) {
  if (y.h != x.h || y.w != x.w)
    throw std::invalid_argument("input_gradient: label shape mismatch");
  ForwardTrace trace;
  Tensor logits = forward_main(model, x, &trace);
  Tensor d_logits;
  masked_ce(logits, y, nullptr, &d_logits);
  HeadDeltas deltas;
  deltas.main = &d_logits;
  Tensor dx;
  backward(model, trace, deltas, nullptr, &dx);
  return dx;
}

}  // namespace robustseg

#include "robustseg/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "robustseg/image_io.hpp"
#include "robustseg/rng.hpp"

namespace robustseg {

namespace {

constexpr std::uint64_t kTrainStream = 0x747261696eULL;
constexpr std::uint64_t kValStream = 0x76616cULL;

struct Shape {
  int kind;  // 0 rectangle, 1 disk, 2 stripe
  int cls;
  int y0, x0, y1, x1;  // rectangle bounds / stripe band
  int cy, cx, r;       // disk
  bool horizontal;     // stripe orientation
};

bool place_shape(Rng& rng, int h, int w, int cls, const BinaryMask& occupied,
                 Shape& out) {
  constexpr int kMaxAttempts = 100;
  const int kind = (cls - 1) % 3;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Shape s{};
    s.kind = kind;
    s.cls = cls;
    if (kind == 0) {  // rectangle
      const int sh = rng.uniform_int(4, std::max(4, h / 3));
      const int sw = rng.uniform_int(4, std::max(4, w / 3));
      if (sh >= h || sw >= w) continue;
      s.y0 = rng.uniform_int(0, h - sh - 1);
      s.x0 = rng.uniform_int(0, w - sw - 1);
      s.y1 = s.y0 + sh;
      s.x1 = s.x0 + sw;
    } else if (kind == 1) {  // disk
      s.r = rng.uniform_int(2, std::max(2, std::min(h, w) / 5));
      s.cy = rng.uniform_int(s.r, h - 1 - s.r);
      s.cx = rng.uniform_int(s.r, w - 1 - s.r);
    } else {  // stripe: full-width or full-height band
      const int thickness = rng.uniform_int(2, 4);
      s.horizontal = rng.uniform_int(0, 1) == 1;
      if (s.horizontal) {
        if (thickness >= h) continue;
        s.y0 = rng.uniform_int(0, h - thickness - 1);
        s.y1 = s.y0 + thickness;
        s.x0 = 0;
        s.x1 = w;
      } else {
        if (thickness >= w) continue;
        s.x0 = rng.uniform_int(0, w - thickness - 1);
        s.x1 = s.x0 + thickness;
        s.y0 = 0;
        s.y1 = h;
      }
    }

    auto covers = [&](int y, int x) {
      if (s.kind == 1) {
        const int dy = y - s.cy, dx = x - s.cx;
        return dy * dy + dx * dx <= s.r * s.r;
      }
      return y >= s.y0 && y < s.y1 && x >= s.x0 && x < s.x1;
    };

    bool clash = false;
    for (int y = 0; y < h && !clash; ++y)
      for (int x = 0; x < w && !clash; ++x)
        if (covers(y, x) && occupied.at(y, x)) clash = true;
    if (clash) continue;

    out = s;
    return true;
  }
  return false;
}

void rasterize(const Shape& s, LabelMap& labels, BinaryMask& occupied) {
  for (int y = 0; y < labels.h; ++y) {
    for (int x = 0; x < labels.w; ++x) {
      bool inside;
      if (s.kind == 1) {
        const int dy = y - s.cy, dx = x - s.cx;
        inside = dy * dy + dx * dx <= s.r * s.r;
      } else {
        inside = y >= s.y0 && y < s.y1 && x >= s.x0 && x < s.x1;
      }
      if (inside) {
        labels.at(y, x) = s.cls;
        occupied.at(y, x) = 1;
      }
    }
  }
}

void make_item(const SceneConfig& cfg, std::uint64_t item_seed, int coverage_cls,
               Tensor& image, LabelMap& labels) {
  Rng rng(item_seed);
  labels = LabelMap(cfg.h, cfg.w, 0);
  BinaryMask occupied(cfg.h, cfg.w);

  const int n_shapes = rng.uniform_int(cfg.shapes_min, cfg.shapes_max);
  for (int i = 0; i < n_shapes; ++i) {
    const int cls = (i == 0 && coverage_cls > 0)
                        ? coverage_cls
                        : rng.uniform_int(1, cfg.num_classes - 1);
    Shape s;
    if (!place_shape(rng, cfg.h, cfg.w, cls, occupied, s))
      throw std::runtime_error("datagen: shapes cannot fit, config infeasible");
    rasterize(s, labels, occupied);
  }

  image = Tensor(cfg.h, cfg.w, 3);
  const double jitter = rng.uniform(-0.04, 0.04);  // per-image brightness shift
  for (int y = 0; y < cfg.h; ++y) {
    for (int x = 0; x < cfg.w; ++x) {
      double rgb[3];
      class_color(labels.at(y, x), cfg.num_classes, rgb);
      for (int ch = 0; ch < 3; ++ch) {
        double v = rgb[ch] + jitter;
        if (cfg.noise_sigma > 0.0) v += rng.normal(0.0, cfg.noise_sigma);
        v = std::clamp(v, 0.0, 1.0);
        // Pixels are float32-valued so the PFM files round-trip exactly.
        image.at(y, x, ch) = static_cast<double>(static_cast<float>(v));
      }
    }
  }
}

Dataset make_split(const SceneConfig& cfg, Split split, int count,
                   std::uint64_t stream) {
  if (count < cfg.num_classes - 1)
    throw std::runtime_error("datagen: split too small to cover every class");
  Dataset ds;
  ds.split = split;
  ds.config = cfg;
  ds.images.resize(count);
  ds.labels.resize(count);
  const std::uint64_t split_seed = derive_seed(cfg.seed, stream);
  for (int i = 0; i < count; ++i) {
    // Force the first shape class cyclically so every class shows up.
    const int coverage_cls = 1 + (i % (cfg.num_classes - 1));
    make_item(cfg, derive_seed(split_seed, static_cast<std::uint64_t>(i)),
              coverage_cls, ds.images[i], ds.labels[i]);
  }
  return ds;
}

std::string split_name(Split s) { return s == Split::train ? "train" : "val"; }

}  // namespace

void class_color(int cls, int num_classes, double rgb[3]) {
  if (cls == 0) {
    rgb[0] = rgb[1] = rgb[2] = 0.32;
    return;
  }
  // Fixed-saturation hue wheel; distinct but with moderate margins.
  const double hue = (cls - 1) / static_cast<double>(std::max(1, num_classes - 1));
  const double s = 0.55, v = 0.62;
  const double hh = hue * 6.0;
  const int sector = static_cast<int>(hh) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: rgb[0] = v; rgb[1] = t; rgb[2] = p; break;
    case 1: rgb[0] = q; rgb[1] = v; rgb[2] = p; break;
    case 2: rgb[0] = p; rgb[1] = v; rgb[2] = t; break;
    case 3: rgb[0] = p; rgb[1] = q; rgb[2] = v; break;
    case 4: rgb[0] = t; rgb[1] = p; rgb[2] = v; break;
    default: rgb[0] = v; rgb[1] = p; rgb[2] = q; break;
  }
}

std::pair<Dataset, Dataset> generate(const SceneConfig& cfg) {
  if (cfg.h < 16 || cfg.w < 16)
    throw std::invalid_argument("datagen: h and w must be >= 16");
  if (cfg.num_classes < 2)
    throw std::invalid_argument("datagen: need at least 2 classes");
  if (cfg.noise_sigma < 0.0)
    throw std::invalid_argument("datagen: noise_sigma must be >= 0");
  if (cfg.shapes_min < 1 || cfg.shapes_max < cfg.shapes_min)
    throw std::invalid_argument("datagen: bad shapes_per_image range");
  Dataset train = make_split(cfg, Split::train, cfg.train_size, kTrainStream);
  Dataset val = make_split(cfg, Split::val, cfg.val_size, kValStream);
  return {std::move(train), std::move(val)};
}

void save(const Dataset& ds, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "labels");
  std::ofstream manifest(dir / "manifest.txt", std::ios::trunc);
  if (!manifest) throw std::runtime_error("datagen: cannot write manifest");
  manifest << "robustseg-dataset v1\n";
  manifest << "split = " << split_name(ds.split) << "\n";
  manifest << "count = " << ds.size() << "\n";
  manifest << "data.h = " << ds.config.h << "\n";
  manifest << "data.w = " << ds.config.w << "\n";
  manifest << "data.classes = " << ds.config.num_classes << "\n";
  manifest << "data.noise_sigma = " << ds.config.noise_sigma << "\n";
  manifest << "data.shapes_min = " << ds.config.shapes_min << "\n";
  manifest << "data.shapes_max = " << ds.config.shapes_max << "\n";
  manifest << "data.train_size = " << ds.config.train_size << "\n";
  manifest << "data.val_size = " << ds.config.val_size << "\n";
  manifest << "data.seed = " << ds.config.seed << "\n";

  char name[16];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::snprintf(name, sizeof(name), "%04zu", i);
    write_pfm(ds.images[i], dir / "images" / (std::string(name) + ".pfm"));
    write_pgm(ds.labels[i], dir / "labels" / (std::string(name) + ".pgm"));
  }
}

Dataset load(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest)
    throw std::runtime_error("datagen: missing manifest in " + dir.string());
  std::string header;
  std::getline(manifest, header);
  if (header != "robustseg-dataset v1")
    throw std::runtime_error("datagen: unrecognized manifest header");

  Dataset ds;
  std::size_t count = 0;
  std::string line;
  while (std::getline(manifest, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
    };
    trim(key);
    trim(value);
    if (key == "split") {
      ds.split = value == "val" ? Split::val : Split::train;
    } else if (key == "count") {
      count = std::stoul(value);
    } else if (key == "data.h") ds.config.h = std::stoi(value);
    else if (key == "data.w") ds.config.w = std::stoi(value);
    else if (key == "data.classes") ds.config.num_classes = std::stoi(value);
    else if (key == "data.noise_sigma") ds.config.noise_sigma = std::stod(value);
    else if (key == "data.shapes_min") ds.config.shapes_min = std::stoi(value);
    else if (key == "data.shapes_max") ds.config.shapes_max = std::stoi(value);
    else if (key == "data.train_size") ds.config.train_size = std::stoi(value);
    else if (key == "data.val_size") ds.config.val_size = std::stoi(value);
    else if (key == "data.seed") ds.config.seed = std::stoull(value);
  }
  if (count == 0) throw std::runtime_error("datagen: manifest lists no items");

  char name[16];
  for (std::size_t i = 0; i < count; ++i) {
    std::snprintf(name, sizeof(name), "%04zu", i);
    const auto img = dir / "images" / (std::string(name) + ".pfm");
    const auto lab = dir / "labels" / (std::string(name) + ".pgm");
    if (!std::filesystem::exists(img) || !std::filesystem::exists(lab))
      throw std::runtime_error("datagen: manifest count does not match files");
    ds.images.push_back(read_pfm(img));
    ds.labels.push_back(read_pgm(lab));
  }
  return ds;
}

BatchIterator::BatchIterator(const Dataset& ds, int batch_size, std::uint64_t seed)
    : ds_(&ds), batch_size_(batch_size), seed_(seed) {
  if (batch_size <= 0 || static_cast<std::size_t>(batch_size) > ds.size())
    throw std::invalid_argument("batches: batch size exceeds dataset");
  reshuffle();
}

void BatchIterator::reshuffle() {
  order_.resize(ds_->size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  Rng rng(derive_seed(seed_, epoch_));
  // Fisher-Yates with our own RNG so the order is toolchain-independent.
  for (std::size_t i = order_.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
    std::swap(order_[i - 1], order_[j]);
  }
  cursor_ = 0;
}

BatchIterator::Batch BatchIterator::next() {
  if (cursor_ + static_cast<std::size_t>(batch_size_) > order_.size()) {
    ++epoch_;  // drop the remainder, start a fresh epoch
    reshuffle();
  }
  Batch b;
  for (int i = 0; i < batch_size_; ++i) {
    const int idx = order_[cursor_++];
    b.indices.push_back(idx);
    b.images.push_back(&ds_->images[static_cast<std::size_t>(idx)]);
    b.labels.push_back(&ds_->labels[static_cast<std::size_t>(idx)]);
  }
  return b;
}

}  // namespace robustseg

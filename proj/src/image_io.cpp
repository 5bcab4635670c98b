#include "robustseg/image_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace robustseg {

namespace {

void skip_header_token(std::istream& is, std::string& tok) {
  is >> tok;
  if (!is) throw std::runtime_error("image: truncated header");
}

}  // namespace

void write_pfm(const Tensor& image, const std::filesystem::path& file) {
  if (image.c != 3) throw std::invalid_argument("pfm: expected 3 channels");
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("pfm: cannot open " + file.string());
  os << "PF\n" << image.w << " " << image.h << "\n-1.0\n";
  // PFM stores rows bottom-to-top; negative scale marks little-endian.
  for (int y = image.h - 1; y >= 0; --y) {
    for (int x = 0; x < image.w; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        const float f = static_cast<float>(image.at(y, x, ch));
        os.write(reinterpret_cast<const char*>(&f), sizeof(f));
      }
    }
  }
  if (!os) throw std::runtime_error("pfm: write failed for " + file.string());
}

Tensor read_pfm(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("pfm: cannot open " + file.string());
  std::string tok;
  skip_header_token(is, tok);
  if (tok != "PF") throw std::runtime_error("pfm: bad magic in " + file.string());
  int w = 0, h = 0;
  double scale = 0.0;
  is >> w >> h >> scale;
  if (!is || w <= 0 || h <= 0 || scale >= 0.0)
    throw std::runtime_error("pfm: unsupported header in " + file.string());
  is.get();  // single whitespace after the scale
  Tensor out(h, w, 3);
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        float f;
        is.read(reinterpret_cast<char*>(&f), sizeof(f));
        out.at(y, x, ch) = static_cast<double>(f);
      }
    }
  }
  if (!is) throw std::runtime_error("pfm: truncated data in " + file.string());
  return out;
}

void write_pgm(const LabelMap& labels, const std::filesystem::path& file) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("pgm: cannot open " + file.string());
  os << "P5\n" << labels.w << " " << labels.h << "\n255\n";
  for (int y = 0; y < labels.h; ++y) {
    for (int x = 0; x < labels.w; ++x) {
      const std::int32_t v = labels.at(y, x);
      if (v < 0 || v > 255) throw std::invalid_argument("pgm: label out of byte range");
      const unsigned char b = static_cast<unsigned char>(v);
      os.write(reinterpret_cast<const char*>(&b), 1);
    }
  }
  if (!os) throw std::runtime_error("pgm: write failed for " + file.string());
}

LabelMap read_pgm(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("pgm: cannot open " + file.string());
  std::string tok;
  skip_header_token(is, tok);
  if (tok != "P5") throw std::runtime_error("pgm: bad magic in " + file.string());
  int w = 0, h = 0, maxval = 0;
  is >> w >> h >> maxval;
  if (!is || w <= 0 || h <= 0 || maxval != 255)
    throw std::runtime_error("pgm: unsupported header in " + file.string());
  is.get();
  LabelMap out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      unsigned char b;
      is.read(reinterpret_cast<char*>(&b), 1);
      out.at(y, x) = static_cast<std::int32_t>(b);
    }
  }
  if (!is) throw std::runtime_error("pgm: truncated data in " + file.string());
  return out;
}

void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& file) {
  LabelMap as_labels(mask.h, mask.w);
  for (std::size_t i = 0; i < mask.v.size(); ++i)
    as_labels.v[i] = mask.v[i] ? 255 : 0;
  write_pgm(as_labels, file);
}

}  // namespace robustseg

#include "robustseg/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace robustseg {

namespace {

constexpr char kMagic[8] = {'R', 'S', 'E', 'G', 'C', 'K', 'P', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
  for (double d : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    write_u64(os, bits);
  }
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::string read_string(std::istream& is) {
  const std::uint32_t n = read_u32(is);
  if (n > (1u << 20)) throw std::runtime_error("checkpoint: bad string length");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

}  // namespace

void save_checkpoint(const SegModel& model, const std::filesystem::path& file) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + file.string());
  os.write(kMagic, sizeof(kMagic));
  write_string(os, model.arch_id);
  write_u32(os, static_cast<std::uint32_t>(model.num_classes));
  write_u64(os, model.seed);

  std::uint32_t n_arrays = 0;
  for_each_param(model, [&](const std::string&, const std::vector<double>&) { ++n_arrays; });
  write_u32(os, n_arrays);
  for_each_param(model, [&](const std::string& name, const std::vector<double>& data) {
    write_string(os, name);
    write_u64(os, data.size());
    write_doubles(os, data);
  });
  if (!os) throw std::runtime_error("checkpoint: write failed for " + file.string());
}

SegModel load_checkpoint(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + file.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + file.string());

  const std::string arch = read_string(is);
  const int num_classes = static_cast<int>(read_u32(is));
  const std::uint64_t seed = read_u64(is);

  // Rebuild the skeleton from metadata, then overwrite every array.
  SegModel model = build_model(arch, num_classes, seed);

  std::map<std::string, std::vector<double>> arrays;
  const std::uint32_t n_arrays = read_u32(is);
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    const std::string name = read_string(is);
    const std::uint64_t count = read_u64(is);
    std::vector<double> data(count);
    for (auto& d : data) {
      const std::uint64_t bits = read_u64(is);
      std::memcpy(&d, &bits, sizeof(d));
    }
    arrays.emplace(name, std::move(data));
  }

  for_each_param(model, [&](const std::string& name, std::vector<double>& dst) {
    auto it = arrays.find(name);
    if (it == arrays.end())
      throw std::runtime_error("checkpoint: missing array " + name);
    if (it->second.size() != dst.size())
      throw std::runtime_error("checkpoint: size mismatch for " + name);
    dst = it->second;
  });
  return model;
}

}  // namespace robustseg

#pragma once

#include <filesystem>

#include "robustseg/model.hpp"

namespace robustseg {

// Single-file binary container: magic "RSEGCKP1", then arch_id, K, seed and
// every parameter array under its canonical name, little-endian float64.
// Round-trips bit-exactly. Layout is documented in the README.
void save_checkpoint(const SegModel& model, const std::filesystem::path& file);
SegModel load_checkpoint(const std::filesystem::path& file);

}  // namespace robustseg

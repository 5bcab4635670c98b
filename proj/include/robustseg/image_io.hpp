#pragma once

#include <filesystem>

#include "robustseg/tensor.hpp"

namespace robustseg {

// Lossless image files. Pixel data in the datasets is float32-valued by
// construction, so PFM (32-bit float, little-endian, 3 channels) round-trips
// exactly; labels use binary PGM with one byte per pixel.
void write_pfm(const Tensor& image, const std::filesystem::path& file);
Tensor read_pfm(const std::filesystem::path& file);

void write_pgm(const LabelMap& labels, const std::filesystem::path& file);
LabelMap read_pgm(const std::filesystem::path& file);

void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& file);

}  // namespace robustseg

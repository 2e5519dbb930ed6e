#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "alrn/dataset.hpp"
#include "alrn/tensor.hpp"

namespace alrn {

// Binary spatial mask; nonzero cells are inside.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> cells;  // row-major, height*width entries

  Mask() = default;
  Mask(int h, int w) : height(h), width(w), cells(static_cast<std::size_t>(h) * w, 0) {}

  bool at(int i, int j) const { return cells[static_cast<std::size_t>(i) * width + j] != 0; }
  double area_fraction() const;
};

Mask patch_mask(int height, int width, const PlantedPatch& patch);

// Sum of the selected attention channel over the mask's cells. For a
// spatial-softmax channel this lies in [0,1].
double attention_mass_in_mask(const Tensor3& attention, int attribute, const Mask& mask);

// Writes one attention channel as an 8-bit binary PGM, min-max
// normalized so the smallest value maps to 0 and the largest to 255.
// A constant channel maps to mid-gray 128.
void export_attention(const Tensor3& attention, int attribute,
                      const std::filesystem::path& path);

// The quantization used by export_attention, exposed for testing.
std::vector<std::uint8_t> normalize_to_bytes(const double* values, int count);

}  // namespace alrn

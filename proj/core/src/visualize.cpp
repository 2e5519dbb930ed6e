#include "alrn/visualize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace alrn {

double Mask::area_fraction() const {
  if (cells.empty()) return 0.0;
  std::size_t on = 0;
  for (std::uint8_t c : cells) on += c != 0;
  return static_cast<double>(on) / static_cast<double>(cells.size());
}

Mask patch_mask(int height, int width, const PlantedPatch& patch) {
  check_shape(patch.row >= 0 && patch.col >= 0 && patch.size >= 1 &&
                  patch.row + patch.size <= height && patch.col + patch.size <= width,
              "patch does not fit inside the grid");
  Mask m(height, width);
  for (int i = 0; i < patch.size; ++i)
    for (int j = 0; j < patch.size; ++j)
      m.cells[static_cast<std::size_t>(patch.row + i) * width + patch.col + j] = 1;
  return m;
}

double attention_mass_in_mask(const Tensor3& attention, int attribute, const Mask& mask) {
  check_shape(attribute >= 0 && attribute < attention.channels,
              "attribute index " + std::to_string(attribute) + " outside " +
                  std::to_string(attention.channels) + " channels");
  check_shape(mask.height == attention.height && mask.width == attention.width,
              "mask is " + std::to_string(mask.height) + "x" + std::to_string(mask.width) +
                  ", attention is " + std::to_string(attention.height) + "x" +
                  std::to_string(attention.width));
  const double* ch = attention.channel(attribute);
  double mass = 0.0;
  for (int p = 0; p < attention.spatial(); ++p)
    if (mask.cells[p]) mass += ch[p];
  return mass;
}

std::vector<std::uint8_t> normalize_to_bytes(const double* values, int count) {
  const auto [lo_it, hi_it] = std::minmax_element(values, values + count);
  const double lo = *lo_it, hi = *hi_it;
  std::vector<std::uint8_t> out(count);
  if (hi == lo) {
    std::fill(out.begin(), out.end(), static_cast<std::uint8_t>(128));
    return out;
  }
  const double scale = 255.0 / (hi - lo);
  for (int p = 0; p < count; ++p)
    out[p] = static_cast<std::uint8_t>(std::lround((values[p] - lo) * scale));
  return out;
}

void export_attention(const Tensor3& attention, int attribute,
                      const std::filesystem::path& path) {
  check_shape(attribute >= 0 && attribute < attention.channels,
              "attribute index " + std::to_string(attribute) + " outside " +
                  std::to_string(attention.channels) + " channels");
  const std::vector<std::uint8_t> bytes =
      normalize_to_bytes(attention.channel(attribute), attention.spatial());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "P5\n" << attention.width << " " << attention.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

}  // namespace alrn

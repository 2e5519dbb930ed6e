#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "alrn/tensor.hpp"

namespace alrn {

// On-disk tensor container.
//
// offset  size       field
// 0       4          magic "ALRT"
// 4       1          format version, 0x01
// 5       1          rank r, 1..8
// 6       4*r        dims, uint32 little-endian, each >= 1
// 6+4*r   8*prod     payload, float64 little-endian, row-major
//
// Readers reject wrong magic, unknown versions, zero dims, and any
// size mismatch, reporting the byte offset of the fault.
struct TensorData {
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
};

void write_tensor_file(const std::filesystem::path& path,
                       const std::vector<std::uint32_t>& dims,
                       const std::vector<double>& values);

TensorData read_tensor_file(const std::filesystem::path& path);

Matrix read_matrix_file(const std::filesystem::path& path);
Tensor3 read_tensor3_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const Matrix& m);
void write_tensor3_file(const std::filesystem::path& path, const Tensor3& t);

}  // namespace alrn

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace alrn {

using Vector = std::vector<double>;

// Operand shapes do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid run configuration: impossible sampling plan, missing or
// inconsistent inputs, unknown configuration keys.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed on-disk container.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void check_shape(bool ok, const std::string& message) {
  if (!ok) throw ShapeError(message);
}

// Row-major dense matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  Vector column(int c) const {
    Vector out(rows);
    for (int r = 0; r < rows; ++r) out[r] = at(r, c);
    return out;
  }

  std::size_t size() const { return data.size(); }
};

// Dense C x H x W grid, channel-major, each channel row-major.
struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int c, int h, int w, double fill = 0.0)
      : channels(c),
        height(h),
        width(w),
        data(static_cast<std::size_t>(c) * h * w, fill) {}

  int spatial() const { return height * width; }
  std::size_t size() const { return data.size(); }

  double* channel(int c) {
    return data.data() + static_cast<std::size_t>(c) * spatial();
  }
  const double* channel(int c) const {
    return data.data() + static_cast<std::size_t>(c) * spatial();
  }

  double& at(int c, int i, int j) {
    return data[(static_cast<std::size_t>(c) * height + i) * width + j];
  }
  double at(int c, int i, int j) const {
    return data[(static_cast<std::size_t>(c) * height + i) * width + j];
  }
};

bool all_finite(const std::vector<double>& values);

}  // namespace alrn

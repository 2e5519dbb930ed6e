#include "alrn/tensor_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace alrn {

static_assert(std::endian::native == std::endian::little,
              "tensor file io assumes a little-endian host");
static_assert(sizeof(double) == 8);

namespace {

constexpr char kMagic[4] = {'A', 'L', 'R', 'T'};
constexpr std::uint8_t kVersion = 0x01;
constexpr int kMaxRank = 8;

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t offset,
                       const std::string& what) {
  throw FormatError(path.string() + ": " + what + " at byte " + std::to_string(offset));
}

}  // namespace

void write_tensor_file(const std::filesystem::path& path,
                       const std::vector<std::uint32_t>& dims,
                       const std::vector<double>& values) {
  check_shape(!dims.empty() && dims.size() <= kMaxRank,
              "tensor rank must be 1.." + std::to_string(kMaxRank));
  std::size_t count = 1;
  for (std::uint32_t d : dims) {
    check_shape(d >= 1, "tensor dims must be positive");
    count *= d;
  }
  check_shape(count == values.size(),
              "dims imply " + std::to_string(count) + " values, got " +
                  std::to_string(values.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  out.put(static_cast<char>(kVersion));
  out.put(static_cast<char>(dims.size()));
  out.write(reinterpret_cast<const char*>(dims.data()),
            static_cast<std::streamsize>(dims.size() * sizeof(std::uint32_t)));
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!out) throw FormatError("short write to " + path.string());
}

TensorData read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());

  char magic[4];
  if (!in.read(magic, 4)) fail(path, 0, "truncated magic");
  if (std::memcmp(magic, kMagic, 4) != 0) fail(path, 0, "bad magic");

  char version = 0, rank_byte = 0;
  if (!in.get(version)) fail(path, 4, "truncated version");
  if (static_cast<std::uint8_t>(version) != kVersion)
    fail(path, 4, "unsupported version " +
                      std::to_string(static_cast<unsigned>(
                          static_cast<std::uint8_t>(version))));
  if (!in.get(rank_byte)) fail(path, 5, "truncated rank");
  const int rank = static_cast<std::uint8_t>(rank_byte);
  if (rank < 1 || rank > kMaxRank)
    fail(path, 5, "rank " + std::to_string(rank) + " outside 1.." +
                      std::to_string(kMaxRank));

  TensorData t;
  t.dims.resize(rank);
  if (!in.read(reinterpret_cast<char*>(t.dims.data()),
               static_cast<std::streamsize>(rank * sizeof(std::uint32_t))))
    fail(path, 6, "truncated dims");
  std::size_t count = 1;
  for (int i = 0; i < rank; ++i) {
    if (t.dims[i] == 0) fail(path, 6 + i * sizeof(std::uint32_t), "zero dim");
    count *= t.dims[i];
  }

  const std::size_t payload_offset = 6 + rank * sizeof(std::uint32_t);
  t.values.resize(count);
  if (!in.read(reinterpret_cast<char*>(t.values.data()),
               static_cast<std::streamsize>(count * sizeof(double))))
    fail(path, payload_offset, "truncated payload, expected " +
                                   std::to_string(count * sizeof(double)) + " bytes");
  char extra;
  if (in.read(&extra, 1))
    fail(path, payload_offset + count * sizeof(double), "trailing bytes");
  return t;
}

Matrix read_matrix_file(const std::filesystem::path& path) {
  TensorData t = read_tensor_file(path);
  if (t.dims.size() != 2)
    throw FormatError(path.string() + ": expected rank 2, got rank " +
                      std::to_string(t.dims.size()));
  Matrix m(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]));
  m.data = std::move(t.values);
  return m;
}

Tensor3 read_tensor3_file(const std::filesystem::path& path) {
  TensorData t = read_tensor_file(path);
  if (t.dims.size() != 3)
    throw FormatError(path.string() + ": expected rank 3, got rank " +
                      std::to_string(t.dims.size()));
  Tensor3 out(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
              static_cast<int>(t.dims[2]));
  out.data = std::move(t.values);
  return out;
}

void write_matrix_file(const std::filesystem::path& path, const Matrix& m) {
  write_tensor_file(path,
                    {static_cast<std::uint32_t>(m.rows), static_cast<std::uint32_t>(m.cols)},
                    m.data);
}

void write_tensor3_file(const std::filesystem::path& path, const Tensor3& t) {
  write_tensor_file(path,
                    {static_cast<std::uint32_t>(t.channels),
                     static_cast<std::uint32_t>(t.height),
                     static_cast<std::uint32_t>(t.width)},
                    t.data);
}

}  // namespace alrn

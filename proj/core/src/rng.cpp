#include "alrn/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace alrn {

Rng::Rng(std::uint64_t seed, std::string_view stream) {
  // FNV-1a over the stream name mixed into the seed sequence
  std::uint64_t h = 1469598103934665603ull;
  for (char ch : stream) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h),
                    static_cast<std::uint32_t>(h >> 32)};
  gen_.seed(seq);
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = mag * std::sin(angle);
  have_spare_ = true;
  return mag * std::cos(angle);
}

int Rng::uniform_int(int bound) {
  if (bound <= 0) throw std::invalid_argument("Rng::uniform_int: bound must be positive");
  const std::uint64_t n = static_cast<std::uint64_t>(bound);
  const std::uint64_t limit = ~0ull - ~0ull % n;
  std::uint64_t r;
  do {
    r = gen_();
  } while (r >= limit);
  return static_cast<int>(r % n);
}

}  // namespace alrn

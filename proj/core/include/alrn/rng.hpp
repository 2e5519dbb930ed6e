#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace alrn {

// Deterministic random stream keyed by (seed, stream name). Named
// substreams keep e.g. parameter initialization independent of episode
// sampling: changing how one stream is consumed never perturbs another.
// All draws are derived from raw mt19937_64 output, so identical seeds
// give bitwise identical sequences on every platform.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream);

  std::uint64_t next() { return gen_(); }

  // [0, 1) with 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller
  double normal();

  // unbiased integer in [0, bound)
  int uniform_int(int bound);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[static_cast<std::size_t>(uniform_int(i + 1))]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace alrn

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <vector>

#include "alrn/ops.hpp"
#include "alrn/parallel.hpp"
#include "alrn/rng.hpp"
#include "alrn/tensor.hpp"

using namespace alrn;

TEST_CASE("conv1x1 matches the worked example") {
  Tensor3 x(2, 2, 2);
  std::iota(x.data.begin(), x.data.end(), 0.0);  // ch0 = 0..3, ch1 = 4..7
  Matrix w(2, 2);
  w.data = {1.0, -1.0, 0.5, 0.5};
  Vector b = {1.0, 0.0};

  Tensor3 y = conv1x1(x, w, b);
  REQUIRE(y.channels == 2);
  REQUIRE(y.height == 2);
  REQUIRE(y.width == 2);
  for (int p = 0; p < 4; ++p) CHECK(y.channel(0)[p] == doctest::Approx(-3.0).epsilon(1e-15));
  const double ch1[4] = {2.0, 3.0, 4.0, 5.0};
  for (int p = 0; p < 4; ++p) CHECK(y.channel(1)[p] == doctest::Approx(ch1[p]).epsilon(1e-15));
}

TEST_CASE("conv1x1 rejects mismatched shapes") {
  Tensor3 x(3, 2, 2);
  Matrix w(2, 2);  // expects 2 input channels, x has 3
  Vector b = {0.0, 0.0};
  CHECK_THROWS_AS(conv1x1(x, w, b), ShapeError);
  Matrix w_ok(2, 3);
  Vector b_bad = {0.0};
  CHECK_THROWS_AS(conv1x1(x, w_ok, b_bad), ShapeError);
}

TEST_CASE("spatial_softmax normalizes every channel") {
  Rng rng(7, "softmax-prop");
  for (int trial = 0; trial < 1000; ++trial) {
    const int c = 1 + rng.uniform_int(4);
    const int h = 1 + rng.uniform_int(5);
    const int w = 1 + rng.uniform_int(5);
    Tensor3 x(c, h, w);
    for (double& v : x.data) v = rng.uniform(-50.0, 50.0);
    Tensor3 s = spatial_softmax(x);
    for (int n = 0; n < c; ++n) {
      double sum = 0.0;
      for (int p = 0; p < s.spatial(); ++p) {
        CHECK(s.channel(n)[p] >= 0.0);
        sum += s.channel(n)[p];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("spatial_softmax is shift invariant and stable for large scores") {
  Tensor3 x(1, 2, 2);
  x.data = {1.0, 2.0, 3.0, 4.0};
  Tensor3 shifted(1, 2, 2);
  for (int p = 0; p < 4; ++p) shifted.data[p] = x.data[p] + 1000.0;
  Tensor3 a = spatial_softmax(x);
  Tensor3 b = spatial_softmax(shifted);
  for (int p = 0; p < 4; ++p) CHECK(a.data[p] == doctest::Approx(b.data[p]).epsilon(1e-12));

  Tensor3 huge(1, 1, 3);
  huge.data = {1e4, -1e4, 9.9e3};
  Tensor3 s = spatial_softmax(huge);
  CHECK(all_finite(s.data));
  CHECK(s.data[0] + s.data[1] + s.data[2] == doctest::Approx(1.0));
}

TEST_CASE("spatial_mean averages positions per channel") {
  Tensor3 x(2, 2, 2);
  x.data = {0.0, 1.0, 2.0, 3.0, 10.0, 10.0, -10.0, -10.0};
  Vector m = spatial_mean(x);
  CHECK(m[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(m[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("stable_sigmoid behaves at zero, extremes, and under negation") {
  CHECK(stable_sigmoid(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(stable_sigmoid(800.0) == doctest::Approx(1.0));
  CHECK(stable_sigmoid(-800.0) == doctest::Approx(0.0));
  CHECK(std::isfinite(stable_sigmoid(800.0)));
  CHECK(std::isfinite(stable_sigmoid(-800.0)));
  Rng rng(3, "sigmoid-prop");
  for (int trial = 0; trial < 1000; ++trial) {
    const double z = rng.uniform(-700.0, 700.0);
    const double s = stable_sigmoid(z);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s + stable_sigmoid(-z) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("softmax over a vector sums to one and is shift invariant") {
  Rng rng(11, "vec-softmax");
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + rng.uniform_int(8);
    Vector z(n);
    for (double& v : z) v = rng.uniform(-30.0, 30.0);
    Vector p = softmax(z);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    Vector shifted = z;
    for (double& v : shifted) v += 17.25;
    Vector q = softmax(shifted);
    for (int i = 0; i < n; ++i) CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-12));
  }
}

TEST_CASE("cosine_similarity matches the worked example and its guards") {
  CHECK(cosine_similarity({1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}) ==
        doctest::Approx(0.9746318461970762).epsilon(1e-14));
  CHECK(cosine_similarity({1.0, 0.0}, {1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_similarity({1.0, 0.0}, {-1.0, 0.0}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(cosine_similarity({0.0, 0.0}, {1.0, 1.0}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cosine_similarity({1.0}, {1.0, 2.0}), ShapeError);

  Rng rng(5, "cosine-prop");
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + rng.uniform_int(6);
    Vector a(n), b(n);
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = rng.normal();
    const double c = cosine_similarity(a, b);
    CHECK(c >= -1.0 - 1e-12);
    CHECK(c <= 1.0 + 1e-12);
    Vector a2 = a;
    for (double& v : a2) v *= 3.5;
    CHECK(cosine_similarity(a2, b) == doctest::Approx(c).epsilon(1e-10));
  }
}

TEST_CASE("all_finite flags NaN and infinities") {
  CHECK(all_finite({0.0, -1.5, 1e300}));
  CHECK_FALSE(all_finite({0.0, std::nan("")}));
  CHECK_FALSE(all_finite({1.0 / 0.0}));
  CHECK_FALSE(all_finite({-1.0 / 0.0}));
  CHECK(all_finite({}));
}

TEST_CASE("rng streams are deterministic and independent") {
  Rng a(42, "alpha"), b(42, "alpha"), c(42, "beta"), d(43, "alpha");
  bool all_same_c = true, all_same_d = true;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t va = a.next();
    CHECK(va == b.next());
    all_same_c = all_same_c && va == c.next();
    all_same_d = all_same_d && va == d.next();
  }
  CHECK_FALSE(all_same_c);
  CHECK_FALSE(all_same_d);
}

TEST_CASE("rng uniform and normal draw sensible values") {
  Rng rng(9, "draws");
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);

  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-2.5, 7.5);
    CHECK(v >= -2.5);
    CHECK(v < 7.5);
  }
}

TEST_CASE("rng uniform_int stays in range and covers it") {
  Rng rng(13, "ints");
  std::set<int> hits;
  for (int i = 0; i < 3000; ++i) {
    const int v = rng.uniform_int(7);
    CHECK(v >= 0);
    CHECK(v < 7);
    hits.insert(v);
  }
  CHECK(hits.size() == 7);
}

TEST_CASE("rng shuffle permutes and is seed deterministic") {
  Rng r1(21, "shuffle"), r2(21, "shuffle");
  std::vector<int> v1(50), v2(50);
  std::iota(v1.begin(), v1.end(), 0);
  std::iota(v2.begin(), v2.end(), 0);
  r1.shuffle(v1);
  r2.shuffle(v2);
  CHECK(v1 == v2);
  std::vector<int> sorted = v1;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);
}

TEST_CASE("parallel_for covers every index once and respects ALRN_THREADS") {
  std::vector<int> touched(977, 0);
  parallel_for(touched.size(), [&](std::size_t i) { touched[i] += 1; });
  CHECK(std::all_of(touched.begin(), touched.end(), [](int v) { return v == 1; }));

  setenv("ALRN_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  setenv("ALRN_THREADS", "3", 1);
  CHECK(worker_count() == 3);
  unsetenv("ALRN_THREADS");
  CHECK(worker_count() >= 1);
}

TEST_CASE("parallel_for propagates worker exceptions") {
  CHECK_THROWS_AS(
      parallel_for(64, [](std::size_t i) {
        if (i == 13) throw NumericError("boom");
      }),
      NumericError);
}

#include <cmath>
#include <cstring>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "irgp/errors.hpp"
#include "irgp/rng.hpp"
#include "irgp/simd/ops.hpp"

using namespace irgp;

TEST(Rng, SameSeedSameSequence) {
  Rng a(123), b(123);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Rng, KeyedStreamsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    for (std::uint64_t t = 0; t < 20; ++t) {
      Rng r = Rng::keyed({7, rep, key_of(Stream::kNoise), t});
      firsts.insert(r());
    }
  }
  EXPECT_EQ(firsts.size(), 1000u);
  EXPECT_NE(hash_key({1, 2}), hash_key({2, 1}));
  EXPECT_NE(hash_key({1}), hash_key({1, 0}));
}

TEST(Rng, SplitAdvancesParentOnce) {
  Rng a(5), b(5);
  Rng child = a.split();
  (void)child;
  b();
  EXPECT_EQ(a(), b());
}

TEST(Rng, UniformOpenInterval) {
  Rng r(9);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Rng, NormalMoments) {
  Rng r(10);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 3.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 3.0 * std::sqrt(2.0 / n));
}

TEST(Rng, FeedsStandardDistributions) {
  Rng r(11);
  std::gamma_distribution<double> g(3.0, 2.0);
  double s = 0.0;
  for (int i = 0; i < 50000; ++i) s += g(r);
  EXPECT_NEAR(s / 50000, 6.0, 0.1);
}

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = 4.0 * r.uniform() - 2.0;
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

class SimdEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!simd::cpu_supports(simd::Isa::kAvx2)) GTEST_SKIP() << "AVX2 unavailable";
    ref = &simd::scalar_ops();
    vec = &simd::ops_for(simd::Isa::kAvx2);
  }
  const simd::Ops* ref = nullptr;
  const simd::Ops* vec = nullptr;
};

constexpr std::size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 31, 64, 1000, 1003};

}  // namespace

TEST_F(SimdEquivalence, AccumulateScaledSqdiffBitwise) {
  for (std::size_t n : kSizes) {
    const auto col = random_vec(n + 1, n + 1);
    auto a = random_vec(n + 1, n + 2);
    auto b = a;
    // Offset by one element to exercise unaligned loads.
    ref->accumulate_scaled_sqdiff(col.data() + 1, 0.3, 7.5, a.data() + 1, n);
    vec->accumulate_scaled_sqdiff(col.data() + 1, 0.3, 7.5, b.data() + 1, n);
    EXPECT_TRUE(bitwise_equal(a, b)) << "n = " << n;
  }
}

TEST_F(SimdEquivalence, AxpyBitwise) {
  for (std::size_t n : kSizes) {
    const auto x = random_vec(n, 3 * n + 1);
    auto a = random_vec(n, 3 * n + 2);
    auto b = a;
    ref->axpy(-0.731, x.data(), a.data(), n);
    vec->axpy(-0.731, x.data(), b.data(), n);
    EXPECT_TRUE(bitwise_equal(a, b)) << "n = " << n;
  }
}

TEST_F(SimdEquivalence, SubtractSquaresBitwise) {
  for (std::size_t n : kSizes) {
    const auto x = random_vec(n, 5 * n + 1);
    auto a = random_vec(n, 5 * n + 2);
    auto b = a;
    ref->subtract_squares(x.data(), a.data(), n);
    vec->subtract_squares(x.data(), b.data(), n);
    EXPECT_TRUE(bitwise_equal(a, b)) << "n = " << n;
  }
}

TEST_F(SimdEquivalence, DotAgreesToRounding) {
  for (std::size_t n : kSizes) {
    const auto x = random_vec(n, 7 * n + 1);
    const auto y = random_vec(n, 7 * n + 2);
    long double exact = 0.0L;
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      exact += static_cast<long double>(x[i]) * y[i];
      mag += std::abs(x[i] * y[i]);
    }
    const double tol = 4.0 * static_cast<double>(n + 1) * 1.2e-16 * (mag + 1.0);
    EXPECT_NEAR(ref->dot(x.data(), y.data(), n), static_cast<double>(exact), tol);
    EXPECT_NEAR(vec->dot(x.data(), y.data(), n), static_cast<double>(exact), tol);
  }
}

TEST_F(SimdEquivalence, UcbArgmaxIdentical) {
  for (std::size_t n : kSizes) {
    if (n == 0) continue;
    const auto mean = random_vec(n, 11 * n + 1);
    auto var = random_vec(n, 11 * n + 2);
    for (auto& v : var) v = std::abs(v);
    for (double scale : {0.0, 0.5, 3.7}) {
      double best_ref = 0.0, best_vec = 0.0;
      const auto i = ref->ucb_argmax(mean.data(), var.data(), scale, n, &best_ref);
      const auto j = vec->ucb_argmax(mean.data(), var.data(), scale, n, &best_vec);
      EXPECT_EQ(i, j);
      EXPECT_EQ(best_ref, best_vec);
    }
  }
}

TEST_F(SimdEquivalence, UcbArgmaxTiesAndNan) {
  for (const simd::Ops* ops : {ref, vec}) {
    std::vector<double> mean(13, 1.0), var(13, 0.0);
    EXPECT_EQ(ops->ucb_argmax(mean.data(), var.data(), 1.0, 13, nullptr), 0u);
    mean[9] = 2.0;
    mean[11] = 2.0;
    EXPECT_EQ(ops->ucb_argmax(mean.data(), var.data(), 1.0, 13, nullptr), 9u);
    mean[0] = std::nan("");
    EXPECT_EQ(ops->ucb_argmax(mean.data(), var.data(), 1.0, 13, nullptr), 9u);
    var[5] = -1.0;  // negative variance counts as zero
    mean[5] = 1.9;
    EXPECT_EQ(ops->ucb_argmax(mean.data(), var.data(), 100.0, 13, nullptr), 9u);
    std::vector<double> nans(6, std::nan(""));
    EXPECT_EQ(ops->ucb_argmax(nans.data(), var.data(), 1.0, 6, nullptr), 0u);
  }
}

TEST(SimdDispatch, ScalarAlwaysAvailable) {
  EXPECT_TRUE(simd::cpu_supports(simd::Isa::kScalar));
  EXPECT_EQ(simd::ops_for(simd::Isa::kScalar).isa, simd::Isa::kScalar);
  EXPECT_EQ(simd::isa_name(simd::Isa::kAvx2), "avx2");
}

TEST(SimdDispatch, SetActiveRoundTrip) {
  const auto before = simd::active().isa;
  simd::set_active(simd::Isa::kScalar);
  EXPECT_EQ(simd::active().isa, simd::Isa::kScalar);
  simd::set_active(before);
  EXPECT_EQ(simd::active().isa, before);
  if (!simd::cpu_supports(simd::Isa::kAvx2)) {
    EXPECT_THROW(simd::set_active(simd::Isa::kAvx2), ConfigError);
  }
}

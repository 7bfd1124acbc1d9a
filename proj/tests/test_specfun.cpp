#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <utility>
#include <thread>
#include <vector>

#include "fcp/specfun.hpp"
#include "oracle_values.hpp"

namespace {

using namespace fcp;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

TEST(MittagLeffler, ExponentialAtAlphaOne) {
  EXPECT_LT(rel(mittag_leffler(1.0, 1.0, -1.0).value, std::exp(-1.0)), 1e-12);
  for (double x : {-5.0, -0.3, 0.7, 2.0}) EXPECT_LT(rel(mittag_leffler(1.0, 1.0, x).value, std::exp(x)), 1e-12);
}

TEST(MittagLeffler, ZeroArgumentIsReciprocalGammaBeta) {
  EXPECT_EQ(mittag_leffler(0.7, 1.0, 0.0).value, 1.0);
  EXPECT_NEAR(mittag_leffler(0.7, 2.5, 0.0).value, 1.0 / std::tgamma(2.5), 1e-15);
}

TEST(MittagLeffler, HalfOrderMatchesErfcOracle) {
  const auto v = mittag_leffler(0.5, 1.0, -1.0);
  EXPECT_LT(rel(v.value, oracle::kMl05Minus1), 1e-9);
  EXPECT_LT(rel(v.value, std::exp(1.0) * std::erfc(1.0)), 1e-12);
  EXPECT_GE(v.abs_error_estimate, 0.0);
  EXPECT_TRUE(std::isfinite(v.abs_error_estimate));
  EXPECT_GT(v.terms_used, 0u);
}

TEST(MittagLeffler, CompletelyMonotoneOnNegativeAxis) {
  // Ranges where the double-precision series stays below the cancellation limit.
  for (auto [alpha, x_min] : {std::pair{0.2, -1.0}, {0.5, -3.0}, {0.8, -5.0}, {1.0, -10.0}}) {
    double prev = 1.0;
    for (int i = 0; i <= 40; ++i) {
      const double x = x_min * i / 40.0;
      const double v = mittag_leffler(alpha, 1.0, x).value;
      EXPECT_GT(v, 0.0) << alpha << " " << x;
      EXPECT_LE(v, prev + 1e-15) << alpha << " " << x;
      prev = v;
    }
  }
}

TEST(MittagLeffler, RejectsOutOfRangeParameters) {
  EXPECT_THROW(mittag_leffler(0.0, 1.0, -1.0), DomainError);
  EXPECT_THROW(mittag_leffler(1.5, 1.0, -1.0), DomainError);
  EXPECT_THROW(mittag_leffler(0.5, 0.0, -1.0), DomainError);
  EXPECT_THROW(mittag_leffler(0.5, 1.0, NAN), DomainError);
}

TEST(MittagLeffler, SurfacesCancellationAndNonConvergence) {
  EXPECT_THROW(mittag_leffler(0.5, 1.0, -10.0), CancellationLoss);
  EXPECT_THROW(mittag_leffler(0.5, 1.0, -30.0), NumericError);  // terms overflow
  SpecfunConfig tiny;
  tiny.max_terms = 5;
  EXPECT_THROW(mittag_leffler(0.5, 1.0, -1.0, tiny), NonConvergent);
}

TEST(GenMittagLeffler, ReducesToTwoParameterFunction) {
  for (int i = 0; i < 20; ++i) {
    const double alpha = 0.3 + 0.035 * i;
    const double beta = 0.5 + 0.1 * i;
    const double x = -2.0 + 0.2 * i;
    const auto two = mittag_leffler(alpha, beta, x);
    const double tol = 1e-13 * std::max(1.0, two.cancellation_ratio());
    EXPECT_LT(rel(gen_mittag_leffler(alpha, beta, 1.0, x).value, two.value), tol) << alpha << " " << x;
  }
  EXPECT_LT(rel(gen_mittag_leffler(0.5, 1.0, 1.0, -1.0).value, oracle::kMl05Minus1), 1e-12);
}

TEST(GenMittagLeffler, GoldenValues) {
  EXPECT_LT(rel(gen_mittag_leffler(1.0, 2.0, 2.0, -1.0).value, oracle::kGenMl_1_2_2_m1), 1e-12);
  EXPECT_LT(rel(gen_mittag_leffler(0.6, 1.6, 2.0, 0.0).value, oracle::kInvGamma16), 1e-13);
}

TEST(FoxWright, ExponentialSpec) {
  FoxWrightSpec spec({{1.0, 1.0}}, {{1.0, 1.0}});
  EXPECT_LT(rel(fox_wright(spec, 0.3).value, std::exp(0.3)), 1e-12);
}

TEST(FoxWright, ZeroArgumentIsGammaRatio) {
  FoxWrightSpec spec({{1.5, 0.5}, {2.0, 1.0}}, {{0.7, 0.8}, {1.2, 0.6}});
  const double expect = std::tgamma(1.5) * std::tgamma(2.0) / (std::tgamma(0.7) * std::tgamma(1.2));
  EXPECT_LT(rel(fox_wright(spec, 0.0).value, expect), 1e-13);
}

TEST(FoxWright, LowerPoleAnnihilatesTerms) {
  // 1/Gamma(1 - h + j) vanishes for j < h, so the series starts at j = h.
  FoxWrightSpec spec({{1.0, 1.0}, {1.0, 1.0}}, {{-1.0, 1.0}, {1.0, 1.0}});
  // sum_{j>=2} j! z^j / ((j-2)! j!) = z^2 e^z
  const double z = -0.4;
  EXPECT_LT(rel(fox_wright(spec, z).value, z * z * std::exp(z)), 1e-12);
  EXPECT_EQ(fox_wright(spec, 0.0).value, 0.0);
}

TEST(FoxWright, MarginCheckedAtConstruction) {
  EXPECT_THROW(FoxWrightSpec({{1.0, 2.0}}, {{1.0, 0.5}}), InvalidSpec);
  EXPECT_THROW(FoxWrightSpec({{1.0, 1.0}}, {{1.0, 0.0}}), InvalidSpec);
  EXPECT_NO_THROW(FoxWrightSpec({{1.0, 0.6}, {1.0, 1.0}}, {{0.0, 0.6}, {1.0, 0.8}}));
  EXPECT_NEAR(FoxWrightSpec({{1.0, 0.6}, {1.0, 1.0}}, {{0.0, 0.6}, {1.0, 0.8}}).convergence_margin(), -0.2, 1e-15);
}

TEST(GenBinom, SmallCases) {
  EXPECT_EQ(gen_binom(1.0, 2), 0.0);
  EXPECT_DOUBLE_EQ(gen_binom(0.5, 2), -0.125);
  EXPECT_DOUBLE_EQ(gen_binom(0.5, 1), 0.5);
  EXPECT_EQ(gen_binom(0.3, 0), 1.0);
}

TEST(GenBinom, NewtonSeriesAtOneConvergesToZero) {
  for (double alpha : {0.2, 0.5, 0.9}) {
    // sum_{j<=n} (-1)^j C(alpha,j) = (-1)^n C(alpha-1,n), decaying like n^-alpha.
    double partial = 0.0, prev = 2.0;
    for (std::size_t j = 0; j < 200; ++j) {
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      partial += sign * gen_binom(alpha, j);
      EXPECT_NEAR(partial, sign * gen_binom(alpha - 1.0, j), 1e-14);
      EXPECT_LT(std::abs(partial), prev + 1e-15);
      prev = std::abs(partial);
    }
    EXPECT_LT(prev, std::pow(200.0, -alpha));
  }
}

TEST(Factorials, RisingAndFalling) {
  EXPECT_EQ(rising_factorial(2.0, 3), 24.0);
  EXPECT_EQ(rising_factorial(0.5, 0), 1.0);
  EXPECT_EQ(falling_factorial(4.0, 2), 12.0);
  EXPECT_EQ(falling_factorial(1.0, 3), 0.0);
  EXPECT_NEAR(falling_factorial(0.5, 2), -0.25, 1e-16);
}

TEST(Stirling, SmallTriangle) {
  EXPECT_EQ(stirling_first(0, 0), 1);
  EXPECT_EQ(stirling_first(1, 1), 1);
  EXPECT_EQ(stirling_first(3, 0), 0);
  EXPECT_EQ(stirling_first(4, 2), 11);
  EXPECT_EQ(stirling_first(4, 1), -6);
  EXPECT_EQ(stirling_first(5, 3), 35);
  EXPECT_EQ(stirling_first(3, 5), 0);
}

TEST(Stirling, FallingFactorialExpansionIsExact) {
  using boost::multiprecision::cpp_int;
  for (std::size_t k = 0; k <= 30; ++k) {
    for (int x = 1; x <= 6; ++x) {
      cpp_int lhs = 0, xp = 1;
      for (std::size_t h = 0; h <= k; ++h) {
        lhs += stirling_first(k, h) * xp;
        xp *= x;
      }
      cpp_int rhs = 1;
      for (std::size_t i = 0; i < k; ++i) rhs *= cpp_int(x) - cpp_int(i);
      EXPECT_EQ(lhs, rhs) << "k=" << k << " x=" << x;
    }
  }
}

TEST(Stirling, LargeEntriesExceedNativeWidth) {
  // |s(64,1)| = 63!
  boost::multiprecision::cpp_int f = 1;
  for (int i = 2; i <= 63; ++i) f *= i;
  EXPECT_EQ(stirling_first(64, 1), -f);
  EXPECT_EQ(stirling_first(64, 64), 1);
  EXPECT_THROW(stirling_first(65, 1), OutOfRange);
  EXPECT_NO_THROW(stirling_first(70, 2, 80));
}

TEST(Stirling, ConcurrentFirstAccessIsConsistent) {
  std::vector<std::thread> pool;
  std::vector<boost::multiprecision::cpp_int> got(8);
  for (int i = 0; i < 8; ++i) pool.emplace_back([&, i] { got[i] = stirling_first(40 + i, 7); });
  for (auto& t : pool) t.join();
  for (int i = 0; i < 8; ++i) {
    const auto k = static_cast<std::size_t>(40 + i);
    EXPECT_EQ(got[i], stirling_first(k - 1, 6) - (k - 1) * stirling_first(k - 1, 7));
  }
}

TEST(RecipGamma, PolesAreExactZeros) {
  for (double w : {0.0, -1.0, -2.0, -3.0, -50.0}) EXPECT_EQ(recip_gamma_signed(w), 0.0);
}

TEST(RecipGamma, ReflectionAndRoundTrip) {
  EXPECT_EQ(recip_gamma_signed(1.0), 1.0);
  EXPECT_LT(rel(recip_gamma_signed(-0.5), oracle::kInvGammaMinusHalf), 1e-14);
  EXPECT_LT(rel(recip_gamma_signed(1.6), oracle::kInvGamma16), 1e-14);
  for (int i = 0; i < 60; ++i) {
    const double w = -7.3 + 0.31 * i;
    if (std::abs(w - std::round(w)) < 1e-3 && w <= 0) continue;
    EXPECT_LT(rel(recip_gamma_signed(w) * std::tgamma(w), 1.0), 1e-12) << w;
  }
  EXPECT_GT(recip_gamma_signed(170.5), 0.0);
  EXPECT_LT(recip_gamma_signed(170.5), 1e-300);
}

}  // namespace

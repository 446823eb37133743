#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlc/inequalities.hpp"
#include "nlc/littlewood_paley.hpp"

using namespace nlc;
using namespace nlc::lp;

namespace {

// Independent evaluation of the radial profile: theta(r) = 1 below 3/4, 0 above 4/3.
double oracle_theta(double r) {
  const double t = (4.0 / 3.0 - r) / (4.0 / 3.0 - 0.75);
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double oracle_phi(int j, double r) { return oracle_theta(r / std::pow(2.0, j + 1)) - oracle_theta(r / std::pow(2.0, j)); }

SpectralScalar mode(const Grid& g, int kx, int ky) {
  return sample_spectral(g, [=](const auto& x) { return std::sin(kx * x[0] + ky * x[1]); });
}

}  // namespace

TEST(Filter, RangeAndPartition) {
  for (int dim : {2, 3}) {
    for (int n : {16, 32, 64}) {
      const Grid g(dim, n);
      const DyadicFilter f(g);
      EXPECT_EQ(f.j_min(), -1);
      const int expected = static_cast<int>(std::ceil(std::log2(n / 2.0)));
      EXPECT_GE(f.j_max(), expected);
      if (dim == 2) {
        EXPECT_EQ(f.j_max(), expected);
      }
      for (std::size_t i = 1; i < g.spec_size(); ++i) EXPECT_NEAR(f.partition_sum(i), 1.0, 1e-12);
    }
  }
}

TEST(Filter, UnitWavevectorPartition) {
  const DyadicFilter f(Grid(2, 32));
  double s = 0.0;
  for (int j = f.j_min(); j <= f.j_max(); ++j) s += profile_at(j, 1.0);
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Filter, ProfileSupport) {
  EXPECT_EQ(profile(0.5), 0.0);
  EXPECT_EQ(profile(0.74), 0.0);
  EXPECT_EQ(profile(2.7), 0.0);
  EXPECT_GT(profile(1.0), 0.0);
  EXPECT_NEAR(profile(3.0) + profile(1.5), 1.0, 1e-15);
}

TEST(Filter, MatchesOracle) {
  for (double r : {0.8, 1.0, 1.3, 2.0, 2.5, 4.0, 7.3}) {
    for (int j = -1; j <= 4; ++j) EXPECT_NEAR(profile_at(j, r), oracle_phi(j, r), 1e-15);
  }
}

TEST(Filter, AtMostTwoNeighbours) {
  const Grid g(2, 64);
  const DyadicFilter f(g);
  for (std::size_t i = 0; i < g.spec_size(); ++i)
    for (int j = f.j_min(); j <= f.j_max(); ++j)
      for (int jj = j + 2; jj <= f.j_max(); ++jj) EXPECT_EQ(f.weight(j, i) * f.weight(jj, i), 0.0);
}

TEST(Block, DisjointSupportGivesZero) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const SpectralScalar u = mode(g, 4, 0);
  EXPECT_LT(l2_norm(apply_block(u, 0, f).block), 1e-14);
  EXPECT_LT(l2_norm(apply_block(u, 4, f).block), 1e-14);
}

TEST(Block, SumReconstructsPureMode) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const SpectralScalar u = mode(g, 4, 0);
  SpectralScalar s(g);
  for (int j = f.j_min(); j <= f.j_max(); ++j) s += apply_block(u, j, f).block;
  EXPECT_LT(l2_norm(s - u), 1e-14 * l2_norm(u));
}

TEST(Block, PureModeNorm) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const SpectralScalar u = mode(g, 2, 3);
  const double r = std::sqrt(13.0);
  for (int j = f.j_min(); j <= f.j_max(); ++j)
    EXPECT_NEAR(l2_norm(apply_block(u, j, f).block), oracle_phi(j, r) * l2_norm(u), 1e-12);
}

TEST(Block, OutOfRangeFlagged) {
  const Grid g(2, 16);
  const DyadicFilter f(g);
  const auto r = apply_block(mode(g, 1, 0), 20, f);
  EXPECT_TRUE(r.out_of_range);
  EXPECT_EQ(l2_norm(r.block), 0.0);
}

TEST(Decomposition, SumsToMeanFree) {
  const Grid g(3, 32);
  const DyadicFilter f(g);
  SpectralSupport sup;
  sup.kmin = 0.0;
  const SpectralScalar u = random_field(g, 17, sup);
  const BlockDecomposition d = decompose(u, f);
  SpectralScalar s(g);
  for (const auto& b : d.blocks) s += b;
  const SpectralScalar mean_free = u - constant_field(g, mean(u));
  EXPECT_LT(l2_norm(s - mean_free), 1e-10 * l2_norm(u));
}

TEST(Decomposition, AlmostOrthogonal) {
  const Grid g(2, 64);
  const DyadicFilter f(g);
  const SpectralScalar u = random_field(g, 5);
  const auto d = decompose(u, f);
  for (std::size_t a = 0; a < d.blocks.size(); ++a)
    for (std::size_t b = a + 2; b < d.blocks.size(); ++b) EXPECT_EQ(inner(d.blocks[a], d.blocks[b]), 0.0);
}

TEST(Besov, ConstantIsZero) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const BesovReport r = besov_norm(constant_field(g, 3.0), 1.0, f);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_NEAR(r.mean_norm, 3.0 * 2.0 * std::numbers::pi, 1e-12);
}

TEST(Besov, Sin4xIsPiRoot2) {
  const Grid g(2, 64);
  const DyadicFilter f(g);
  const SpectralScalar u = sample_spectral(g, [](const auto& x) { return std::sin(4 * x[0]); });
  EXPECT_NEAR(besov(u, 0.0, f), std::numbers::pi * std::sqrt(2.0), 1e-10);
}

TEST(Besov, Sin4xRatioFromProfile) {
  const Grid g(2, 64);
  const DyadicFilter f(g);
  const SpectralScalar u = sample_spectral(g, [](const auto& x) { return std::sin(4 * x[0]); });
  const double th = oracle_theta(1.0);
  const double expected = 2.0 * th + 4.0 * (1.0 - th);  // j = 1 and j = 2 contribute
  EXPECT_NEAR(besov(u, 1.0, f) / besov(u, 0.0, f), expected, 1e-12);
}

TEST(Besov, AbsoluteHomogeneity) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const SpectralScalar u = random_field(g, 4);
  for (double c : {-3.0, 0.5, 7.0})
    EXPECT_NEAR(besov(c * u, 0.7, f), std::abs(c) * besov(u, 0.7, f), 1e-12 * std::abs(c) * besov(u, 0.7, f));
}

TEST(Besov, PowerMatchesGradient) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const SpectralScalar u = random_field(g, 8);
  EXPECT_NEAR(besov(u, 1.0, f, 1), besov(gradient(u), 1.0, f), 1e-12 * besov(u, 1.0, f, 1));
}

TEST(Besov, TruncationMassVisible) {
  const Grid g(2, 16);
  const DyadicFilter f(g);
  const SpectralScalar u = random_field(g, 2);
  EXPECT_LT(besov_norm(u, 0.0, f).truncation_mass, 1e-12 * l2_norm(u));
}

TEST(LowHigh, SumsBack) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  SpectralSupport sup;
  sup.kmin = 0.0;
  const SpectralScalar u = random_field(g, 12, sup);
  auto [lo, hi] = lowhigh_split(u, 1, f);
  EXPECT_LT(l2_norm(lo + hi - u), 1e-14 * l2_norm(u));
}

TEST(LowHigh, AllLowAtTop) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const SpectralScalar u = mode(g, 8, 0);
  auto [lo, hi] = lowhigh_split(u, f.j_max(), f);
  EXPECT_LT(l2_norm(hi), 1e-14);
}

TEST(LowHigh, SeparatesScales) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const SpectralScalar u1 = mode(g, 1, 0);
  const SpectralScalar u8 = mode(g, 8, 0);
  auto [lo, hi] = lowhigh_split(u1 + u8, 1, f);
  EXPECT_LT(l2_norm(lo - u1), 1e-13);
  EXPECT_LT(l2_norm(hi - u8), 1e-13);
}

TEST(LowHigh, ThresholdDefault) {
  const DyadicFilter f(Grid(2, 64));
  EXPECT_EQ(default_threshold(0.3, f), 1);
  EXPECT_EQ(default_threshold(100.0, f), -1);
  EXPECT_EQ(default_threshold(1e-9, f), f.j_max());
  EXPECT_THROW(lowhigh_split(SpectralScalar(f.grid()), 40, f), std::invalid_argument);
}

TEST(Bernstein, PureModeRatio) {
  const Grid g(2, 64);
  for (int j = 0; j <= 4; ++j) {
    const int k = 1 << j;
    const SpectralScalar u = mode(g, k, 0);
    EXPECT_NEAR(l2_norm(gradient(u)) / l2_norm(u), static_cast<double>(k), 1e-12 * k);
  }
}

TEST(Bernstein, RandomAnnuli) {
  for (int dim : {2, 3}) {
    const DyadicFilter f(Grid(dim, dim == 2 ? 64 : 16));
    const BernsteinReport r = verify_bernstein(20, f, 42);
    EXPECT_TRUE(r.passed());
    EXPECT_FALSE(r.bands.empty());
    for (const auto& b : r.bands) {
      EXPECT_GE(b.min_ratio, 0.75 * (1 - 1e-12));
      EXPECT_LE(b.max_ratio, 8.0 / 3.0 * (1 + 1e-12));
    }
  }
}

TEST(Bernstein, Deterministic) {
  const DyadicFilter f(Grid(2, 32));
  const auto a = verify_bernstein(5, f, 9);
  const auto b = verify_bernstein(5, f, 9);
  ASSERT_EQ(a.bands.size(), b.bands.size());
  for (std::size_t i = 0; i < a.bands.size(); ++i) {
    EXPECT_EQ(a.bands[i].min_ratio, b.bands[i].min_ratio);
    EXPECT_EQ(a.bands[i].max_ratio, b.bands[i].max_ratio);
  }
}

TEST(ProductLaw, SinBaselineFinite) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const SpectralScalar u = mode(g, 1, 0);
  const double r = besov(multiply(u, u, ProductRule::exact), 1.0, f) / (besov(u, 1.0, f) * besov(u, 1.0, f));
  EXPECT_TRUE(std::isfinite(r));
  EXPECT_GT(r, 0.0);
}

TEST(ProductLaw, ScaleInvariant) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const SpectralScalar u = random_field(g, 1), v = random_field(g, 2);
  const double r1 = besov(multiply(u, v, ProductRule::exact), 1.0, f) / (besov(u, 1.0, f) * besov(v, 1.0, f));
  const SpectralScalar u2 = 2.0 * u;
  const double r2 = besov(multiply(u2, v, ProductRule::exact), 1.0, f) / (besov(u2, 1.0, f) * besov(v, 1.0, f));
  EXPECT_NEAR(r1, r2, 1e-12 * r1);
}

TEST(ProductLaw, StableUnderRefinement) {
  const auto r = verify_product_law(20, 1.0, 1.0, 2, {32, 64}, 3);
  EXPECT_TRUE(r.passed());
  EXPECT_THROW(verify_product_law(1, 2.0, 1.0, 2, {32}, 0), std::invalid_argument);
}

TEST(Commutator, ConstantAdvectionVanishes) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  SpectralVector u(g);
  u[0] = constant_field(g, 1.3);
  u[1] = constant_field(g, -0.4);
  EXPECT_LT(commutator_sum(u, random_field(g, 6), 1.0, f), 1e-10);
}

TEST(Commutator, ConstantScalarVanishes) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  EXPECT_EQ(commutator_sum(random_vector(g, 2), constant_field(g, 2.0), 1.0, f), 0.0);
}

TEST(Commutator, StableUnderRefinement) {
  const auto r = verify_commutator(10, 1.0, 2, {32, 64}, 5);
  EXPECT_TRUE(r.passed());
  const auto r0 = verify_commutator(10, 0.0, 2, {32, 64}, 5);
  EXPECT_TRUE(r0.passed());
}

TEST(Interpolation, Endpoints) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const SpectralScalar u = random_field(g, 10);
  EXPECT_NEAR(verify_interpolation(u, 0.5, 2.0, 1.0, f).constant, 1.0, 1e-12);
  EXPECT_NEAR(verify_interpolation(u, 0.5, 2.0, 0.0, f).constant, 1.0, 1e-12);
  EXPECT_LE(verify_interpolation(u, 0.5, 2.0, 0.3, f).constant, 1.0 + 1e-12);
}

TEST(Interpolation, PureModeClosedForm) {
  const Grid g(2, 32);
  const DyadicFilter f(g);
  const SpectralScalar u = mode(g, 3, 0);
  auto weight = [](double s) {
    double w = 0.0;
    for (int j = -1; j <= 5; ++j) w += std::pow(2.0, j * s) * oracle_phi(j, 3.0);
    return w;
  };
  const double s1 = 0.5, s2 = 1.5, th = 0.4, s = th * s1 + (1 - th) * s2;
  const double expected = weight(s) / (std::pow(weight(s1), th) * std::pow(weight(s2), 1 - th));
  EXPECT_NEAR(verify_interpolation(u, s1, s2, th, f).constant, expected, 1e-12);
}

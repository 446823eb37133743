#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nlc/diagnostics.hpp"

using namespace nlc;

namespace {

FluidParams exact_params(double mu, double nu, double gamma) {
  FluidParams fp;
  fp.visc = Viscosity{mu, nu - 2.0 * mu};
  fp.law = PressureLaw(gamma);
  fp.rule = ProductRule::exact;
  return fp;
}

PairedTrajectory short_pair(const Grid& g, double nu, double T) {
  FluidParams fp;
  fp.visc = Viscosity{1.0, nu - 2.0};
  fp.law = PressureLaw(2.0);
  PresetParams pp;
  pp.eps1 = pp.eps2 = 0.2;
  const CompressibleState c0 = make_compressible(g, pp);
  StepperConfig cfg;
  cfg.dt = 2.5e-4;
  cfg.snapshot_every = 20;
  PairedTrajectory p;
  p.compressible = run_to(c0, T, cfg, fp).snapshots;
  p.incompressible = run_to(make_incompressible(c0), T, cfg, fp).snapshots;
  return p;
}

}  // namespace

TEST(Trapezoid, ExactOnLinear) {
  const std::vector<double> t{0.0, 0.1, 0.35, 1.0};
  std::vector<double> f;
  for (double x : t) f.push_back(2.0 * x + 1.0);
  EXPECT_NEAR(trapezoid(t, f), 2.0, 1e-15);
  EXPECT_EQ(trapezoid({0.0}, {3.0}), 0.0);
}

TEST(Paired, MismatchedTrajectoriesAreRejected) {
  const Grid g(2, 16);
  PresetParams pp;
  const CompressibleState c = make_compressible(g, pp);
  PairedTrajectory p;
  p.compressible = {c, c};
  p.incompressible = {make_incompressible(c)};
  EXPECT_THROW(p.validate(), std::invalid_argument);
  auto later = make_incompressible(c);
  later.t = 0.5;
  p.incompressible.push_back(later);
  EXPECT_THROW(p.validate(), std::invalid_argument);
  FluidParams fp;
  const lp::DyadicFilter f(g);
  EXPECT_THROW(compute_functionals(p, fp, f, 0), std::invalid_argument);
}

TEST(Paired, DifferentGridsAreRejected) {
  PresetParams pp;
  PairedTrajectory p;
  p.compressible = {make_compressible(Grid(2, 16), pp)};
  p.incompressible = {make_incompressible(Grid(2, 32), pp)};
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Functionals, IdenticalSolenoidalDataHasZeroPerturbation) {
  const Grid g(2, 32);
  PresetParams pp;
  pp.name = "taylor-green";
  const CompressibleState c = make_compressible(g, pp);
  PairedTrajectory p;
  p.compressible = {c};
  p.incompressible = {make_incompressible(c)};
  FluidParams fp;
  fp.visc = Viscosity{1.0, 23.0};
  const lp::DyadicFilter f(g);
  const FunctionalSeries s = compute_functionals(p, fp, f, lp::default_threshold(fp.visc.nu(), f));
  ASSERT_EQ(s.samples.size(), 1u);
  EXPECT_LT(s.samples[0].pu, 1e-14);
  EXPECT_LT(s.samples[0].qu, 1e-14);
  EXPECT_EQ(s.samples[0].delta, 0.0);
  EXPECT_EQ(s.samples[0].a_mid, 0.0);
  EXPECT_GT(s.samples[0].V_lo, 0.0);
  EXPECT_EQ(s.Y, 0.0);  // single snapshot
}

TEST(Functionals, InvariantUnderSnapshotPermutation) {
  const Grid g(2, 32);
  PairedTrajectory p = short_pair(g, 25.0, 0.02);
  ASSERT_GE(p.compressible.size(), 3u);
  FluidParams fp;
  fp.visc = Viscosity{1.0, 23.0};
  fp.law = PressureLaw(2.0);
  const lp::DyadicFilter f(g);
  const int j0 = lp::default_threshold(fp.visc.nu(), f);
  const FunctionalSeries a = compute_functionals(p, fp, f, j0);
  std::mt19937 rng(4);
  std::vector<std::size_t> perm(p.compressible.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  PairedTrajectory q;
  for (std::size_t i : perm) {
    q.compressible.push_back(p.compressible[i]);
    q.incompressible.push_back(p.incompressible[i]);
  }
  const FunctionalSeries b = compute_functionals(q, fp, f, j0);
  EXPECT_EQ(a.X, b.X);
  EXPECT_EQ(a.Y, b.Y);
  EXPECT_EQ(a.Z, b.Z);
  EXPECT_EQ(a.W, b.W);
  EXPECT_EQ(a.M_proxy, b.M_proxy);
  EXPECT_EQ(a.blowup_integral, b.blowup_integral);
}

TEST(Functionals, ThresholdOutOfRangeThrows) {
  const Grid g(2, 16);
  PresetParams pp;
  const CompressibleState c = make_compressible(g, pp);
  PairedTrajectory p{{c}, {make_incompressible(c)}};
  const lp::DyadicFilter f(g);
  FluidParams fp;
  EXPECT_THROW(compute_functionals(p, fp, f, f.j_max() + 1), std::invalid_argument);
}

TEST(Functionals, TheoremCheckAssembly) {
  const Grid g(2, 32);
  PairedTrajectory p = short_pair(g, 25.0, 0.02);
  FluidParams fp;
  fp.visc = Viscosity{1.0, 23.0};
  fp.law = PressureLaw(2.0);
  const lp::DyadicFilter f(g);
  const FunctionalSeries s = compute_functionals(p, fp, f, lp::default_threshold(25.0, f));
  const TheoremCheck tc = theorem_check(s);
  EXPECT_EQ(tc.nu, 25.0);
  EXPECT_EQ(tc.E, tc.E_linf + tc.E_l1);
  EXPECT_DOUBLE_EQ(tc.nu_a_sup, 25.0 * tc.a_sup);
  EXPECT_GT(tc.a_sup, 0.0);
  EXPECT_GT(tc.E_linf, 0.0);
  EXPECT_GT(tc.M_proxy, 0.0);
  EXPECT_TRUE(std::isfinite(tc.blowup_integral));
  EXPECT_NEAR(tc.rate_bound_shape, 0.2, 1e-15);
  // initial data are matched: the perturbation starts from the gradient part only
  EXPECT_LT(s.samples.front().pu, 1e-14);
  EXPECT_EQ(s.samples.front().delta, 0.0);
}

TEST(Blowup, FrozenModeIntegratesLinearly) {
  const Grid g(2, 32);
  PresetParams pp;
  pp.name = "rest";
  CompressibleState c = make_compressible(g, pp);
  c.v[0] = sample_spectral(g, [](const auto& x) { return std::sin(x[1]); });
  const lp::DyadicFilter f(g);
  const double rate = lp::besov(c.v, 1.0, f, 1);
  std::vector<CompressibleState> traj;
  for (double t : {0.0, 0.25, 0.5, 1.0}) {
    c.t = t;
    traj.push_back(c);
  }
  EXPECT_NEAR(blowup_integral(traj, f), rate, 1e-14 * rate);
  EXPECT_NEAR(blowup_integrand(c, f), rate, 0.0);
}

TEST(Blowup, AdditiveOverSubintervals) {
  const Grid g(2, 32);
  const PairedTrajectory p = short_pair(g, 25.0, 0.03);
  const auto& tr = p.compressible;
  ASSERT_GE(tr.size(), 4u);
  const lp::DyadicFilter f(g);
  const double whole = blowup_integral(tr, f);
  for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
    const std::vector<CompressibleState> lo(tr.begin(), tr.begin() + static_cast<long>(k) + 1);
    const std::vector<CompressibleState> hi(tr.begin() + static_cast<long>(k), tr.end());
    EXPECT_NEAR(blowup_integral(lo, f) + blowup_integral(hi, f), whole, 1e-12 * whole);
  }
  EXPECT_THROW(blowup_integral({tr.front()}, f), std::invalid_argument);
}

TEST(Residual, ResumsToPrimitiveEquations) {
  const Grid g(2, 64);
  const lp::DyadicFilter f(g);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const RandomPair rp = random_pair(g, seed);
    const ResidualReport r = residual_report(rp.compressible, rp.incompressible, exact_params(1.0, 3.0, 1.4), f);
    EXPECT_LT(r.residual_incompressible, 1e-8) << seed;
    EXPECT_LT(r.residual_compressible, 1e-8) << seed;
    EXPECT_LT(r.residual_mass, 1e-8) << seed;
    EXPECT_LT(r.residual_director, 1e-8) << seed;
    EXPECT_GT(r.term("H1_2").besov, 0.0);
  }
}

TEST(Residual, ThreeDimensional) {
  const Grid g(3, 32);
  const lp::DyadicFilter f(g);
  const RandomPair rp = random_pair(g, 77, 2);
  const ResidualReport r = residual_report(rp.compressible, rp.incompressible, exact_params(0.5, 4.0, 2.0), f);
  EXPECT_LT(r.max_relative(), 1e-8);
}

TEST(Residual, FlippedTransportSignBreaksReconstruction) {
  const Grid g(2, 64);
  const lp::DyadicFilter f(g);
  const RandomPair rp = random_pair(g, 5);
  const FluidParams fp = exact_params(1.0, 3.0, 1.4);
  const ResidualReport good = residual_report(rp.compressible, rp.incompressible, fp, f, 1.0);
  const ResidualReport bad = residual_report(rp.compressible, rp.incompressible, fp, f, -1.0);
  EXPECT_LT(good.residual_incompressible, 1e-8);
  EXPECT_GT(bad.residual_incompressible, 1e-3);
  EXPECT_EQ(good.residual_mass, bad.residual_mass);
}

TEST(Residual, VanishingPerturbationKillsSourceTerms) {
  const Grid g(2, 32);
  const lp::DyadicFilter f(g);
  RandomPair rp = random_pair(g, 9);
  rp.compressible.a = SpectralScalar(g);
  rp.compressible.v = rp.incompressible.V;
  rp.compressible.d = rp.incompressible.D;
  const ResidualReport r = residual_report(rp.compressible, rp.incompressible, exact_params(1.0, 3.0, 1.4), f);
  EXPECT_EQ(r.term("H1_1").besov, 0.0);
  EXPECT_EQ(r.term("H1_4").besov, 0.0);
  EXPECT_EQ(r.term("H1_5").besov, 0.0);
  EXPECT_EQ(r.term("H1_6").besov, 0.0);
  EXPECT_EQ(r.term("G").besov, 0.0);
  EXPECT_LT(r.max_relative(), 1e-8);
}

TEST(Residual, ConstantDirectorHasNoElasticSource) {
  const Grid g(2, 32);
  const lp::DyadicFilter f(g);
  RandomPair rp = random_pair(g, 10);
  rp.compressible.d = SpectralVector(g);
  rp.compressible.d[1] = constant_field(g, 1.0);
  rp.incompressible.D = rp.compressible.d;
  const ResidualReport r = residual_report(rp.compressible, rp.incompressible, exact_params(1.0, 3.0, 1.4), f);
  EXPECT_EQ(r.term("H1_6").besov, 0.0);
  EXPECT_EQ(r.term("G").besov, 0.0);
  EXPECT_THROW(r.term("nope"), std::out_of_range);
}

#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "nlc/integrator.hpp"

using namespace nlc;

namespace {

using M2 = std::array<std::array<double, 2>, 2>;

M2 mul(const M2& a, const M2& b) {
  M2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return c;
}

// Independent oracle: Taylor series of exp(A / 2^s) followed by s squarings.
M2 expm_oracle(const M2& A) {
  double nrm = 0.0;
  for (auto& r : A)
    for (double x : r) nrm = std::max(nrm, std::abs(x));
  int s = 0;
  while (nrm > 1e-3) {
    nrm /= 2;
    ++s;
  }
  M2 B{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) B[i][j] = A[i][j] / std::pow(2.0, s);
  M2 E{{{1, 0}, {0, 1}}}, term = E;
  for (int n = 1; n < 20; ++n) {
    term = mul(term, B);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) term[i][j] /= n;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) E[i][j] += term[i][j];
  }
  for (int k = 0; k < s; ++k) E = mul(E, E);
  return E;
}

double diff(const Mat2& a, const M2& b) {
  return std::max({std::abs(a.m00 - b[0][0]), std::abs(a.m01 - b[0][1]), std::abs(a.m10 - b[1][0]),
                   std::abs(a.m11 - b[1][1])});
}

double diff(const Mat2& a, const Mat2& b) {
  return std::max({std::abs(a.m00 - b.m00), std::abs(a.m01 - b.m01), std::abs(a.m10 - b.m10), std::abs(a.m11 - b.m11)});
}

// phi functions from the integral definitions by composite Gauss-Legendre quadrature.
std::pair<Mat2, Mat2> phi_oracle(double kappa, double nu, double h) {
  const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                        0.2369268850561891};
  Mat2 p1{}, p2{};
  const int panels = 200;
  for (int p = 0; p < panels; ++p) {
    const double lo = static_cast<double>(p) / panels, hi = static_cast<double>(p + 1) / panels;
    for (int q = 0; q < 5; ++q) {
      const double th = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[q];
      const double w = 0.5 * (hi - lo) * gw[q];
      const Mat2 E = acoustic_exponential(kappa, nu, (1.0 - th) * h);
      p1 = p1 + w * E;
      p2 = p2 + (w * th) * E;
    }
  }
  return {p1, p2};
}

FluidParams fluid(double mu, double lambda, double gamma = 2.0) {
  FluidParams p;
  p.visc = Viscosity{mu, lambda};
  p.law = PressureLaw(gamma);
  return p;
}

// A'' + nu A' + A = 0, A(0) = eps, A'(0) = 0 (one Fourier mode with |k| = 1).
std::pair<double, double> damped_oscillator(double nu, double eps, double t) {
  const double disc = nu * nu / 4.0 - 1.0;
  if (std::abs(disc) < 1e-14) return {eps * (1 + t) * std::exp(-t), -eps * t * std::exp(-t)};
  if (disc > 0) {
    const double q = std::sqrt(disc);
    const double rp = -nu / 2 + q, rm = -nu / 2 - q;
    const double A = eps * (rp * std::exp(rm * t) - rm * std::exp(rp * t)) / (rp - rm);
    const double dA = eps * (std::exp(rm * t) - std::exp(rp * t)) / (rp - rm);
    return {A, dA};
  }
  const double w = std::sqrt(-disc), s = -nu / 2;
  const double A = eps * std::exp(s * t) * (std::cos(w * t) - s / w * std::sin(w * t));
  const double dA = eps * std::exp(s * t) * (-(s * s + w * w) / w) * std::sin(w * t);
  return {A, dA};
}

double state_diff(const CompressibleState& x, const CompressibleState& y) {
  return l2_norm(x.a - y.a) + l2_norm(x.v - y.v) + l2_norm(x.d - y.d);
}

}  // namespace

TEST(Propagator, IdentityAtZeroMode) {
  const Mat2 E = acoustic_exponential(0.0, 3.0, 0.7);
  EXPECT_EQ(diff(E, Mat2::identity()), 0.0);
  const LinearPropagator p(Grid(2, 16), Viscosity{1.0, 0.5}, 0.1, true);
  EXPECT_EQ(diff(p.block(0).e, Mat2::identity()), 0.0);
  EXPECT_EQ(p.solenoidal(0).e, 1.0);
  EXPECT_EQ(p.director(0).e, 1.0);
}

TEST(Propagator, MatchesScalingSquaringOracle) {
  const double kappa = 1.0, nu = 2.0, dt = 0.1;  // mu = 1, lambda = 0
  const Mat2 E = acoustic_exponential(kappa, nu, dt);
  const Mat2 M = acoustic_generator(kappa, nu);
  EXPECT_LT(diff(E, expm_oracle({{{M.m00 * dt, M.m01 * dt}, {M.m10 * dt, M.m11 * dt}}})), 1e-12);
}

TEST(Propagator, AllBranchesMatchOracle) {
  for (double kappa : {1.0, 2.0, std::sqrt(5.0), 7.0, 30.0}) {
    for (double nu : {0.05, 0.5, 2.0 / kappa, 1.9 / kappa, 2.1 / kappa, 3.0, 25.0, 1600.0}) {
      for (double dt : {1e-4, 2.5e-4, 0.01, 0.3}) {
        const Mat2 E = acoustic_exponential(kappa, nu, dt);
        const Mat2 M = acoustic_generator(kappa, nu);
        if (nu * kappa * kappa * dt > 50) continue;  // oracle squaring loses accuracy when entries are huge
        const M2 ref = expm_oracle({{{M.m00 * dt, M.m01 * dt}, {M.m10 * dt, M.m11 * dt}}});
        EXPECT_LT(diff(E, ref), 1e-11) << kappa << " " << nu << " " << dt;
      }
    }
  }
}

TEST(Propagator, SemigroupProperty) {
  for (double kappa : {1.0, 3.0, 12.0}) {
    for (double nu : {0.1, 2.0 / kappa, 2.0, 100.0, 1600.0}) {
      const double t1 = 0.013, t2 = 0.021;
      const Mat2 a = acoustic_exponential(kappa, nu, t1) * acoustic_exponential(kappa, nu, t2);
      const Mat2 b = acoustic_exponential(kappa, nu, t1 + t2);
      EXPECT_LT(diff(a, b), 1e-12);
    }
  }
}

TEST(Propagator, SpectralRadiusAtMostOne) {
  const LinearPropagator p(Grid(2, 32), Viscosity{1.0, 398.0}, 2.5e-4, true);
  for (std::size_t i = 0; i < p.grid().spec_size(); ++i) EXPECT_LE(p.block(i).e.spectral_radius(), 1.0 + 1e-14);
}

TEST(Propagator, SlowManifoldOverdamped) {
  const double kappa = 1.0, nu = 100.0, dt = 0.5;
  const Mat2 E = acoustic_exponential(kappa, nu, dt);
  // slow eigenvalue -|k|^2/nu (1 + O(nu^-2 |k|^-2)); the slow eigenvector is close to (1, 1/(nu kappa))
  const double slow = -0.5 * nu + std::sqrt(0.25 * nu * nu - 1.0);
  EXPECT_NEAR(slow * nu, -1.0, 1e-3);
  const double x0 = 1.0, z0 = -slow;  // eigenvector of M for the slow root: z = -lambda a / kappa
  const double x1 = E.m00 * x0 + E.m01 * z0;
  EXPECT_NEAR(x1, std::exp(-kappa * kappa * dt / nu), 1e-6);
}

TEST(Propagator, CriticalDampingJordan) {
  const double kappa = 1.0, nu = 2.0;
  for (double t : {0.1, 1.0, 5.0}) {
    const Mat2 E = acoustic_exponential(kappa, nu, t);
    const double et = std::exp(-t);
    // (a, z) = (1, 0) evolves as a = (1 + t) e^-t, z = t e^-t
    EXPECT_NEAR(E.m00, (1 + t) * et, 1e-14);
    EXPECT_NEAR(E.m10, t * et, 1e-14);
  }
}

TEST(Propagator, PhiFunctionsMatchQuadrature) {
  for (double kappa : {1.0, 2.0, 10.0}) {
    for (double nu : {0.3, 2.0 / kappa, 2.0, 40.0}) {
      for (double h : {1e-3, 0.05, 0.4}) {
        if (nu * kappa * kappa * h > 50) continue;  // quadrature oracle cannot resolve the fast decay
        const auto f = acoustic_phi(kappa, nu, h);
        const auto [p1, p2] = phi_oracle(kappa, nu, h);
        EXPECT_LT(diff(f.phi1, p1), 1e-11) << kappa << " " << nu << " " << h;
        EXPECT_LT(diff(f.phi2, p2), 1e-11) << kappa << " " << nu << " " << h;
      }
    }
  }
}

TEST(Propagator, ScalarPhi) {
  const auto small = phi_functions(1e-8);
  EXPECT_NEAR(small.phi1, 1.0 + 0.5e-8, 1e-16);
  EXPECT_NEAR(small.phi2, 0.5 + 1e-8 / 6.0, 1e-16);
  const auto big = phi_functions(-3.0);
  EXPECT_NEAR(big.phi1, (std::exp(-3.0) - 1) / -3.0, 1e-15);
  EXPECT_NEAR(big.phi2, (std::exp(-3.0) - 1 + 3) / 9.0, 1e-15);
}

TEST(Propagator, RejectsBadViscosity) {
  EXPECT_THROW(LinearPropagator(Grid(2, 16), Viscosity{0.0, 1.0}, 0.1, true), std::invalid_argument);
  EXPECT_THROW(LinearPropagator(Grid(2, 16), Viscosity{1.0, -2.5}, 0.1, true), std::invalid_argument);
  EXPECT_NO_THROW(LinearPropagator(Grid(2, 16), Viscosity{1.0, -1.9}, 0.1, true));
}

TEST(Step, RestIsFixedPoint) {
  const Grid g(2, 32);
  const FluidParams fp = fluid(1.0, 10.0);
  CompressibleState s = make_compressible(g, {"rest"});
  const CompressibleState s0 = s;
  const LinearPropagator p(g, fp.visc, 1e-3, true);
  StepperConfig cfg;
  for (int i = 0; i < 5; ++i) step(s, cfg, p, fp);
  EXPECT_EQ(state_diff(s, s0), 0.0);
}

TEST(Step, AcousticModeClosedForm) {
  for (double nu : {2.0, 0.5, 100.0}) {
    const Grid g(2, 32);
    const double mu = nu == 0.5 ? 0.25 : 1.0;
    const FluidParams fp = fluid(mu, nu - 2 * mu);
    PresetParams pp{"acoustic-pulse"};
    pp.eps = 0.1;
    CompressibleState s = make_compressible(g, pp);
    StepperConfig cfg;
    cfg.dt = 0.01;
    cfg.nonlinear = false;
    const auto tr = run_to(s, 1.0, cfg, fp);
    const CompressibleState& e = tr.snapshots.back();
    const auto [A, dA] = damped_oscillator(nu, 0.1, 1.0);
    const RealField a = to_physical(e.a);
    const auto v = to_physical(e.v);
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double x = g.coordinate(i, 0);
      err = std::max(err, std::abs(a[i] - A * std::cos(x)));
      err = std::max(err, std::abs(v[0][i] + dA * std::sin(x)));
    }
    EXPECT_LT(err, 1e-10 * 0.1) << nu;
  }
}

TEST(Step, TaylorGreenIncompressible) {
  const Grid g(2, 64);
  const FluidParams fp = fluid(1.0, 0.0);
  IncompressibleState s = make_incompressible(g, {"taylor-green"});
  const SpectralVector v0 = s.V;
  StepperConfig cfg;
  cfg.dt = 1e-3;
  cfg.snapshot_every = 100;
  const auto tr = run_to(s, 1.0, cfg, fp);
  const SpectralVector exact = std::exp(-2.0) * v0;
  EXPECT_LT(l2_norm(tr.snapshots.back().V - exact) / l2_norm(exact), 1e-6);
  for (const auto& snap : tr.snapshots) EXPECT_LT(l2_norm(divergence(snap.V)), 1e-10);
}

TEST(RunTo, EmptyWhenAlreadyThere) {
  const Grid g(2, 16);
  const auto tr = run_to(make_compressible(g, {"rest"}), 0.0, StepperConfig{}, fluid(1.0, 0.0));
  EXPECT_EQ(tr.snapshots.size(), 1u);
  EXPECT_EQ(tr.steps, 0u);
}

TEST(RunTo, LastStepLandsOnT) {
  const Grid g(2, 16);
  StepperConfig cfg;
  cfg.dt = 0.03;
  const auto tr = run_to(make_compressible(g, {"taylor-green"}), 0.1, cfg, fluid(1.0, 3.0));
  EXPECT_EQ(tr.steps, 4u);
  EXPECT_EQ(tr.snapshots.back().t, 0.1);
}

TEST(RunTo, BitIdentical) {
  const Grid g(2, 32);
  StepperConfig cfg;
  cfg.dt = 1e-3;
  const FluidParams fp = fluid(1.0, 23.0);
  const auto a = run_to(make_compressible(g, {"tg-plus-director-twist"}), 0.05, cfg, fp);
  const auto b = run_to(make_compressible(g, {"tg-plus-director-twist"}), 0.05, cfg, fp);
  EXPECT_EQ(state_diff(a.snapshots.back(), b.snapshots.back()), 0.0);
}

TEST(RunTo, SecondOrderSelfConvergence) {
  const Grid g(2, 32);
  const FluidParams fp = fluid(1.0, 8.0);  // nu = 10
  const CompressibleState s0 = make_compressible(g, {"tg-plus-director-twist"});
  std::vector<CompressibleState> finals;
  std::vector<double> dev;
  for (double dt : {0.01, 0.005, 0.0025, 0.00125}) {
    StepperConfig cfg;
    cfg.dt = dt;
    const auto tr = run_to(s0, 0.1, cfg, fp);
    finals.push_back(tr.snapshots.back());
    dev.push_back(tr.max_director_deviation());
  }
  const double e1 = state_diff(finals[0], finals[1]);
  const double e2 = state_diff(finals[1], finals[2]);
  const double e3 = state_diff(finals[2], finals[3]);
  EXPECT_GE(e1 / e2, 3.0);
  EXPECT_GE(e2 / e3, 3.0);
  EXPECT_GE(dev[0] / dev[1], 4.0);
  EXPECT_GE(dev[1] / dev[2], 4.0);
}

TEST(Cfl, Examples) {
  const PressureLaw law(2.0);
  const Grid g(2, 32);
  const CompressibleState rest = make_compressible(g, {"rest"});
  EXPECT_NEAR(cfl_estimate(rest, law), 0.5 * g.dx(), 1e-15);
  EXPECT_NEAR(cfl_estimate(make_compressible(Grid(2, 64), {"rest"}), law), 0.5 * cfl_estimate(rest, law), 1e-15);
  CompressibleState fast = rest;
  fast.v[0] = constant_field(g, 10.0);
  EXPECT_NEAR(cfl_estimate(fast, law), 0.5 * g.dx() / 10.0, 1e-14);
}

TEST(Cfl, RejectsLargeStep) {
  const Grid g(2, 16);
  const FluidParams fp = fluid(1.0, 0.0);
  CompressibleState s = make_compressible(g, {"rest"});
  const LinearPropagator p(g, fp.visc, 1.0, true);
  try {
    step(s, StepperConfig{}, p, fp);
    FAIL();
  } catch (const StepRejected& e) {
    EXPECT_EQ(e.reason(), RejectReason::cfl);
  }
}

TEST(Conservation, MeanDensityExact) {
  const Grid g(2, 32);
  const FluidParams fp = fluid(1.0, 23.0, 1.4);
  PresetParams pp{"tg-plus-director-twist"};
  CompressibleState s = make_compressible(g, pp);
  s.a = sample_spectral(g, [](const auto& x) { return 0.05 * std::cos(x[0] + 2 * x[1]); });
  StepperConfig cfg;
  cfg.dt = 1e-3;
  const auto tr = run_to(s, 0.1, cfg, fp);
  for (const auto& snap : tr.snapshots) EXPECT_LT(std::abs(mean(snap.a)), 1e-12);
}

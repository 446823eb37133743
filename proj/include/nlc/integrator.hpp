#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlc/physics.hpp"
#include "nlc/propagator.hpp"

namespace nlc {

struct StepperConfig {
  double dt = 2.5e-4;
  int snapshot_every = 20;
  bool renormalize_director = true;
  double director_tolerance = 1e-6;
  bool nonlinear = true;  // false evolves the linear part only
  bool check_cfl = true;
};

enum class RejectReason { cfl, not_finite, density, config };

inline const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::cfl: return "cfl";
    case RejectReason::not_finite: return "not-finite";
    case RejectReason::density: return "density";
    default: return "config";
  }
}

class StepRejected : public std::runtime_error {
 public:
  StepRejected(RejectReason reason, double t, const std::string& what)
      : std::runtime_error(std::string(to_string(reason)) + " at t=" + std::to_string(t) + ": " + what),
        reason_(reason),
        t_(t) {}
  RejectReason reason() const { return reason_; }
  double time() const { return t_; }

 private:
  RejectReason reason_;
  double t_;
};

/// Largest stable step for the explicit nonlinear part:
/// 0.5 min(dx / |v|_inf, dx / c_s) with c_s = sqrt(P'(max rho)).
inline double cfl_estimate(const CompressibleState& s, const PressureLaw& law) {
  const double dx = s.grid().dx();
  const RealField a = to_physical(s.a);
  double amax = -std::numeric_limits<double>::infinity();
  for (double x : a.values()) amax = std::max(amax, x);
  const double cs = std::sqrt(law.dpressure(1.0 + amax));
  const double vmax = max_length(s.v);
  double lim = dx / cs;
  if (vmax > 0.0) lim = std::min(lim, dx / vmax);
  return 0.5 * lim;
}

/// Incompressible variant: only the advective limit applies.
inline double cfl_estimate(const IncompressibleState& s) {
  const double vmax = max_length(s.V);
  const double dx = s.grid().dx();
  return vmax > 0.0 ? 0.5 * dx / vmax : std::numeric_limits<double>::infinity();
}

namespace detail {

/// Applies f(L) to (a, v) where L is the linear velocity/density operator.
/// Without density the velocity is treated as solenoidal.
inline void apply_flow(const LinearPropagator& p, PhiKind kind, SpectralScalar* a, SpectralVector& v) {
  const Grid& g = p.grid();
  const int dim = g.dim();
  for (std::size_t i = 0; i < g.spec_size(); ++i) {
    if (g.nyquist(i)) {
      if (a) (*a)[i] = 0.0;
      for (int m = 0; m < dim; ++m) v[m][i] = 0.0;
      continue;
    }
    const double fs = select(p.solenoidal(i), kind);
    const double k2 = g.k2(i);
    if (!a || k2 == 0.0) {
      for (int m = 0; m < dim; ++m) v[m][i] *= fs;
      if (a && kind != PhiKind::exp) (*a)[i] *= select(p.block(i), kind).m00;
      continue;
    }
    const double kappa = std::sqrt(k2);
    const auto& k = g.k(i);
    cplx kv = 0.0;
    for (int m = 0; m < dim; ++m) kv += static_cast<double>(k[m]) * v[m][i];
    kv /= kappa;  // k_hat . v
    const cplx z = cplx(0.0, 1.0) * kv;
    const Mat2& M = select(p.block(i), kind);
    const cplx an = M.m00 * (*a)[i] + M.m01 * z;
    const cplx zn = M.m10 * (*a)[i] + M.m11 * z;
    // Q v = k_hat (k_hat . v); new Q v = k_hat (-i zn)
    const cplx qn = cplx(0.0, -1.0) * zn;
    for (int m = 0; m < dim; ++m) {
      const double km = static_cast<double>(k[m]) / kappa;
      const cplx q = km * kv;
      v[m][i] = fs * (v[m][i] - q) + km * qn;
    }
    (*a)[i] = an;
  }
}

inline void apply_director(const LinearPropagator& p, PhiKind kind, SpectralVector& d) {
  const Grid& g = p.grid();
  for (std::size_t i = 0; i < g.spec_size(); ++i) {
    const double f = g.nyquist(i) ? 0.0 : select(p.director(i), kind);
    for (auto& c : d) c[i] *= f;
  }
}

/// Renormalises d to unit length pointwise; returns max | |d| - 1 | before.
inline double renormalize(SpectralVector& d) {
  auto p = to_physical(d);
  double dev = 0.0;
  for (std::size_t i = 0; i < p.front().size(); ++i) {
    double s = 0.0;
    for (const auto& c : p) s += c[i] * c[i];
    const double len = std::sqrt(s);
    dev = std::max(dev, std::abs(len - 1.0));
    if (len > 0.0)
      for (auto& c : p) c[i] /= len;
  }
  for (int m = 0; m < d.components(); ++m) d[m] = to_spectral(p[static_cast<std::size_t>(m)]);
  return dev;
}

inline double director_deviation(const SpectralVector& d) {
  const auto p = to_physical(d);
  double dev = 0.0;
  for (std::size_t i = 0; i < p.front().size(); ++i) {
    double s = 0.0;
    for (const auto& c : p) s += c[i] * c[i];
    dev = std::max(dev, std::abs(std::sqrt(s) - 1.0));
  }
  return dev;
}

}  // namespace detail

/// Outcome of one accepted step.
struct StepInfo {
  double director_deviation = 0.0;  // before renormalisation
};

/// One ETD-RK2 step (Cox-Matthews):
///   u*  = e^{hL} u + h phi1(hL) N(u)
///   u+  = u* + h phi2(hL) (N(u*) - N(u))
inline StepInfo step(CompressibleState& s, const StepperConfig& cfg, const LinearPropagator& prop,
                     const FluidParams& fp) {
  const double h = prop.dt();
  if (!prop.acoustic()) throw StepRejected(RejectReason::config, s.t, "propagator lacks the acoustic block");
  if (cfg.check_cfl && h > cfl_estimate(s, fp.law) * (1.0 + 1e-12))
    throw StepRejected(RejectReason::cfl, s.t, "dt exceeds CFL limit");

  auto linear = [&](PhiKind kind, CompressibleState x) {
    detail::apply_flow(prop, kind, &x.a, x.v);
    detail::apply_director(prop, kind, x.d);
    return x;
  };
  auto nonlinear = [&](const CompressibleState& x) {
    try {
      return compressible_nonlinear(x, fp);
    } catch (const DensityError& e) {
      throw StepRejected(RejectReason::density, s.t, e.what());
    }
  };

  CompressibleState star = linear(PhiKind::exp, s);
  CompressibleRates n0;
  if (cfg.nonlinear) {
    n0 = nonlinear(s);
    CompressibleState inc{n0.a, n0.v, n0.d, 0.0};
    inc = linear(PhiKind::phi1, inc);
    star.a.add_scaled(h, inc.a);
    star.v.add_scaled(h, inc.v);
    star.d.add_scaled(h, inc.d);
    star.t = s.t + h;
    const CompressibleRates n1 = nonlinear(star);
    CompressibleState corr{n1.a - n0.a, n1.v - n0.v, n1.d - n0.d, 0.0};
    corr = linear(PhiKind::phi2, corr);
    star.a.add_scaled(h, corr.a);
    star.v.add_scaled(h, corr.v);
    star.d.add_scaled(h, corr.d);
  }
  star.t = s.t + h;

  if (!star.a.finite() || !star.v.finite() || !star.d.finite())
    throw StepRejected(RejectReason::not_finite, s.t, "non-finite coefficients");
  const RealField a = to_physical(star.a);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(1.0 + a[i] > 0.0)) throw StepRejected(RejectReason::density, s.t, DensityError(i, 1.0 + a[i]).what());

  StepInfo info;
  if (cfg.renormalize_director)
    info.director_deviation = detail::renormalize(star.d);
  else
    info.director_deviation = detail::director_deviation(star.d);
  s = std::move(star);
  return info;
}

inline StepInfo step(IncompressibleState& s, const StepperConfig& cfg, const LinearPropagator& prop,
                     const FluidParams& fp) {
  const double h = prop.dt();
  if (cfg.check_cfl && h > cfl_estimate(s) * (1.0 + 1e-12))
    throw StepRejected(RejectReason::cfl, s.t, "dt exceeds CFL limit");

  auto linear = [&](PhiKind kind, IncompressibleState x) {
    detail::apply_flow(prop, kind, nullptr, x.V);
    detail::apply_director(prop, kind, x.D);
    return x;
  };

  IncompressibleState star = linear(PhiKind::exp, s);
  if (cfg.nonlinear) {
    const IncompressibleRates n0 = incompressible_nonlinear(s, fp);
    IncompressibleState inc = linear(PhiKind::phi1, IncompressibleState{n0.V, n0.D, 0.0});
    star.V.add_scaled(h, inc.V);
    star.D.add_scaled(h, inc.D);
    const IncompressibleRates n1 = incompressible_nonlinear(star, fp);
    IncompressibleState corr = linear(PhiKind::phi2, IncompressibleState{n1.V - n0.V, n1.D - n0.D, 0.0});
    star.V.add_scaled(h, corr.V);
    star.D.add_scaled(h, corr.D);
  }
  star.t = s.t + h;
  if (!star.V.finite() || !star.D.finite()) throw StepRejected(RejectReason::not_finite, s.t, "non-finite coefficients");

  StepInfo info;
  if (cfg.renormalize_director)
    info.director_deviation = detail::renormalize(star.D);
  else
    info.director_deviation = detail::director_deviation(star.D);
  s = std::move(star);
  return info;
}

/// Snapshots and per-step records of one run.
template <class State>
struct Trajectory {
  std::vector<State> snapshots;
  std::vector<std::size_t> snapshot_steps;
  std::vector<double> director_deviation;  // one entry per step
  std::size_t steps = 0;

  double max_director_deviation() const {
    double m = 0.0;
    for (double x : director_deviation) m = std::max(m, x);
    return m;
  }
};

inline bool is_acoustic(const CompressibleState&) { return true; }
inline bool is_acoustic(const IncompressibleState&) { return false; }

/// Advances to time T with fixed dt; the last step is shortened to land on T.
/// Snapshots are taken at the start, every snapshot_every steps and at the end.
template <class State>
Trajectory<State> run_to(State s, double T, const StepperConfig& cfg, const FluidParams& fp,
                         const std::function<void(const State&, std::size_t)>& observer = {}) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (T < s.t) throw std::invalid_argument("final time precedes the state time");
  Trajectory<State> tr;
  const double t0 = s.t;
  const double span = T - t0;
  std::size_t nsteps = static_cast<std::size_t>(std::ceil(span / cfg.dt - 1e-9));
  if (span <= 0.0) nsteps = 0;
  const LinearPropagator full(s.grid(), fp.visc, cfg.dt, is_acoustic(s));
  tr.snapshots.push_back(s);
  tr.snapshot_steps.push_back(0);
  if (observer) observer(s, 0);
  const int every = std::max(1, cfg.snapshot_every);
  for (std::size_t n = 1; n <= nsteps; ++n) {
    const double remaining = T - (t0 + static_cast<double>(n - 1) * cfg.dt);
    StepInfo info;
    if (n == nsteps && remaining < cfg.dt * (1.0 - 1e-12)) {
      const LinearPropagator last(s.grid(), fp.visc, remaining, is_acoustic(s));
      info = step(s, cfg, last, fp);
      s.t = T;
    } else {
      info = step(s, cfg, full, fp);
      s.t = n == nsteps ? T : t0 + static_cast<double>(n) * cfg.dt;
    }
    tr.director_deviation.push_back(info.director_deviation);
    if (observer) observer(s, n);
    if (n % static_cast<std::size_t>(every) == 0 || n == nsteps) {
      tr.snapshots.push_back(s);
      tr.snapshot_steps.push_back(n);
    }
  }
  tr.steps = nsteps;
  return tr;
}

}  // namespace nlc

#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nlc/diagnostics.hpp"
#include "nlc/integrator.hpp"

namespace nlc {

/// Least-squares fit log y = intercept + slope log x.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;  // max |log y_i - fit_i|
  std::size_t points = 0;
};

inline RateFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  if (x.size() < 3) throw std::invalid_argument("fit_power_law: need at least 3 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("fit_power_law: entries must be positive and finite");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_power_law: abscissae must not all coincide");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = lx.size();
  for (std::size_t i = 0; i < lx.size(); ++i)
    f.max_residual = std::max(f.max_residual, std::abs(ly[i] - (f.intercept + f.slope * lx[i])));
  return f;
}

/// Runs body(i) for i in [0, count) on up to `threads` workers; results must be
/// written by index so the outcome does not depend on scheduling.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct SweepConfig {
  std::vector<double> nus{25.0, 100.0, 400.0, 1600.0};
  double mu = 1.0;
  double gamma = 2.0;
  int dim = 2;
  int n = 64;
  double T = 0.5;
  double dt = 2.5e-4;
  int snapshot_every = 20;
  PresetParams preset{"tg-plus-director-twist", 0.1, 0.2, 0.2, 0.05};
  bool renormalize = true;
  ProductRule rule = ProductRule::dealiased;
  std::optional<int> j0;  // default: per-nu threshold
  std::uint64_t seed = 0;

  void validate() const {
    if (nus.empty()) throw std::invalid_argument("sweep needs at least one nu");
    for (std::size_t i = 0; i < nus.size(); ++i) {
      if (!(nus[i] > 0.0)) throw std::invalid_argument("nu values must be positive");
      if (i > 0 && !(nus[i] > nus[i - 1])) throw std::invalid_argument("nu values must be strictly increasing");
    }
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (!(gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("T and dt must be positive");
  }
  FluidParams params(double nu) const {
    FluidParams fp;
    fp.visc = Viscosity{mu, nu - 2.0 * mu};
    fp.law = PressureLaw(gamma);
    fp.rule = rule;
    return fp;
  }
  StepperConfig stepper() const {
    StepperConfig c;
    c.dt = dt;
    c.snapshot_every = snapshot_every;
    c.renormalize_director = renormalize;
    return c;
  }
};

/// Conservation and dissipation bookkeeping of one compressible run.
struct RunHealth {
  double mean_a_drift = 0.0;          // max |mean a(t) - mean a(0)|
  double energy_growth_rate = 0.0;    // max (E_{i+1} - E_i) / (E_0 dt_i), <= 0 if monotone
  double max_director_deviation = 0.0;
  std::size_t steps = 0;
};

inline RunHealth run_health(const Trajectory<CompressibleState>& tr, const PressureLaw& law) {
  RunHealth h;
  h.steps = tr.steps;
  h.max_director_deviation = tr.max_director_deviation();
  const double m0 = mean(tr.snapshots.front().a);
  const double e0 = energy(tr.snapshots.front(), law).total;
  double prev = e0;
  h.energy_growth_rate = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < tr.snapshots.size(); ++i) {
    const auto& s = tr.snapshots[i];
    h.mean_a_drift = std::max(h.mean_a_drift, std::abs(mean(s.a) - m0));
    const double e = energy(s, law).total;
    const double dt = s.t - tr.snapshots[i - 1].t;
    if (dt > 0.0 && e0 > 0.0) h.energy_growth_rate = std::max(h.energy_growth_rate, (e - prev) / (e0 * dt));
    prev = e;
  }
  if (!std::isfinite(h.energy_growth_rate)) h.energy_growth_rate = 0.0;
  return h;
}

struct SweepRun {
  double nu = 0.0;
  bool ok = false;
  std::string error;
  int j0 = 0;
  TheoremCheck check;
  RunHealth health;
  FunctionalSeries series;
};

struct SweepReport {
  SweepConfig config;
  bool incompressible_ok = false;
  std::string incompressible_error;
  double incompressible_max_divergence = 0.0;
  std::vector<SweepRun> runs;
  std::optional<RateFit> E_fit;
  std::optional<RateFit> a_fit;
  std::optional<RateFit> nu_a_fit;

  bool E_strictly_decreasing() const {
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) {
      if (!r.ok || !(r.check.E < prev)) return false;
      prev = r.check.E;
    }
    return !runs.empty();
  }
  bool all_ok() const {
    return incompressible_ok && std::all_of(runs.begin(), runs.end(), [](const SweepRun& r) { return r.ok; });
  }
};

/// Incompressible reference once, then one compressible run per nu.
inline SweepReport run_limit_sweep(const SweepConfig& cfg, int threads = 1) {
  cfg.validate();
  SweepReport rep;
  rep.config = cfg;
  const Grid g(cfg.dim, cfg.n);
  const lp::DyadicFilter filter(g);
  const CompressibleState c0 = make_compressible(g, cfg.preset);
  const StepperConfig sc = cfg.stepper();

  Trajectory<IncompressibleState> ref;
  try {
    ref = run_to(make_incompressible(c0), cfg.T, sc, cfg.params(cfg.nus.front()));
    rep.incompressible_ok = true;
    for (const auto& s : ref.snapshots)
      rep.incompressible_max_divergence = std::max(rep.incompressible_max_divergence, l2_norm(divergence(s.V)));
  } catch (const std::exception& e) {
    rep.incompressible_error = e.what();
  }

  rep.runs.resize(cfg.nus.size());
  parallel_for(cfg.nus.size(), threads, [&](std::size_t i) {
    SweepRun& run = rep.runs[i];
    run.nu = cfg.nus[i];
    if (!rep.incompressible_ok) {
      run.error = "incompressible reference failed: " + rep.incompressible_error;
      return;
    }
    try {
      const FluidParams fp = cfg.params(run.nu);
      const auto tr = run_to(c0, cfg.T, sc, fp);
      run.health = run_health(tr, fp.law);
      run.j0 = cfg.j0 ? *cfg.j0 : lp::default_threshold(run.nu, filter);
      PairedTrajectory p{tr.snapshots, ref.snapshots};
      run.series = compute_functionals(p, fp, filter, run.j0);
      run.check = theorem_check(run.series);
      run.ok = std::isfinite(run.check.E) && std::isfinite(run.check.blowup_integral);
      if (!run.ok) run.error = "non-finite functionals";
    } catch (const std::exception& e) {
      run.error = e.what();
    }
  });

  std::vector<double> nu, E, a, nua;
  for (const auto& r : rep.runs) {
    if (!r.ok) continue;
    nu.push_back(r.nu);
    E.push_back(r.check.E);
    a.push_back(r.check.a_sup);
    nua.push_back(r.check.nu_a_sup);
  }
  auto try_fit = [&](const std::vector<double>& y) -> std::optional<RateFit> {
    if (nu.size() < 3) return std::nullopt;
    try {
      return fit_power_law(nu, y);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  };
  rep.E_fit = try_fit(E);
  rep.a_fit = try_fit(a);
  rep.nu_a_fit = try_fit(nua);
  return rep;
}

/// One solver-verification case against a closed form.
struct ExactCheck {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  double unit_error = 0.0;  // | |d| - 1 | where meaningful
  double unit_tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct ExactTolerances {
  double taylor_green = 1e-6;
  double phase_heat = 1e-6;
  double unit_length = 1e-10;
  double acoustic = 1e-10;
};

struct ExactSettings {
  int n = 64;
  double T = 1.0;
  double dt = 1e-3;
  double mu = 1.0;
  double phase_eps = 0.3;
  double pulse_eps = 0.1;
  std::vector<double> acoustic_nus{100.0, 2.0};  // 2.0 is critical for |k| = 1
};

namespace detail {

inline double rel_error(const SpectralVector& got, const SpectralVector& want) {
  const double s = l2_norm(want);
  return s > 0.0 ? l2_norm(got - want) / s : l2_norm(got);
}

/// a(t) for a'' + nu a' + a = 0, a(0) = eps, a'(0) = 0 and its derivative.
inline std::pair<double, double> damped_mode(double nu, double eps, double t) {
  const double disc = nu * nu - 4.0;
  if (std::abs(disc) < 1e-12) {
    const double r = -nu / 2.0;
    const double e = std::exp(r * t);
    return {eps * (1.0 - r * t) * e, eps * (-r * r * t) * e};
  }
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double rp = (-nu + sq) / 2.0, rm = (-nu - sq) / 2.0;
    const double ep = std::exp(rp * t), em = std::exp(rm * t);
    const double c = eps / (rp - rm);
    return {c * (rp * em - rm * ep), c * rp * rm * (em - ep)};
  }
  const double w = std::sqrt(-disc) / 2.0, r = -nu / 2.0;
  const double e = std::exp(r * t);
  const double cs = std::cos(w * t), sn = std::sin(w * t);
  return {eps * e * (cs - r / w * sn), eps * e * (-(w * w + r * r) / w * sn)};
}

}  // namespace detail

inline ExactCheck check_taylor_green(int dim, const ExactSettings& st, const ExactTolerances& tol) {
  const Grid g(dim, st.n);
  PresetParams pp;
  pp.name = "taylor-green";
  const IncompressibleState s0 = make_incompressible(g, pp);
  FluidParams fp;
  fp.visc = Viscosity{st.mu, 0.0};
  StepperConfig cfg;
  cfg.dt = st.dt;
  cfg.snapshot_every = 1 << 30;
  const auto tr = run_to(s0, st.T, cfg, fp);
  const double decay = std::exp(-static_cast<double>(dim) * st.mu * st.T);
  SpectralVector want = s0.V;
  want *= decay;
  ExactCheck c;
  c.name = "taylor-green";
  c.error = detail::rel_error(tr.snapshots.back().V, want);
  c.tolerance = tol.taylor_green;
  c.passed = c.error <= c.tolerance;
  return c;
}

inline ExactCheck check_phase_heat_flow(const ExactSettings& st, const ExactTolerances& tol) {
  const Grid g(2, st.n);
  const double eps = st.phase_eps;
  auto director_at = [&](double t) {
    const double amp = eps * std::exp(-t);
    return detail::director_from_phase(g, [=](const auto& x) { return amp * std::sin(x[0]); });
  };
  IncompressibleState s0{SpectralVector(g), director_at(0.0), 0.0};
  FluidParams fp;
  fp.visc = Viscosity{st.mu, 0.0};
  StepperConfig cfg;
  cfg.dt = st.dt;
  cfg.snapshot_every = 1 << 30;
  const auto tr = run_to(s0, st.T, cfg, fp);
  const auto& end = tr.snapshots.back();
  ExactCheck c;
  c.name = "phase-heat-flow";
  c.error = detail::rel_error(end.D, director_at(st.T));
  c.tolerance = tol.phase_heat;
  const auto d = to_physical(end.D);
  for (std::size_t i = 0; i < d[0].size(); ++i) {
    double len = 0.0;
    for (const auto& comp : d) len += comp[i] * comp[i];
    c.unit_error = std::max(c.unit_error, std::abs(std::sqrt(len) - 1.0));
  }
  c.unit_tolerance = tol.unit_length;
  c.detail = "velocity stays " + std::to_string(l2_norm(end.V));
  c.passed = c.error <= c.tolerance && c.unit_error <= c.unit_tolerance && l2_norm(end.V) <= 1e-10;
  return c;
}

inline ExactCheck check_acoustic_pulse(double nu, const ExactSettings& st, const ExactTolerances& tol) {
  const Grid g(2, st.n);
  PresetParams pp;
  pp.name = "acoustic-pulse";
  pp.eps = st.pulse_eps;
  const CompressibleState s0 = make_compressible(g, pp);
  FluidParams fp;
  fp.visc = Viscosity{st.mu, nu - 2.0 * st.mu};
  StepperConfig cfg;
  cfg.dt = st.dt;
  cfg.nonlinear = false;
  cfg.snapshot_every = 1 << 30;
  const auto tr = run_to(s0, st.T, cfg, fp);
  const auto& end = tr.snapshots.back();
  const auto [A, Ap] = detail::damped_mode(nu, st.pulse_eps, st.T);
  const SpectralScalar a_want = sample_spectral(g, [A = A](const auto& x) { return A * std::cos(x[0]); });
  SpectralVector v_want(g);
  v_want[0] = sample_spectral(g, [Ap = Ap](const auto& x) { return -Ap * std::sin(x[0]); });
  const double scale = l2_norm(s0.a);
  ExactCheck c;
  char buf[32];
  auto [end_ptr, ec] = std::to_chars(buf, buf + sizeof buf, nu);
  (void)ec;
  c.name = "acoustic-pulse nu=" + std::string(buf, end_ptr);
  c.error = std::max(l2_norm(end.a - a_want), l2_norm(end.v - v_want)) / scale;
  c.tolerance = tol.acoustic;
  c.passed = c.error <= c.tolerance;
  return c;
}

struct ExactReport {
  std::vector<ExactCheck> checks;
  bool passed() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const ExactCheck& c) { return c.passed; });
  }
};

inline ExactReport validate_exact_solutions(const ExactSettings& st = {}, const ExactTolerances& tol = {}) {
  ExactReport r;
  auto guarded = [&](const std::string& name, const std::function<ExactCheck()>& f) {
    try {
      r.checks.push_back(f());
    } catch (const std::exception& e) {
      ExactCheck c;
      c.name = name;
      c.error = std::numeric_limits<double>::infinity();
      c.detail = e.what();
      r.checks.push_back(c);
    }
  };
  guarded("taylor-green", [&] { return check_taylor_green(2, st, tol); });
  guarded("phase-heat-flow", [&] { return check_phase_heat_flow(st, tol); });
  for (double nu : st.acoustic_nus)
    guarded("acoustic-pulse", [&] { return check_acoustic_pulse(nu, st, tol); });
  return r;
}

/// Max pre-renormalization director deviation at dt, dt/2, dt/4 on a short run.
struct DirectorOrderStudy {
  std::vector<double> dts;
  std::vector<double> deviations;
  std::vector<double> orders;
  double min_order() const { return orders.empty() ? 0.0 : *std::min_element(orders.begin(), orders.end()); }
};

inline DirectorOrderStudy director_order_study(const SweepConfig& cfg, double nu, double T, int levels = 3) {
  const Grid g(cfg.dim, cfg.n);
  const CompressibleState c0 = make_compressible(g, cfg.preset);
  const FluidParams fp = cfg.params(nu);
  DirectorOrderStudy s;
  double dt = cfg.dt;
  for (int l = 0; l < levels; ++l, dt /= 2.0) {
    StepperConfig sc = cfg.stepper();
    sc.dt = dt;
    sc.snapshot_every = 1 << 30;
    s.dts.push_back(dt);
    s.deviations.push_back(run_to(c0, T, sc, fp).max_director_deviation());
  }
  for (std::size_t i = 1; i < s.deviations.size(); ++i)
    s.orders.push_back(std::log2(s.deviations[i - 1] / s.deviations[i]));
  return s;
}

}  // namespace nlc

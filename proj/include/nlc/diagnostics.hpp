#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlc/integrator.hpp"
#include "nlc/littlewood_paley.hpp"
#include "nlc/physics.hpp"
#include "nlc/random_fields.hpp"

namespace nlc {

/// Compressible and incompressible runs sampled at the same times on one grid.
struct PairedTrajectory {
  std::vector<CompressibleState> compressible;
  std::vector<IncompressibleState> incompressible;

  void validate() const {
    if (compressible.size() != incompressible.size())
      throw std::invalid_argument("paired trajectories have different snapshot counts");
    for (std::size_t i = 0; i < compressible.size(); ++i) {
      if (compressible[i].t != incompressible[i].t)
        throw std::invalid_argument("paired trajectories have mismatched time stamps");
      if (!(compressible[i].grid() == incompressible[i].grid()))
        throw std::invalid_argument("paired trajectories live on different grids");
    }
  }
};

/// Trapezoid rule over (t_i, f_i); zero for fewer than two samples.
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
  return acc;
}

inline double max_of(const std::vector<double>& f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, x);
  return m;
}

/// Instantaneous functional ingredients at one snapshot. Norms are homogeneous
/// Besov B^s_{2,1} with s_lo = n/2 - 1 and s_mid = n/2 unless stated.
struct FunctionalSample {
  double t = 0.0;
  // X_n
  double qu = 0.0;           // ||Qu||_{s_lo}
  double a_lo = 0.0;         // ||a||_{s_lo}
  double nu_grad_a = 0.0;    // ||nu grad a||_{s_lo}
  double x_tuple = 0.0;      // ||(Qu, a, nu grad a)||_{s_lo}
  // Y_n integrand
  double qut_grad_a = 0.0;   // ||Qu_t + grad a||_{s_lo}
  double nu_lap_qu = 0.0;    // ||nu grad^2 Qu||_{s_lo}
  double nu_lap_a_low = 0.0; // ||nu grad^2 a^l||_{s_lo}
  double grad_a_high = 0.0;  // ||grad a^h||_{s_lo}
  double y_tuple = 0.0;
  // Z_n
  double pu = 0.0;           // ||Pu||_{s_lo}
  double delta = 0.0;        // ||delta||_{s_mid}
  // W_n integrand
  double put = 0.0;          // ||Pu_t||_{s_lo}
  double mu_lap_pu = 0.0;    // ||mu grad^2 Pu||_{s_lo}
  double w_tuple = 0.0;      // ||(Pu_t, mu grad^2 Pu)||_{s_lo}
  double delta_top = 0.0;    // ||delta||_{n/2+2}
  // V_n
  double V_lo = 0.0;         // ||V||_{s_lo}
  double D_mid = 0.0;        // ||D||_{s_mid}
  double Vt_lo = 0.0;        // ||V_t||_{s_lo}
  double V_hi = 0.0;         // ||V||_{n/2+1}
  double D_top = 0.0;        // ||D||_{n/2+2}
  // monitors
  double a_mid = 0.0;        // ||a||_{s_mid}
  double blowup = 0.0;       // ||grad v||_{n/2} + ||d||_{n/2+1}^2
  double energy = 0.0;
  double mean_a = 0.0;
};

/// Per-snapshot samples plus the time-aggregated functionals.
struct FunctionalSeries {
  double nu = 0.0;
  double mu = 0.0;
  int j0 = 0;
  std::vector<FunctionalSample> samples;

  double X = 0.0;
  double Y = 0.0;
  double Z = 0.0;
  double W = 0.0;
  double M_proxy = 0.0;  // V_n measured on the incompressible run
  double blowup_integral = 0.0;

  std::vector<double> times() const {
    std::vector<double> t;
    for (const auto& s : samples) t.push_back(s.t);
    return t;
  }
  template <class F>
  std::vector<double> column(F f) const {
    std::vector<double> out;
    for (const auto& s : samples) out.push_back(f(s));
    return out;
  }
};

namespace detail {

inline std::vector<lp::Weighted> parts(const SpectralVector& w, int power = 0, double scale = 1.0) {
  std::vector<lp::Weighted> out;
  for (const auto& c : w) out.push_back({&c, power, scale});
  return out;
}

inline std::vector<lp::Weighted> join(std::vector<lp::Weighted> a, const std::vector<lp::Weighted>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline double bnorm(const std::vector<lp::Weighted>& p, double s, const lp::DyadicFilter& f) {
  return lp::besov_norm(p, s, f).value;
}

}  // namespace detail

/// ||grad v||_{n/2} + ||d||_{n/2+1}^2 at one state.
inline double blowup_integrand(const CompressibleState& s, const lp::DyadicFilter& filter) {
  const double half = s.grid().dim() / 2.0;
  const double gv = lp::besov(s.v, half, filter, 1);
  const double dn = lp::besov(s.d, half + 1.0, filter);
  return gv + dn * dn;
}

/// Trapezoidal integral of the blow-up integrand over the snapshots.
inline double blowup_integral(const std::vector<CompressibleState>& traj, const lp::DyadicFilter& filter) {
  if (traj.size() < 2) throw std::invalid_argument("blow-up integral needs at least two snapshots");
  std::vector<double> t, f;
  for (const auto& s : traj) {
    t.push_back(s.t);
    f.push_back(blowup_integrand(s, filter));
  }
  return trapezoid(t, f);
}

/// Evaluates every functional ingredient along a paired trajectory.
/// Time derivatives come from the assembled right-hand sides.
inline FunctionalSeries compute_functionals(const PairedTrajectory& paired, const FluidParams& fp,
                                            const lp::DyadicFilter& filter, int j0) {
  paired.validate();
  if (!filter.in_range(j0)) throw std::invalid_argument("low/high threshold outside the resolved range");
  std::vector<std::size_t> order(paired.compressible.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return paired.compressible[x].t < paired.compressible[y].t; });

  FunctionalSeries out;
  out.nu = fp.visc.nu();
  out.mu = fp.visc.mu;
  out.j0 = j0;
  const double nu = out.nu, mu = out.mu;
  for (std::size_t idx : order) {
    const CompressibleState& c = paired.compressible[idx];
    const IncompressibleState& in = paired.incompressible[idx];
    const double half = c.grid().dim() / 2.0;
    const double slo = half - 1.0;
    const SpectralVector u = c.v - in.V;
    const SpectralVector pu = project_P(u);
    const SpectralVector qu = project_Q(u);
    const SpectralVector delta = c.d - in.D;
    const CompressibleRates cr = compressible_rhs(c, fp);
    const IncompressibleRates ir = incompressible_rhs(in, fp);
    const SpectralVector ut = cr.v - ir.V;
    const SpectralVector put = project_P(ut);
    const SpectralVector qut_ga = project_Q(ut) + gradient(c.a);
    auto [a_low, a_high] = lp::lowhigh_split(c.a, j0, filter);

    FunctionalSample s;
    s.t = c.t;
    using detail::bnorm;
    using detail::join;
    using detail::parts;
    const std::vector<lp::Weighted> a0{{&c.a, 0, 1.0}}, a1{{&c.a, 1, nu}};
    s.qu = bnorm(parts(qu), slo, filter);
    s.a_lo = bnorm(a0, slo, filter);
    s.nu_grad_a = bnorm(a1, slo, filter);
    s.x_tuple = bnorm(join(join(parts(qu), a0), a1), slo, filter);

    const std::vector<lp::Weighted> al{{&a_low, 2, nu}}, ah{{&a_high, 1, 1.0}};
    s.qut_grad_a = bnorm(parts(qut_ga), slo, filter);
    s.nu_lap_qu = bnorm(parts(qu, 2, nu), slo, filter);
    s.nu_lap_a_low = bnorm(al, slo, filter);
    s.grad_a_high = bnorm(ah, slo, filter);
    s.y_tuple = bnorm(join(join(join(parts(qut_ga), parts(qu, 2, nu)), al), ah), slo, filter);

    s.pu = bnorm(parts(pu), slo, filter);
    s.delta = bnorm(parts(delta), half, filter);

    s.put = bnorm(parts(put), slo, filter);
    s.mu_lap_pu = bnorm(parts(pu, 2, mu), slo, filter);
    s.w_tuple = bnorm(join(parts(put), parts(pu, 2, mu)), slo, filter);
    s.delta_top = bnorm(parts(delta), half + 2.0, filter);

    s.V_lo = bnorm(parts(in.V), slo, filter);
    s.D_mid = bnorm(parts(in.D), half, filter);
    s.Vt_lo = bnorm(parts(ir.V), slo, filter);
    s.V_hi = bnorm(parts(in.V), half + 1.0, filter);
    s.D_top = bnorm(parts(in.D), half + 2.0, filter);

    s.a_mid = bnorm(a0, half, filter);
    s.blowup = blowup_integrand(c, filter);
    s.energy = energy(c, fp.law).total;
    s.mean_a = mean(c.a);
    out.samples.push_back(s);
  }

  const auto t = out.times();
  auto col = [&](double FunctionalSample::*m) { return out.column([m](const FunctionalSample& s) { return s.*m; }); };
  out.X = max_of(col(&FunctionalSample::x_tuple));
  out.Y = trapezoid(t, col(&FunctionalSample::y_tuple));
  out.Z = max_of(col(&FunctionalSample::pu)) + max_of(col(&FunctionalSample::delta));
  out.W = trapezoid(t, col(&FunctionalSample::w_tuple)) + trapezoid(t, col(&FunctionalSample::delta_top));
  out.M_proxy = max_of(col(&FunctionalSample::V_lo)) + max_of(col(&FunctionalSample::D_mid)) +
                trapezoid(t, col(&FunctionalSample::Vt_lo)) + trapezoid(t, col(&FunctionalSample::V_hi)) +
                trapezoid(t, col(&FunctionalSample::D_top));
  out.blowup_integral = trapezoid(t, col(&FunctionalSample::blowup));
  return out;
}

/// Observables of the incompressible-limit statement.
struct TheoremCheck {
  double nu = 0.0;
  double mu = 0.0;
  double E_linf = 0.0;  // max ||Pu||_{n/2-1} + max ||delta||_{n/2}
  double E_l1 = 0.0;    // int ||(Pu_t, mu grad^2 Pu)||_{n/2-1} + int ||delta||_{n/2+2}
  double E = 0.0;
  double nu_a_sup = 0.0;  // sup nu ||a||_{n/2}
  double a_sup = 0.0;     // sup ||a||_{n/2}
  double blowup_integral = 0.0;
  double M_proxy = 0.0;
  double rate_bound_shape = 0.0;  // sqrt(mu / nu)
};

inline TheoremCheck theorem_check(const FunctionalSeries& s) {
  TheoremCheck r;
  r.nu = s.nu;
  r.mu = s.mu;
  r.E_linf = s.Z;
  r.E_l1 = s.W;
  r.E = r.E_linf + r.E_l1;
  const auto a = s.column([](const FunctionalSample& x) { return x.a_mid; });
  r.a_sup = max_of(a);
  r.nu_a_sup = s.nu * r.a_sup;
  r.blowup_integral = s.blowup_integral;
  r.M_proxy = s.M_proxy;
  r.rate_bound_shape = std::sqrt(s.mu / s.nu);
  return r;
}

/// One named term of the perturbation decomposition and its Besov size.
struct TermNorm {
  std::string name;
  double s = 0.0;
  double besov = 0.0;
  double l2 = 0.0;
};

/// Magnitudes of G, H1 (six pieces), H2 and k(a), plus relative residuals of the
/// four perturbation equations after substituting the true time derivatives.
struct ResidualReport {
  std::vector<TermNorm> terms;
  double residual_incompressible = 0.0;  // P-part velocity equation
  double residual_director = 0.0;
  double residual_mass = 0.0;
  double residual_compressible = 0.0;    // Q-part velocity equation
  double max_relative() const {
    return std::max({residual_incompressible, residual_director, residual_mass, residual_compressible});
  }
  const TermNorm& term(const std::string& name) const {
    for (const auto& t : terms)
      if (t.name == name) return t;
    throw std::out_of_range("no term named " + name);
  }
};

namespace detail {

/// div(grad x (.) grad y) with (grad x (.) grad y)_{ij} = d_i x . d_j y.
inline SpectralVector mixed_stress_div(const SpectralVector& x, const SpectralVector& y, ProductRule rule) {
  const auto gx = physical_gradient(x);
  const auto gy = physical_gradient(y);
  const Grid& g = x.grid();
  const int dim = g.dim();
  SpectralVector out(g, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      RealField s(g);
      for (std::size_t c = 0; c < gx[static_cast<std::size_t>(i)].size(); ++c)
        for (std::size_t p = 0; p < s.size(); ++p) s[p] += gx[i][c][p] * gy[j][c][p];
      out[i] += partial(from_product(s, rule), j);
    }
  }
  return out;
}

inline SpectralScalar grad_contract(const SpectralVector& x, const SpectralVector& y, ProductRule rule) {
  const auto gx = physical_gradient(x);
  const auto gy = physical_gradient(y);
  RealField s(x.grid());
  for (std::size_t m = 0; m < gx.size(); ++m)
    for (std::size_t c = 0; c < gx[m].size(); ++c)
      for (std::size_t p = 0; p < s.size(); ++p) s[p] += gx[m][c][p] * gy[m][c][p];
  return from_product(s, rule);
}

inline double residual(const std::vector<const SpectralVector*>& pieces, const SpectralVector& sum, double floor) {
  double scale = floor;
  for (const auto* p : pieces) scale = std::max(scale, l2_norm(*p));
  return scale > 0.0 ? l2_norm(sum) / scale : l2_norm(sum);
}

}  // namespace detail

/// Band-limited random compressible/incompressible pair for the residual check.
/// |k_m| <= band on every axis and max |a| = a_max keeps all products resolved.
struct RandomPair {
  CompressibleState compressible;
  IncompressibleState incompressible;
};

inline RandomPair random_pair(const Grid& g, std::uint64_t seed, int band = 3, double a_max = 0.1) {
  SpectralSupport sup;
  sup.band = band;
  sup.decay = 0.0;
  auto scaled = [&](SpectralVector w, double amp) {
    const double m = max_length(w);
    if (m > 0.0) w *= amp / m;
    return w;
  };
  SpectralScalar a = random_field(g, derive_seed(seed, 0), sup);
  const double am = to_physical(a).max_abs();
  if (am > 0.0) a *= a_max / am;
  SpectralVector v = scaled(random_vector(g, derive_seed(seed, 1), sup), 1.0);
  SpectralVector V = scaled(project_P(random_vector(g, derive_seed(seed, 2), sup)), 1.0);
  SpectralVector d = scaled(random_vector(g, derive_seed(seed, 3), sup), 1.0);
  SpectralVector D = scaled(random_vector(g, derive_seed(seed, 4), sup), 1.0);
  d[0] += constant_field(g, 1.0);
  D[0] += constant_field(g, 1.0);
  return {CompressibleState{std::move(a), std::move(v), std::move(d), 0.0}, IncompressibleState{std::move(V), std::move(D), 0.0}};
}

/// Assembles the perturbation systems for u = v - V, delta = d - D and checks
/// that they re-sum to the primitive equations.
///
/// `h12_sign` multiplies the (1 + a) Pu . grad(V + Qu) piece of H1; the
/// primitive equations require +1.
inline ResidualReport residual_report(const CompressibleState& c, const IncompressibleState& in, const FluidParams& fp,
                                      const lp::DyadicFilter& filter, double h12_sign = 1.0) {
  if (!(c.grid() == in.grid())) throw std::invalid_argument("states live on different grids");
  const ProductRule r = fp.rule;
  const double mu = fp.visc.mu, nu = fp.visc.nu();
  const double half = c.grid().dim() / 2.0;
  const SpectralVector& V = in.V;
  const SpectralVector& D = in.D;
  const SpectralScalar& a = c.a;
  const SpectralVector u = c.v - V;
  const SpectralVector pu = project_P(u);
  const SpectralVector qu = project_Q(u);
  const SpectralVector delta = c.d - D;

  const CompressibleRates cr = compressible_rhs(c, fp);
  const IncompressibleRates ir = incompressible_rhs(in, fp);
  const SpectralVector put = project_P(cr.v) - ir.V;
  const SpectralVector qut = project_Q(cr.v);
  const SpectralVector deltat = cr.d - ir.D;
  const SpectralVector w = u + V;
  const SpectralVector grad_a = gradient(a);
  // relative to the size of the primitive rates, so an exactly vanishing perturbation reads as zero
  const double ref = std::max({l2_norm(cr.v), l2_norm(cr.a), l2_norm(cr.d), l2_norm(ir.V), l2_norm(ir.D)});

  auto one_plus_a = [&](const SpectralVector& x) { return x + multiply(a, x, r); };

  const SpectralVector h1_1 = multiply(a, ir.V + put + qut + grad_a, r);
  const SpectralVector h1_2 = one_plus_a(advect(pu, V + qu, r));
  const SpectralVector h1_3 = one_plus_a(advect(V, qu, r) + advect(qu, V, r));
  const SpectralVector h1_4 = multiply(a, advect(w, pu, r), r);
  const SpectralVector h1_5 = multiply(a, advect(qu, qu, r) + advect(V, V, r), r);
  const SpectralVector h1_6 =
      detail::mixed_stress_div(delta, delta, r) + detail::mixed_stress_div(delta, D, r) + detail::mixed_stress_div(D, delta, r);
  SpectralVector h1 = h1_1 + h1_3 + h1_4 + h1_5 + h1_6;
  h1.add_scaled(h12_sign, h1_2);

  const SpectralScalar k = k_of_a(a, fp.law, r);
  const SpectralVector h2 = h1_1 + (-1.0) * ericksen_stress_div(c.d, r) + one_plus_a(advect(w, pu, r)) +
                            one_plus_a(advect(w, V, r)) + multiply(a, advect(w, qu, r), r) +
                            multiply(k - a, grad_a, r);

  const SpectralScalar dd = detail::grad_contract(delta, D, r);
  const SpectralScalar ee = detail::grad_contract(delta, delta, r);
  const SpectralScalar eD = detail::grad_contract(D, D, r);
  const SpectralVector G = multiply(ee, delta, r) + multiply(eD, delta, r) + multiply(ee, D, r) +
                           2.0 * multiply(dd, delta, r) + 2.0 * multiply(dd, D, r);

  ResidualReport rep;
  auto add = [&](const std::string& name, const SpectralVector& f, double s) {
    rep.terms.push_back({name, s, lp::besov(f, s, filter), l2_norm(f)});
  };
  add("G", G, half);
  add("H1_1", h1_1, half - 1.0);
  add("H1_2", h1_2, half - 1.0);
  add("H1_3", h1_3, half - 1.0);
  add("H1_4", h1_4, half - 1.0);
  add("H1_5", h1_5, half - 1.0);
  add("H1_6", h1_6, half - 1.0);
  add("H1", h1, half - 1.0);
  add("H2", h2, half - 1.0);
  rep.terms.push_back({"k(a)", half, lp::besov(k, half, filter), l2_norm(k)});

  {
    const SpectralVector t1 = project_P(advect(w, pu, r));
    const SpectralVector t2 = -mu * laplacian(pu);
    const SpectralVector t3 = project_P(h1);
    rep.residual_incompressible = detail::residual({&put, &t1, &t2, &t3}, put + t1 + t2 + t3, ref);
  }
  {
    const SpectralVector t1 = project_Q(advect(w, qu, r));
    const SpectralVector t2 = -nu * laplacian(qu);
    const SpectralVector t3 = project_Q(h2);
    rep.residual_compressible = detail::residual({&qut, &t1, &t2, &grad_a, &t3}, qut + t1 + t2 + grad_a + t3, ref);
  }
  {
    const SpectralVector at{std::vector<SpectralScalar>{cr.a}};
    const SpectralVector t1{std::vector<SpectralScalar>{divergence(multiply(a, u, r))}};
    const SpectralVector t2{std::vector<SpectralScalar>{divergence(qu)}};
    const SpectralVector t3{std::vector<SpectralScalar>{advect(V, a, r)}};
    rep.residual_mass = detail::residual({&at, &t1, &t2, &t3}, at + t1 + t2 + t3, ref);
  }
  {
    const SpectralVector t1 = -1.0 * laplacian(delta);
    const SpectralVector t2 = advect(w, delta, r);
    const SpectralVector t3 = advect(u, D, r);
    rep.residual_director =
        detail::residual({&deltat, &t1, &t2, &G, &t3}, deltat + t1 + t2 - G + t3, ref);
  }
  return rep;
}

}  // namespace nlc

#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlc/propagator.hpp"
#include "nlc/spectral_ops.hpp"

namespace nlc {

/// Isentropic law P(rho) = A rho^gamma with A gamma = 1, so P'(1) = 1.
struct PressureLaw {
  double gamma = 2.0;

  explicit PressureLaw(double g = 2.0) : gamma(g) {
    if (!(g > 1.0)) throw std::invalid_argument("gamma must exceed 1");
  }
  double A() const { return 1.0 / gamma; }
  double pressure(double rho) const { return A() * std::pow(rho, gamma); }
  double dpressure(double rho) const { return std::pow(rho, gamma - 1.0); }
  /// k(a) = P'(1 + a) - 1, written to stay accurate for small a.
  double k(double a) const { return std::expm1((gamma - 1.0) * std::log1p(a)); }
  /// Internal energy density G with G(1) = G'(1) = 0 and G'' = P'/rho.
  double internal(double rho) const { return (pressure(rho) - A() - (rho - 1.0)) / (gamma - 1.0); }
};

/// 1 + a <= 0 somewhere on the grid.
class DensityError : public std::runtime_error {
 public:
  DensityError(std::size_t index, double rho)
      : std::runtime_error(message(index, rho)), index_(index), rho_(rho) {}
  std::size_t index() const { return index_; }
  double density() const { return rho_; }

 private:
  static std::string message(std::size_t index, double rho) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "nonpositive density %.6g at grid point %zu", rho, index);
    return buf;
  }
  std::size_t index_;
  double rho_;
};

struct FluidParams {
  Viscosity visc;
  PressureLaw law;
  ProductRule rule = ProductRule::dealiased;
};

struct CompressibleState {
  SpectralScalar a;  // rho - 1
  SpectralVector v;
  SpectralVector d;
  double t = 0.0;

  const Grid& grid() const { return a.grid(); }
};

struct IncompressibleState {
  SpectralVector V;
  SpectralVector D;
  double t = 0.0;

  const Grid& grid() const { return V.grid(); }
};

/// Time derivatives of a compressible state (or their nonlinear parts).
struct CompressibleRates {
  SpectralScalar a;
  SpectralVector v;
  SpectralVector d;
};

struct IncompressibleRates {
  SpectralVector V;
  SpectralVector D;
};

namespace detail {

using PhysVector = std::vector<RealField>;

inline void require_positive_density(const RealField& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(1.0 + a[i] > 0.0)) throw DensityError(i, 1.0 + a[i]);
}

/// grad[m][c] = d_m w_c in physical space.
inline std::vector<PhysVector> physical_gradient(const SpectralVector& w) {
  std::vector<PhysVector> out(static_cast<std::size_t>(w.grid().dim()));
  for (int m = 0; m < w.grid().dim(); ++m)
    for (const auto& c : w) out[static_cast<std::size_t>(m)].push_back(to_physical(partial(c, m)));
  return out;
}

inline SpectralVector from_products(const PhysVector& f, ProductRule rule) {
  std::vector<SpectralScalar> comps;
  for (const auto& c : f) comps.push_back(from_product(c, rule));
  return SpectralVector(std::move(comps));
}

/// (u . grad) w from physical velocity and gradient tables.
inline PhysVector advection(const PhysVector& u, const std::vector<PhysVector>& grad_w) {
  const std::size_t comps = grad_w.front().size();
  PhysVector out(comps, RealField(u.front().grid()));
  for (std::size_t c = 0; c < comps; ++c)
    for (std::size_t m = 0; m < u.size(); ++m)
      for (std::size_t i = 0; i < out[c].size(); ++i) out[c][i] += u[m][i] * grad_w[m][c][i];
  return out;
}

/// |grad d|^2 pointwise.
inline RealField gradient_energy(const std::vector<PhysVector>& grad_d) {
  RealField out(grad_d.front().front().grid());
  for (const auto& row : grad_d)
    for (const auto& f : row)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += f[i] * f[i];
  return out;
}

/// div(grad d (.) grad d - (1/2)|grad d|^2 I) from the physical gradient table.
inline SpectralVector elastic_divergence(const std::vector<PhysVector>& grad_d, ProductRule rule, bool trace_part) {
  const std::size_t dim = grad_d.size();
  const Grid& g = grad_d.front().front().grid();
  const RealField e = gradient_energy(grad_d);
  SpectralVector out(g, static_cast<int>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      RealField s(g);
      for (std::size_t c = 0; c < grad_d[i].size(); ++c)
        for (std::size_t p = 0; p < s.size(); ++p) s[p] += grad_d[i][c][p] * grad_d[j][c][p];
      if (trace_part && i == j)
        for (std::size_t p = 0; p < s.size(); ++p) s[p] -= 0.5 * e[p];
      out[static_cast<int>(i)] += partial(from_product(s, rule), static_cast<int>(j));
    }
  }
  return out;
}

/// |grad d|^2 d - w . grad d, physical.
inline PhysVector director_forcing(const PhysVector& w, const PhysVector& d, const std::vector<PhysVector>& grad_d) {
  PhysVector out = advection(w, grad_d);
  const RealField e = gradient_energy(grad_d);
  for (std::size_t c = 0; c < out.size(); ++c)
    for (std::size_t i = 0; i < out[c].size(); ++i) out[c][i] = e[i] * d[c][i] - out[c][i];
  return out;
}

}  // namespace detail

/// P(rho) pointwise; rho is the full density field.
inline SpectralScalar pressure(const SpectralScalar& rho, const PressureLaw& law, ProductRule rule = ProductRule::dealiased) {
  RealField r = to_physical(rho);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0.0)) throw DensityError(i, r[i]);
    r[i] = law.pressure(r[i]);
  }
  return from_product(r, rule);
}

/// k(a) = P'(1 + a) - P'(1) pointwise.
inline SpectralScalar k_of_a(const SpectralScalar& a, const PressureLaw& law, ProductRule rule = ProductRule::dealiased) {
  RealField r = to_physical(a);
  detail::require_positive_density(r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = law.k(r[i]);
  return from_product(r, rule);
}

/// Elastic force -div(grad d (.) grad d - (1/2)|grad d|^2 I).
inline SpectralVector ericksen_stress_div(const SpectralVector& d, ProductRule rule = ProductRule::dealiased) {
  SpectralVector f = detail::elastic_divergence(detail::physical_gradient(d), rule, true);
  f *= -1.0;
  return f;
}

/// Nonlinear part |grad d|^2 d - v . grad d of the director equation.
inline SpectralVector director_nonlinear(const SpectralVector& v, const SpectralVector& d,
                                         ProductRule rule = ProductRule::dealiased) {
  return detail::from_products(detail::director_forcing(to_physical(v), to_physical(d), detail::physical_gradient(d)),
                               rule);
}

/// Full director rate Delta d + |grad d|^2 d - v . grad d.
inline SpectralVector director_rhs(const SpectralVector& v, const SpectralVector& d,
                                   ProductRule rule = ProductRule::dealiased) {
  return laplacian(d) + director_nonlinear(v, d, rule);
}

/// Nonlinear parts of the compressible system in velocity form:
///   a:  -div(a v)
///   v:  -v.grad v - (k(a) - a)/(1 + a) grad a + F/(1 + a) - a/(1 + a) (mu Lap v + (mu + lambda) grad div v)
///   d:  |grad d|^2 d - v.grad d
/// where F is the elastic force. The linear remainder (-div v, mu Lap v + (mu + lambda) grad div v - grad a, Lap d)
/// is handled by the caller.
inline CompressibleRates compressible_nonlinear(const CompressibleState& s, const FluidParams& p) {
  const Grid& g = s.grid();
  const int dim = g.dim();
  const std::size_t np = g.real_size();
  const ProductRule rule = p.rule;

  const RealField a = to_physical(s.a);
  detail::require_positive_density(a);
  const detail::PhysVector v = to_physical(s.v);
  const detail::PhysVector d = to_physical(s.d);
  const auto grad_v = detail::physical_gradient(s.v);
  const auto grad_d = detail::physical_gradient(s.d);
  const detail::PhysVector grad_a = to_physical(gradient(s.a));

  CompressibleRates r;

  detail::PhysVector av(static_cast<std::size_t>(dim), RealField(g));
  for (int m = 0; m < dim; ++m)
    for (std::size_t i = 0; i < np; ++i) av[m][i] = a[i] * v[m][i];
  r.a = divergence(detail::from_products(av, rule));
  r.a *= -1.0;

  const SpectralVector force = ericksen_stress_div(s.d, rule);
  const detail::PhysVector f = to_physical(force);
  const SpectralScalar div_v = divergence(s.v);
  const SpectralVector visc = p.visc.mu * laplacian(s.v) + (p.visc.mu + p.visc.lambda) * gradient(div_v);
  const detail::PhysVector vis = to_physical(visc);
  detail::PhysVector nv = detail::advection(v, grad_v);
  for (int m = 0; m < dim; ++m) {
    for (std::size_t i = 0; i < np; ++i) {
      const double rho = 1.0 + a[i];
      const double press = (p.law.k(a[i]) - a[i]) / rho;
      nv[m][i] = -nv[m][i] - press * grad_a[m][i] + (f[m][i] - a[i] * vis[m][i]) / rho;
    }
  }
  r.v = detail::from_products(nv, rule);
  r.d = detail::from_products(detail::director_forcing(v, d, grad_d), rule);
  return r;
}

/// Linear part of the compressible rates.
inline CompressibleRates compressible_linear(const CompressibleState& s, const FluidParams& p) {
  CompressibleRates r;
  const SpectralScalar div_v = divergence(s.v);
  r.a = -1.0 * div_v;
  r.v = p.visc.mu * laplacian(s.v) + (p.visc.mu + p.visc.lambda) * gradient(div_v) - gradient(s.a);
  r.d = laplacian(s.d);
  return r;
}

/// Full compressible time derivatives.
inline CompressibleRates compressible_rhs(const CompressibleState& s, const FluidParams& p) {
  CompressibleRates n = compressible_nonlinear(s, p);
  const CompressibleRates l = compressible_linear(s, p);
  n.a += l.a;
  n.v += l.v;
  n.d += l.d;
  return n;
}

/// Rejects velocities whose divergence is not negligible.
inline void require_solenoidal(const SpectralVector& V, double tol = 1e-8) {
  const double scale = std::max(1.0, l2_norm(V));
  if (l2_norm(divergence(V)) > tol * scale) throw std::invalid_argument("incompressible velocity is not divergence-free");
}

/// Nonlinear parts of the incompressible system:
///   V:  P(-V.grad V - div(grad D (.) grad D))
///   D:  |grad D|^2 D - V.grad D
inline IncompressibleRates incompressible_nonlinear(const IncompressibleState& s, const FluidParams& p) {
  require_solenoidal(s.V);
  const detail::PhysVector V = to_physical(s.V);
  const detail::PhysVector D = to_physical(s.D);
  const auto grad_V = detail::physical_gradient(s.V);
  const auto grad_D = detail::physical_gradient(s.D);
  IncompressibleRates r;
  SpectralVector nv = detail::from_products(detail::advection(V, grad_V), p.rule);
  nv += detail::elastic_divergence(grad_D, p.rule, false);
  nv *= -1.0;
  r.V = project_P(nv);
  r.D = detail::from_products(detail::director_forcing(V, D, grad_D), p.rule);
  return r;
}

inline IncompressibleRates incompressible_rhs(const IncompressibleState& s, const FluidParams& p) {
  IncompressibleRates r = incompressible_nonlinear(s, p);
  r.V += p.visc.mu * laplacian(s.V);
  r.D += laplacian(s.D);
  return r;
}

struct Energy {
  double kinetic = 0.0;
  double internal = 0.0;
  double elastic = 0.0;
  double total = 0.0;
};

/// Energy by grid quadrature: kinetic (1/2) rho |v|^2, internal G(rho), elastic (1/2)|grad d|^2.
inline Energy energy(const CompressibleState& s, const PressureLaw& law) {
  const Grid& g = s.grid();
  const RealField a = to_physical(s.a);
  const auto v = to_physical(s.v);
  const RealField e = detail::gradient_energy(detail::physical_gradient(s.d));
  const double cell = g.volume() / static_cast<double>(g.real_size());
  Energy out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double v2 = 0.0;
    for (const auto& c : v) v2 += c[i] * c[i];
    out.kinetic += 0.5 * (1.0 + a[i]) * v2;
    out.internal += law.internal(1.0 + a[i]);
    out.elastic += 0.5 * e[i];
  }
  out.kinetic *= cell;
  out.internal *= cell;
  out.elastic *= cell;
  out.total = out.kinetic + out.internal + out.elastic;
  return out;
}

inline Energy energy(const IncompressibleState& s) {
  const Grid& g = s.grid();
  const auto v = to_physical(s.V);
  const RealField e = detail::gradient_energy(detail::physical_gradient(s.D));
  const double cell = g.volume() / static_cast<double>(g.real_size());
  Energy out;
  for (std::size_t i = 0; i < e.size(); ++i) {
    double v2 = 0.0;
    for (const auto& c : v) v2 += c[i] * c[i];
    out.kinetic += 0.5 * v2;
    out.elastic += 0.5 * e[i];
  }
  out.kinetic *= cell;
  out.elastic *= cell;
  out.total = out.kinetic + out.elastic;
  return out;
}

/// Named initial data.
struct PresetParams {
  std::string name = "tg-plus-director-twist";
  double eps = 0.1;    // acoustic-pulse amplitude
  double eps1 = 0.2;   // director twist along x
  double eps2 = 0.2;   // director twist along y
  double grad_amp = 0.05;  // gradient part in tg-twist-gradient
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"rest", "taylor-green", "tg-plus-director-twist", "acoustic-pulse",
                                              "tg-twist-gradient"};
  return names;
}

namespace detail {

inline SpectralVector taylor_green(const Grid& g) {
  SpectralVector v(g);
  if (g.dim() == 2) {
    v[0] = sample_spectral(g, [](const auto& x) { return std::sin(x[0]) * std::cos(x[1]); });
    v[1] = sample_spectral(g, [](const auto& x) { return -std::cos(x[0]) * std::sin(x[1]); });
  } else {
    v[0] = sample_spectral(g, [](const auto& x) { return std::sin(x[0]) * std::cos(x[1]) * std::cos(x[2]); });
    v[1] = sample_spectral(g, [](const auto& x) { return -std::cos(x[0]) * std::sin(x[1]) * std::cos(x[2]); });
  }
  return v;
}

inline SpectralVector director_from_phase(const Grid& g, const std::function<double(const std::array<double, 3>&)>& theta) {
  SpectralVector d(g);
  d[0] = sample_spectral(g, [&](const auto& x) { return std::cos(theta(x)); });
  d[1] = sample_spectral(g, [&](const auto& x) { return std::sin(theta(x)); });
  return d;
}

inline SpectralVector uniform_director(const Grid& g) {
  SpectralVector d(g);
  d[0] = constant_field(g, 1.0);
  return d;
}

}  // namespace detail

/// Compressible initial data with rho_0 = 1 unless the preset says otherwise.
inline CompressibleState make_compressible(const Grid& g, const PresetParams& pp) {
  CompressibleState s{SpectralScalar(g), SpectralVector(g), detail::uniform_director(g), 0.0};
  const std::string& n = pp.name;
  if (n == "rest") {
  } else if (n == "taylor-green") {
    s.v = detail::taylor_green(g);
  } else if (n == "tg-plus-director-twist" || n == "tg-twist-gradient") {
    s.v = detail::taylor_green(g);
    const double e1 = pp.eps1, e2 = pp.eps2;
    s.d = detail::director_from_phase(g, [=](const auto& x) { return e1 * std::sin(x[0]) + e2 * std::cos(x[1]); });
    if (n == "tg-twist-gradient")
      s.v.add_scaled(pp.grad_amp, gradient(sample_spectral(g, [](const auto& x) { return std::sin(x[0]); })));
  } else if (n == "acoustic-pulse") {
    const double e = pp.eps;
    s.a = sample_spectral(g, [=](const auto& x) { return e * std::cos(x[0]); });
  } else {
    throw std::invalid_argument("unknown preset '" + n + "'");
  }
  return s;
}

/// Incompressible data paired with a compressible one: V = P v_0, D = d_0.
inline IncompressibleState make_incompressible(const CompressibleState& c) {
  return IncompressibleState{project_P(c.v), c.d, c.t};
}

inline IncompressibleState make_incompressible(const Grid& g, const PresetParams& pp) {
  return make_incompressible(make_compressible(g, pp));
}

}  // namespace nlc

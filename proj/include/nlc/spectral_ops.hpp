#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nlc/field.hpp"

namespace nlc {

/// How pointwise products are brought back to spectral space.
enum class ProductRule {
  dealiased,  ///< 2/3-rule truncation after the transform (solver default)
  exact,      ///< keep every resolved mode (for algebraic identity checks)
};

namespace detail {
inline const cplx I{0.0, 1.0};
}

/// Partial derivative along axis m; Nyquist modes are treated as zero.
inline SpectralScalar partial(const SpectralScalar& f, int m) {
  const Grid& g = f.grid();
  SpectralScalar out(g);
  for (std::size_t i = 0; i < g.spec_size(); ++i) {
    if (g.nyquist(i)) continue;
    out[i] = detail::I * static_cast<double>(g.k(i)[m]) * f[i];
  }
  return out;
}

inline SpectralVector gradient(const SpectralScalar& f) {
  const int dim = f.grid().dim();
  std::vector<SpectralScalar> comps;
  comps.reserve(static_cast<std::size_t>(dim));
  for (int m = 0; m < dim; ++m) comps.push_back(partial(f, m));
  return SpectralVector(std::move(comps));
}

inline SpectralScalar divergence(const SpectralVector& w) {
  const Grid& g = w.grid();
  SpectralScalar out(g);
  for (std::size_t i = 0; i < g.spec_size(); ++i) {
    if (g.nyquist(i)) continue;
    cplx acc = 0.0;
    for (int m = 0; m < g.dim(); ++m) acc += static_cast<double>(g.k(i)[m]) * w[m][i];
    out[i] = detail::I * acc;
  }
  return out;
}

inline SpectralScalar laplacian(const SpectralScalar& f) {
  const Grid& g = f.grid();
  SpectralScalar out(g);
  for (std::size_t i = 0; i < g.spec_size(); ++i) {
    if (g.nyquist(i)) continue;
    out[i] = -g.k2(i) * f[i];
  }
  return out;
}

inline SpectralVector laplacian(const SpectralVector& w) {
  SpectralVector out = w;
  for (int m = 0; m < w.components(); ++m) out[m] = laplacian(w[m]);
  return out;
}

/// Gradient part Q = grad lap^{-1} div. The mean mode goes entirely to P.
inline SpectralVector project_Q(const SpectralVector& w) {
  const Grid& g = w.grid();
  const int dim = g.dim();
  SpectralVector out(g, dim);
  for (std::size_t i = 0; i < g.spec_size(); ++i) {
    const double k2 = g.k2(i);
    if (k2 == 0.0) continue;
    const auto& k = g.k(i);
    cplx kw = 0.0;
    for (int m = 0; m < dim; ++m) kw += static_cast<double>(k[m]) * w[m][i];
    kw /= k2;
    for (int m = 0; m < dim; ++m) out[m][i] = kw * static_cast<double>(k[m]);
  }
  return out;
}

/// Solenoidal part P = I - Q.
inline SpectralVector project_P(const SpectralVector& w) { return w - project_Q(w); }

/// Zeroes every mode with some |k_m| > n/3.
inline SpectralScalar dealias(SpectralScalar f) {
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.spec_size(); ++i)
    if (g.aliased(i)) f[i] = 0.0;
  return f;
}

inline SpectralVector dealias(SpectralVector w) {
  for (auto& c : w) c = dealias(std::move(c));
  return w;
}

/// Zeroes Nyquist modes in place.
inline void drop_nyquist(SpectralScalar& f) {
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.spec_size(); ++i)
    if (g.nyquist(i)) f[i] = 0.0;
}

/// Forward transform of a pointwise product, truncated per rule.
inline SpectralScalar from_product(const RealField& f, ProductRule rule) {
  SpectralScalar s = to_spectral(f);
  if (rule == ProductRule::dealiased) s = dealias(std::move(s));
  return s;
}

/// Pointwise product f g, returned per rule.
inline SpectralScalar multiply(const SpectralScalar& f, const SpectralScalar& g, ProductRule rule) {
  const RealField pf = to_physical(f);
  const RealField pg = to_physical(g);
  RealField out(f.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pf[i] * pg[i];
  return from_product(out, rule);
}

/// Advection (u . grad) w for scalar w.
inline SpectralScalar advect(const SpectralVector& u, const SpectralScalar& w, ProductRule rule) {
  const Grid& g = w.grid();
  const auto pu = to_physical(u);
  RealField out(g);
  for (int m = 0; m < g.dim(); ++m) {
    const RealField dw = to_physical(partial(w, m));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += pu[static_cast<std::size_t>(m)][i] * dw[i];
  }
  return from_product(out, rule);
}

/// Advection (u . grad) w, componentwise.
inline SpectralVector advect(const SpectralVector& u, const SpectralVector& w, ProductRule rule) {
  std::vector<SpectralScalar> comps;
  for (const auto& c : w) comps.push_back(advect(u, c, rule));
  return SpectralVector(std::move(comps));
}

/// Pointwise scalar times vector.
inline SpectralVector multiply(const SpectralScalar& f, const SpectralVector& w, ProductRule rule) {
  std::vector<SpectralScalar> comps;
  for (const auto& c : w) comps.push_back(multiply(f, c, rule));
  return SpectralVector(std::move(comps));
}

/// Pointwise dot product of two vector fields.
inline SpectralScalar dot(const SpectralVector& u, const SpectralVector& w, ProductRule rule) {
  const Grid& g = u.grid();
  RealField out(g);
  for (int m = 0; m < u.components(); ++m) {
    const RealField a = to_physical(u[m]);
    const RealField b = to_physical(w[m]);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a[i] * b[i];
  }
  return from_product(out, rule);
}

/// Maximum pointwise Euclidean length of a vector field.
inline double max_length(const SpectralVector& w) {
  const auto p = to_physical(w);
  double m = 0.0;
  for (std::size_t i = 0; i < p.front().size(); ++i) {
    double s = 0.0;
    for (const auto& c : p) s += c[i] * c[i];
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

/// Real inner product  int f g dx  evaluated from coefficients.
inline double inner(const SpectralScalar& f, const SpectralScalar& h) {
  const Grid& g = f.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.spec_size(); ++i)
    acc += g.weight(i) * (std::conj(f[i]) * h[i]).real();
  const double nn = static_cast<double>(g.real_size());
  return acc * g.volume() / (nn * nn);
}

inline double inner(const SpectralVector& a, const SpectralVector& b) {
  double acc = 0.0;
  for (int m = 0; m < a.components(); ++m) acc += inner(a[m], b[m]);
  return acc;
}

inline double l2_norm(const SpectralScalar& f) { return std::sqrt(std::max(0.0, inner(f, f))); }
inline double l2_norm(const SpectralVector& w) { return std::sqrt(std::max(0.0, inner(w, w))); }

/// Physical-space L2 norm by grid quadrature.
inline double l2_norm(const RealField& f) {
  double acc = 0.0;
  for (double x : f.values()) acc += x * x;
  return std::sqrt(acc * f.grid().volume() / static_cast<double>(f.size()));
}

/// Spatial average (coefficient of the k = 0 mode).
inline double mean(const SpectralScalar& f) {
  return f[0].real() / static_cast<double>(f.grid().real_size());
}

inline SpectralScalar constant_field(const Grid& g, double value) {
  SpectralScalar f(g);
  f[0] = value * static_cast<double>(g.real_size());
  return f;
}

}  // namespace nlc

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "nlc/grid.hpp"

namespace nlc {

/// Real samples of a scalar field on the physical grid.
class RealField {
 public:
  RealField() = default;
  explicit RealField(Grid grid) : grid_(std::move(grid)), v_(grid_.real_size(), 0.0) {}
  RealField(Grid grid, std::vector<double> values) : grid_(std::move(grid)), v_(std::move(values)) {
    if (v_.size() != grid_.real_size()) throw std::invalid_argument("sample count does not match grid");
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  Grid grid_;
  std::vector<double> v_;
};

/// Real periodic scalar field stored as Fourier coefficients (half spectrum).
class SpectralScalar {
 public:
  SpectralScalar() = default;
  explicit SpectralScalar(Grid grid) : grid_(std::move(grid)), c_(grid_.spec_size()) {}

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return c_.size(); }
  cplx& operator[](std::size_t i) { return c_[i]; }
  const cplx& operator[](std::size_t i) const { return c_[i]; }
  std::span<cplx> coeffs() { return c_; }
  std::span<const cplx> coeffs() const { return c_; }

  SpectralScalar& operator+=(const SpectralScalar& o) {
    assert(o.size() == size());
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  SpectralScalar& operator-=(const SpectralScalar& o) {
    assert(o.size() == size());
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  SpectralScalar& operator*=(double s) {
    for (cplx& x : c_) x *= s;
    return *this;
  }
  /// this += s * o
  SpectralScalar& add_scaled(double s, const SpectralScalar& o) {
    assert(o.size() == size());
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * o.c_[i];
    return *this;
  }

  friend SpectralScalar operator+(SpectralScalar a, const SpectralScalar& b) { return a += b; }
  friend SpectralScalar operator-(SpectralScalar a, const SpectralScalar& b) { return a -= b; }
  friend SpectralScalar operator*(double s, SpectralScalar a) { return a *= s; }

  bool finite() const {
    return std::all_of(c_.begin(), c_.end(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

 private:
  Grid grid_;
  std::vector<cplx> c_;
};

/// A tuple of spectral scalars sharing one grid (velocities, directors).
class SpectralVector {
 public:
  SpectralVector() = default;
  SpectralVector(const Grid& grid, int components) : c_(static_cast<std::size_t>(components), SpectralScalar(grid)) {}
  explicit SpectralVector(const Grid& grid) : SpectralVector(grid, grid.dim()) {}
  explicit SpectralVector(std::vector<SpectralScalar> comps) : c_(std::move(comps)) {
    for (const auto& x : c_)
      if (!(x.grid() == c_.front().grid())) throw std::invalid_argument("components live on different grids");
  }

  int components() const { return static_cast<int>(c_.size()); }
  const Grid& grid() const { return c_.front().grid(); }
  SpectralScalar& operator[](int m) { return c_[static_cast<std::size_t>(m)]; }
  const SpectralScalar& operator[](int m) const { return c_[static_cast<std::size_t>(m)]; }
  auto begin() { return c_.begin(); }
  auto end() { return c_.end(); }
  auto begin() const { return c_.begin(); }
  auto end() const { return c_.end(); }

  SpectralVector& operator+=(const SpectralVector& o) {
    for (std::size_t m = 0; m < c_.size(); ++m) c_[m] += o.c_[m];
    return *this;
  }
  SpectralVector& operator-=(const SpectralVector& o) {
    for (std::size_t m = 0; m < c_.size(); ++m) c_[m] -= o.c_[m];
    return *this;
  }
  SpectralVector& operator*=(double s) {
    for (auto& x : c_) x *= s;
    return *this;
  }
  SpectralVector& add_scaled(double s, const SpectralVector& o) {
    for (std::size_t m = 0; m < c_.size(); ++m) c_[m].add_scaled(s, o.c_[m]);
    return *this;
  }
  friend SpectralVector operator+(SpectralVector a, const SpectralVector& b) { return a += b; }
  friend SpectralVector operator-(SpectralVector a, const SpectralVector& b) { return a -= b; }
  friend SpectralVector operator*(double s, SpectralVector a) { return a *= s; }

  bool finite() const {
    return std::all_of(c_.begin(), c_.end(), [](const SpectralScalar& x) { return x.finite(); });
  }

 private:
  std::vector<SpectralScalar> c_;
};

inline SpectralScalar to_spectral(const RealField& f) {
  SpectralScalar out(f.grid());
  f.grid().forward(f.values(), out.coeffs());
  return out;
}

inline RealField to_physical(const SpectralScalar& f) {
  RealField out(f.grid());
  f.grid().inverse(f.coeffs(), out.values());
  return out;
}

inline std::vector<RealField> to_physical(const SpectralVector& w) {
  std::vector<RealField> out;
  out.reserve(static_cast<std::size_t>(w.components()));
  for (const auto& c : w) out.push_back(to_physical(c));
  return out;
}

/// Samples fn(x) on the grid; x is a 3-array with unused trailing entries zero.
inline RealField sample(const Grid& grid, const std::function<double(const std::array<double, 3>&)>& fn) {
  RealField out(grid);
  for (std::size_t i = 0; i < grid.real_size(); ++i) {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int m = 0; m < grid.dim(); ++m) x[m] = grid.coordinate(i, m);
    out[i] = fn(x);
  }
  return out;
}

inline SpectralScalar sample_spectral(const Grid& grid,
                                      const std::function<double(const std::array<double, 3>&)>& fn) {
  return to_spectral(sample(grid, fn));
}

/// Restores exact Hermitian symmetry in the self-paired planes of the half
/// spectrum (last-axis wavenumber 0 and n/2).
inline void hermitize(SpectralScalar& f) {
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.spec_size(); ++i) {
    if (g.weight(i) != 1.0) continue;
    const std::size_t p = g.partner(i);
    if (p == i) {
      f[i] = cplx(f[i].real(), 0.0);
    } else if (i < p) {
      const cplx avg = 0.5 * (f[i] + std::conj(f[p]));
      f[i] = avg;
      f[p] = std::conj(avg);
    }
  }
}

}  // namespace nlc

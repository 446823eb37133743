#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "nlc/grid.hpp"

namespace nlc {

/// Dense real 2x2 matrix, row-major.
struct Mat2 {
  double m00 = 0.0, m01 = 0.0, m10 = 0.0, m11 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  friend Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
  }
  friend Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
  }
  friend Mat2 operator*(double s, const Mat2& a) { return {s * a.m00, s * a.m01, s * a.m10, s * a.m11}; }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
            a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
  }
  double norm1() const { return std::max(std::abs(m00) + std::abs(m10), std::abs(m01) + std::abs(m11)); }
  double spectral_radius() const {
    const double tr = m00 + m11;
    const double det = m00 * m11 - m01 * m10;
    const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr / 4.0 - det));
    return std::max(std::abs(tr / 2.0 + disc), std::abs(tr / 2.0 - disc));
  }
};

/// Scalar exponential and the first two phi functions at one argument.
template <class T>
struct PhiTriple {
  T e{}, phi1{}, phi2{};
};

/// e^z, phi1(z) = (e^z - 1)/z, phi2(z) = (e^z - 1 - z)/z^2; series near 0.
template <class T>
PhiTriple<T> phi_functions(T z) {
  PhiTriple<T> r;
  r.e = std::exp(z);
  if (std::abs(z) < 1.0) {
    // phi_k(z) = sum_n z^n / (n + k)!
    T term1 = T(1.0);        // z^n/(n+1)!
    T term2 = T(0.5);        // z^n/(n+2)!
    T s1 = term1, s2 = term2;
    for (int n = 1; n < 30; ++n) {
      term1 *= z / static_cast<double>(n + 1);
      term2 *= z / static_cast<double>(n + 2);
      s1 += term1;
      s2 += term2;
    }
    r.phi1 = s1;
    r.phi2 = s2;
  } else {
    r.phi1 = (r.e - T(1.0)) / z;
    r.phi2 = (r.phi1 - T(1.0)) / z;
  }
  return r;
}

/// Generator of the linearised acoustic block acting on (a_k, z_k) where
/// z_k = i (k/|k|).v_k:  a' = -|k| z,  z' = |k| a - nu |k|^2 z.
inline Mat2 acoustic_generator(double kappa, double nu) { return {0.0, -kappa, kappa, -nu * kappa * kappa}; }

/// Threshold on |q^2| (relative to |k|^2) below which the block is treated as
/// exactly critically damped.
inline constexpr double defective_threshold = 1e-12;

/// Closed-form exp(t M) for the acoustic block.
///
/// With s = -nu|k|^2/2 and q^2 = s^2 - |k|^2, exp(tM) = c I + h (M - s I) where
/// c = e^{st} cosh(qt) and h = e^{st} sinh(qt)/q. At the double eigenvalue
/// (nu|k| = 2) this reduces to the Jordan form e^{st}(I + t(M - s I)).
inline Mat2 acoustic_exponential(double kappa, double nu, double t) {
  if (kappa == 0.0) return Mat2::identity();
  const Mat2 M = acoustic_generator(kappa, nu);
  const double s = -0.5 * nu * kappa * kappa;
  const double q2 = s * s - kappa * kappa;
  const Mat2 N = M - s * Mat2::identity();
  double c = 0.0, h = 0.0;
  if (std::abs(q2) < defective_threshold * kappa * kappa) {
    const double es = std::exp(s * t);
    c = es;
    h = es * t;
  } else if (std::abs(q2) * t * t <= 1.0) {
    const double x = q2 * t * t;
    double tc = 1.0, th = 1.0, sc = 1.0, sh = 1.0;
    for (int n = 1; n < 20; ++n) {
      tc *= x / static_cast<double>((2 * n - 1) * (2 * n));
      th *= x / static_cast<double>((2 * n) * (2 * n + 1));
      sc += tc;
      sh += th;
    }
    const double es = std::exp(s * t);
    c = es * sc;
    h = es * t * sh;
  } else if (q2 > 0.0) {
    const double q = std::sqrt(q2);
    const double slow_fast = s - q;                  // fast eigenvalue, well conditioned
    const double slow = kappa * kappa / slow_fast;   // product of eigenvalues is |k|^2
    const double ep = std::exp(slow * t);
    const double em = std::exp(slow_fast * t);
    c = 0.5 * (ep + em);
    h = (ep - em) / (2.0 * q);
  } else {
    const double w = std::sqrt(-q2);
    const double es = std::exp(s * t);
    c = es * std::cos(w * t);
    h = es * std::sin(w * t) / w;
  }
  return c * Mat2::identity() + h * N;
}

/// exp(hM), phi1(hM), phi2(hM) for the acoustic block.
///
/// Well-separated eigenvalues use divided differences of the scalar phi
/// functions; nearly coincident ones use Taylor evaluation with scaling and
/// squaring. The exponential itself always comes from the closed form.
inline PhiTriple<Mat2> acoustic_phi(double kappa, double nu, double h) {
  PhiTriple<Mat2> r;
  r.e = acoustic_exponential(kappa, nu, h);
  if (kappa == 0.0) {
    r.phi1 = Mat2::identity();
    r.phi2 = 0.5 * Mat2::identity();
    return r;
  }
  const Mat2 A = h * acoustic_generator(kappa, nu);
  const double s = -0.5 * nu * kappa * kappa;
  const double q2 = s * s - kappa * kappa;
  const double sep = 2.0 * std::sqrt(std::abs(q2)) * h;  // |z+ - z-|
  if (sep >= 0.5) {
    using C = std::complex<double>;
    C zp, zm;
    if (q2 > 0.0) {
      const double q = std::sqrt(q2);
      const double fast = s - q;
      zm = C(h * fast, 0.0);
      zp = C(h * kappa * kappa / fast, 0.0);
    } else {
      const double w = std::sqrt(-q2);
      zp = C(h * s, h * w);
      zm = C(h * s, -h * w);
    }
    const auto fp = phi_functions(zp);
    const auto fm = phi_functions(zm);
    const Mat2 N = A - (h * s) * Mat2::identity();
    auto combine = [&](C vp, C vm) {
      const double alpha = (0.5 * (vp + vm)).real();
      const double beta = ((vp - vm) / (zp - zm)).real();
      return alpha * Mat2::identity() + beta * N;
    };
    r.phi1 = combine(fp.phi1, fm.phi1);
    r.phi2 = combine(fp.phi2, fm.phi2);
    return r;
  }
  int squarings = 0;
  double nrm = A.norm1();
  while (nrm > 0.5) {
    nrm *= 0.5;
    ++squarings;
  }
  const Mat2 B = std::ldexp(1.0, -squarings) * A;
  Mat2 E = Mat2::identity(), P1 = Mat2::identity(), P2 = 0.5 * Mat2::identity();
  Mat2 pow = Mat2::identity();
  double f0 = 1.0, f1 = 1.0, f2 = 2.0;  // n!, (n+1)!, (n+2)!
  for (int n = 1; n < 25; ++n) {
    pow = pow * B;
    f0 *= n;
    f1 *= n + 1;
    f2 *= n + 2;
    E = E + (1.0 / f0) * pow;
    P1 = P1 + (1.0 / f1) * pow;
    P2 = P2 + (1.0 / f2) * pow;
  }
  const Mat2 Id = Mat2::identity();
  for (int i = 0; i < squarings; ++i) {
    const Mat2 EpI = E + Id;
    P2 = 0.25 * (P2 * EpI + P1);
    P1 = 0.5 * (P1 * EpI);
    E = E * E;
  }
  r.phi1 = P1;
  r.phi2 = P2;
  return r;
}

/// Viscosity pair; nu = lambda + 2 mu acts on the potential part of velocity.
struct Viscosity {
  double mu = 1.0;
  double lambda = 0.0;

  double nu() const { return lambda + 2.0 * mu; }
  void validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("shear viscosity mu must be positive");
    if (!(nu() > 0.0)) throw std::invalid_argument("nu = lambda + 2 mu must be positive");
  }
};

/// Per-mode exact propagators of the linear part over one step h:
/// the acoustic (a, Qv) block for compressible flow, diffusion e^{-mu|k|^2 h}
/// for the solenoidal velocity and e^{-|k|^2 h} for the director.
class LinearPropagator {
 public:
  LinearPropagator() = default;

  LinearPropagator(const Grid& grid, Viscosity visc, double h, bool acoustic)
      : grid_(grid), visc_(visc), h_(h), acoustic_(acoustic) {
    visc_.validate();
    if (!(h > 0.0)) throw std::invalid_argument("time step must be positive");
    const std::size_t n = grid.spec_size();
    solenoidal_.resize(n);
    director_.resize(n);
    if (acoustic_) block_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double k2 = grid.k2(i);
      solenoidal_[i] = phi_functions(-visc_.mu * k2 * h);
      director_[i] = phi_functions(-k2 * h);
      if (acoustic_) block_[i] = acoustic_phi(std::sqrt(k2), visc_.nu(), h);
    }
  }

  const Grid& grid() const { return grid_; }
  double dt() const { return h_; }
  bool acoustic() const { return acoustic_; }
  const Viscosity& viscosity() const { return visc_; }
  const PhiTriple<Mat2>& block(std::size_t i) const { return block_[i]; }
  const PhiTriple<double>& solenoidal(std::size_t i) const { return solenoidal_[i]; }
  const PhiTriple<double>& director(std::size_t i) const { return director_[i]; }

 private:
  Grid grid_;
  Viscosity visc_;
  double h_ = 0.0;
  bool acoustic_ = false;
  std::vector<PhiTriple<Mat2>> block_;
  std::vector<PhiTriple<double>> solenoidal_;
  std::vector<PhiTriple<double>> director_;
};

/// Which function of the linear operator to apply.
enum class PhiKind { exp, phi1, phi2 };

template <class T>
const T& select(const PhiTriple<T>& p, PhiKind kind) {
  switch (kind) {
    case PhiKind::exp: return p.e;
    case PhiKind::phi1: return p.phi1;
    default: return p.phi2;
  }
}

}  // namespace nlc

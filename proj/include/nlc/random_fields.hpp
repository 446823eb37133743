#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "nlc/spectral_ops.hpp"

namespace nlc {

/// SplitMix64 finaliser; turns (master seed, index) into independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 1));
}

/// Which wavevectors a random field may occupy.
struct SpectralSupport {
  double kmin = 0.5;          // |k| >= kmin (excludes the mean by default)
  double kmax = 1e300;        // |k| <= kmax
  int band = -1;              // |k_m| <= band on every axis; -1 = no restriction
  double decay = -1.0;        // amplitude ~ |k|^-decay; < 0 picks n/2 + 2
};

/// Random real field with Gaussian coefficients on the given support.
/// Nyquist modes are never populated so derivatives stay exact.
inline SpectralScalar random_field(const Grid& g, std::uint64_t seed, const SpectralSupport& sup = {}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double decay = sup.decay < 0.0 ? g.dim() / 2.0 + 2.0 : sup.decay;
  SpectralScalar f(g);
  for (std::size_t i = 0; i < g.spec_size(); ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    if (g.nyquist(i)) continue;
    const double r = g.kabs(i);
    if (r < sup.kmin || r > sup.kmax) continue;
    if (sup.band >= 0) {
      bool inside = true;
      for (int m = 0; m < g.dim(); ++m) inside = inside && std::abs(g.k(i)[m]) <= sup.band;
      if (!inside) continue;
    }
    const double amp = r > 0.0 ? std::pow(r, -decay) : 1.0;
    f[i] = amp * static_cast<double>(g.real_size()) * cplx(re, im);
  }
  hermitize(f);
  return f;
}

inline SpectralVector random_vector(const Grid& g, std::uint64_t seed, const SpectralSupport& sup = {}) {
  std::vector<SpectralScalar> comps;
  for (int m = 0; m < g.dim(); ++m) comps.push_back(random_field(g, derive_seed(seed, static_cast<std::uint64_t>(m)), sup));
  return SpectralVector(std::move(comps));
}

/// Rescales f so its L2 norm equals target (no-op on the zero field).
template <class Field>
Field normalized(Field f, double target = 1.0) {
  const double n = l2_norm(f);
  if (n > 0.0) f *= target / n;
  return f;
}

}  // namespace nlc

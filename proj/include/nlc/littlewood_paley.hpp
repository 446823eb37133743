#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nlc/spectral_ops.hpp"

namespace nlc::lp {

/// Smooth monotone transition: 0 for t <= 0, 1 for t >= 1, C-infinity in between.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

inline constexpr double annulus_inner = 3.0 / 4.0;
inline constexpr double annulus_outer = 8.0 / 3.0;

/// Radial cutoff: 1 on [0, 3/4], 0 on [4/3, inf).
inline double cutoff(double r) {
  constexpr double lo = annulus_inner;
  constexpr double hi = annulus_outer / 2.0;
  return smooth_step((hi - r) / (hi - lo));
}

/// Dyadic profile phi(r) = cutoff(r/2) - cutoff(r), supported in [3/4, 8/3].
/// Telescoping gives sum_j phi(2^-j r) = 1 for every r > 0.
inline double profile(double r) { return cutoff(0.5 * r) - cutoff(r); }

/// phi(2^-j r), written so that neighbouring j share bitwise-identical cutoff
/// evaluations and the partition of unity telescopes in floating point.
inline double profile_at(int j, double r) {
  return cutoff(std::ldexp(r, -j - 1)) - cutoff(std::ldexp(r, -j));
}

/// Littlewood-Paley partition tabulated on one grid.
///
/// j_min = -1 is the lowest block touching |k| = 1. j_max is the smallest
/// block index whose cumulative cutoff still covers the grid corner, so the
/// partition is complete on every resolved wavevector.
class DyadicFilter {
 public:
  DyadicFilter() = default;

  explicit DyadicFilter(const Grid& grid) : grid_(grid) {
    j_min_ = -1;
    // need cutoff(2^{-j_max-1} |k|_max) == 1, i.e. |k|_max <= (3/4) 2^{j_max+1}
    j_max_ = static_cast<int>(std::ceil(std::log2(grid.n() / 2.0)));
    while (annulus_inner * std::ldexp(1.0, j_max_ + 1) < grid.max_kabs()) ++j_max_;
    const std::size_t nj = static_cast<std::size_t>(j_max_ - j_min_ + 1);
    table_.assign(nj * grid.spec_size(), 0.0);
    for (std::size_t i = 0; i < grid.spec_size(); ++i) {
      const double r = grid.kabs(i);
      if (r == 0.0) continue;
      for (int j = j_min_; j <= j_max_; ++j) table_[slot(j) * grid.spec_size() + i] = profile_at(j, r);
    }
  }

  const Grid& grid() const { return grid_; }
  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }
  bool in_range(int j) const { return j >= j_min_ && j <= j_max_; }

  /// phi(2^-j |k|) for spectral index i.
  double weight(int j, std::size_t i) const { return table_[slot(j) * grid_.spec_size() + i]; }

  /// Sum over the resolved range at spectral index i.
  double partition_sum(std::size_t i) const {
    double acc = 0.0;
    for (int j = j_min_; j <= j_max_; ++j) acc += weight(j, i);
    return acc;
  }

 private:
  std::size_t slot(int j) const { return static_cast<std::size_t>(j - j_min_); }

  Grid grid_;
  int j_min_ = 0;
  int j_max_ = -1;
  std::vector<double> table_;
};

/// Result of one dyadic block; out_of_range marks a j outside the resolved band.
struct BlockResult {
  SpectralScalar block;
  bool out_of_range = false;
};

inline BlockResult apply_block(const SpectralScalar& u, int j, const DyadicFilter& filter) {
  BlockResult r{SpectralScalar(u.grid()), !filter.in_range(j)};
  if (r.out_of_range) return r;
  for (std::size_t i = 0; i < u.size(); ++i) r.block[i] = filter.weight(j, i) * u[i];
  return r;
}

struct BlockDecomposition {
  std::vector<int> j;
  std::vector<SpectralScalar> blocks;
  std::vector<double> norms;  // L2 norm of each block
};

inline BlockDecomposition decompose(const SpectralScalar& u, const DyadicFilter& filter) {
  BlockDecomposition d;
  for (int j = filter.j_min(); j <= filter.j_max(); ++j) {
    d.j.push_back(j);
    d.blocks.push_back(apply_block(u, j, filter).block);
    d.norms.push_back(l2_norm(d.blocks.back()));
  }
  return d;
}

/// One component entering a Besov norm as scale * |D|^power f, where |D|^p has
/// symbol |k|^p. Tuples of components share their per-block L2 norms, which is
/// how norms like ||(Qu, a, nu grad a)|| are evaluated.
struct Weighted {
  const SpectralScalar* field;
  int power = 0;
  double scale = 1.0;
};

struct BesovReport {
  double s = 0.0;
  double value = 0.0;
  std::vector<int> j;
  std::vector<double> per_j;     // 2^{js} ||Delta_j u||_{L2}
  double mean_norm = 0.0;        // L2 norm of the excluded mean mode
  double truncation_mass = 0.0;  // L2 norm of u - mean - sum_j Delta_j u
};

inline BesovReport besov_norm(const std::vector<Weighted>& parts, double s, const DyadicFilter& filter) {
  const Grid& g = filter.grid();
  const int nj = filter.j_max() - filter.j_min() + 1;
  std::vector<double> sq(static_cast<std::size_t>(nj), 0.0);
  double mean_sq = 0.0;
  double trunc_sq = 0.0;
  for (const Weighted& w : parts) {
    const SpectralScalar& f = *w.field;
    for (std::size_t i = 0; i < g.spec_size(); ++i) {
      const double k2 = g.k2(i);
      const double amp2 = std::norm(f[i]) * g.weight(i);
      if (k2 == 0.0) {
        if (w.power == 0) mean_sq += w.scale * w.scale * amp2;
        continue;
      }
      const double mult = w.scale * (w.power == 0 ? 1.0 : std::pow(k2, 0.5 * w.power));
      const double a2 = mult * mult * amp2;
      double covered = 0.0;
      for (int jj = 0; jj < nj; ++jj) {
        const double phi = filter.weight(filter.j_min() + jj, i);
        if (phi == 0.0) continue;
        covered += phi;
        sq[static_cast<std::size_t>(jj)] += phi * phi * a2;
      }
      const double gap = 1.0 - covered;
      trunc_sq += gap * gap * a2;
    }
  }
  const double nn = static_cast<double>(g.real_size());
  const double norm = g.volume() / (nn * nn);
  BesovReport r;
  r.s = s;
  for (int jj = 0; jj < nj; ++jj) {
    const int j = filter.j_min() + jj;
    const double c = std::pow(2.0, j * s) * std::sqrt(sq[static_cast<std::size_t>(jj)] * norm);
    r.j.push_back(j);
    r.per_j.push_back(c);
    r.value += c;
  }
  r.mean_norm = std::sqrt(mean_sq * norm);
  r.truncation_mass = std::sqrt(trunc_sq * norm);
  return r;
}

inline BesovReport besov_norm(const SpectralScalar& u, double s, const DyadicFilter& filter, int power = 0) {
  return besov_norm({Weighted{&u, power, 1.0}}, s, filter);
}

inline BesovReport besov_norm(const SpectralVector& u, double s, const DyadicFilter& filter, int power = 0) {
  std::vector<Weighted> parts;
  for (const auto& c : u) parts.push_back({&c, power, 1.0});
  return besov_norm(parts, s, filter);
}

/// Shorthand for the scalar value of a Besov norm.
template <class Field>
double besov(const Field& u, double s, const DyadicFilter& filter, int power = 0) {
  return besov_norm(u, s, filter, power).value;
}

/// u_low = mean + sum_{j <= j0} Delta_j u, u_high = u - u_low.
inline std::pair<SpectralScalar, SpectralScalar> lowhigh_split(const SpectralScalar& u, int j0,
                                                               const DyadicFilter& filter) {
  if (!filter.in_range(j0)) throw std::invalid_argument("low/high threshold outside resolved dyadic range");
  SpectralScalar low(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u.grid().k2(i) == 0.0) {
      low[i] = u[i];
      continue;
    }
    double w = 0.0;
    for (int j = filter.j_min(); j <= j0; ++j) w += filter.weight(j, i);
    low[i] = w * u[i];
  }
  SpectralScalar high = u - low;
  return {std::move(low), std::move(high)};
}

/// Default low/high threshold: largest j with 2^j <= 1/nu, clamped to the band.
inline int default_threshold(double nu, const DyadicFilter& filter) {
  const int j = static_cast<int>(std::floor(std::log2(1.0 / nu)));
  return std::clamp(j, filter.j_min(), filter.j_max());
}

}  // namespace nlc::lp

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlc/littlewood_paley.hpp"
#include "nlc/random_fields.hpp"

namespace nlc::lp {

/// Observed range of ||grad u|| / (2^j ||u||) for annulus-supported fields at one j.
struct BernsteinBand {
  int j = 0;
  int trials = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
};

struct BernsteinReport {
  std::vector<BernsteinBand> bands;
  std::vector<std::uint64_t> offending_seeds;
  bool passed() const { return offending_seeds.empty(); }
};

/// Relative slack for modes sitting exactly on the annulus boundary.
inline constexpr double bernstein_rounding = 1e-12;

/// Two-sided Bernstein check: (3/4) 2^j ||u|| <= ||grad u|| <= (8/3) 2^j ||u|| for
/// random u supported in the annulus 3/4 2^j <= |k| <= 8/3 2^j.
inline BernsteinReport verify_bernstein(int trials, const DyadicFilter& filter, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const Grid& g = filter.grid();
  BernsteinReport rep;
  for (int j = filter.j_min(); j <= filter.j_max(); ++j) {
    SpectralSupport sup;
    sup.kmin = annulus_inner * std::ldexp(1.0, j);
    sup.kmax = annulus_outer * std::ldexp(1.0, j);
    sup.decay = 0.0;
    BernsteinBand band;
    band.j = j;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>((j + 8) * 1000003 + t));
      const SpectralScalar u = random_field(g, s, sup);
      const double nu = l2_norm(u);
      if (nu == 0.0) break;  // annulus holds no resolved non-Nyquist mode
      const double ratio = l2_norm(gradient(u)) / (std::ldexp(1.0, j) * nu);
      ++band.trials;
      band.min_ratio = std::min(band.min_ratio, ratio);
      band.max_ratio = std::max(band.max_ratio, ratio);
      if (ratio < annulus_inner * (1.0 - bernstein_rounding) || ratio > annulus_outer * (1.0 + bernstein_rounding))
        rep.offending_seeds.push_back(s);
    }
    if (band.trials > 0) rep.bands.push_back(band);
  }
  return rep;
}

/// Largest observed ratio on each grid of a resolution pair, and their quotient.
struct StabilityReport {
  std::string name;
  int trials = 0;
  std::vector<int> n;              // grid sizes
  std::vector<double> max_ratio;   // per grid size
  std::vector<std::uint64_t> worst_seed;
  double growth = 0.0;             // max over consecutive grids of max(r1/r0, r0/r1)
  bool finite = true;
  bool passed() const { return finite && growth < 2.0; }
};

namespace detail {

inline SpectralSupport smooth_support(const Grid& g) {
  SpectralSupport sup;
  sup.band = g.n() / 4 - 1;  // products stay alias-free and below Nyquist
  return sup;
}

inline void finish(StabilityReport& rep) {
  rep.growth = 1.0;
  for (std::size_t i = 1; i < rep.max_ratio.size(); ++i) {
    const double a = rep.max_ratio[i - 1], b = rep.max_ratio[i];
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      rep.finite = false;
      continue;
    }
    rep.growth = std::max(rep.growth, std::max(a / b, b / a));
  }
  for (double r : rep.max_ratio) rep.finite = rep.finite && std::isfinite(r);
}

}  // namespace detail

/// Product law ||uv||_{s1+s2-n/2} / (||u||_{s1} ||v||_{s2}) over random smooth pairs,
/// evaluated on each grid size in `sizes`.
inline StabilityReport verify_product_law(int trials, double s1, double s2, int dim, const std::vector<int>& sizes,
                                          std::uint64_t seed) {
  const double half = dim / 2.0;
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (s1 > half || s2 > half || !(s1 + s2 > 0.0))
    throw std::invalid_argument("product law needs s1, s2 <= n/2 and s1 + s2 > 0");
  StabilityReport rep;
  rep.name = "product_law";
  rep.trials = trials;
  for (int n : sizes) {
    const Grid g(dim, n);
    const DyadicFilter filter(g);
    const SpectralSupport sup = detail::smooth_support(g);
    double worst = 0.0;
    std::uint64_t worst_seed = 0;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(t));
      const SpectralScalar u = random_field(g, derive_seed(s, 0), sup);
      const SpectralScalar v = random_field(g, derive_seed(s, 1), sup);
      const double lhs = besov(multiply(u, v, ProductRule::exact), s1 + s2 - half, filter);
      const double rhs = besov(u, s1, filter) * besov(v, s2, filter);
      const double r = lhs / rhs;
      if (!std::isfinite(r)) rep.finite = false;
      if (r > worst) {
        worst = r;
        worst_seed = s;
      }
    }
    rep.n.push_back(n);
    rep.max_ratio.push_back(worst);
    rep.worst_seed.push_back(worst_seed);
  }
  detail::finish(rep);
  return rep;
}

/// sum_j 2^{js} || [u.grad, Delta_j] v ||_{L2} for one pair.
inline double commutator_sum(const SpectralVector& u, const SpectralScalar& v, double s, const DyadicFilter& filter) {
  const SpectralScalar adv = advect(u, v, ProductRule::exact);
  double acc = 0.0;
  for (int j = filter.j_min(); j <= filter.j_max(); ++j) {
    const SpectralScalar vj = apply_block(v, j, filter).block;
    const SpectralScalar c = advect(u, vj, ProductRule::exact) - apply_block(adv, j, filter).block;
    acc += std::pow(2.0, j * s) * l2_norm(c);
  }
  return acc;
}

/// Commutator estimate ratio commutator_sum / (||grad u||_{n/2} ||v||_s) over random pairs.
inline StabilityReport verify_commutator(int trials, double s, int dim, const std::vector<int>& sizes,
                                         std::uint64_t seed) {
  const double half = dim / 2.0;
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (s != half && s != half - 1.0) throw std::invalid_argument("commutator estimate needs s = n/2 or n/2 - 1");
  StabilityReport rep;
  rep.name = "commutator";
  rep.trials = trials;
  for (int n : sizes) {
    const Grid g(dim, n);
    const DyadicFilter filter(g);
    const SpectralSupport sup = detail::smooth_support(g);
    double worst = 0.0;
    std::uint64_t worst_seed = 0;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t sd = derive_seed(seed, static_cast<std::uint64_t>(t));
      const SpectralVector u = random_vector(g, derive_seed(sd, 0), sup);
      const SpectralScalar v = random_field(g, derive_seed(sd, 1), sup);
      const double lhs = commutator_sum(u, v, s, filter);
      const double rhs = besov(u, half, filter, 1) * besov(v, s, filter);
      const double r = lhs / rhs;
      if (!std::isfinite(r)) rep.finite = false;
      if (r > worst) {
        worst = r;
        worst_seed = sd;
      }
    }
    rep.n.push_back(n);
    rep.max_ratio.push_back(worst);
    rep.worst_seed.push_back(worst_seed);
  }
  detail::finish(rep);
  return rep;
}

struct InterpolationReport {
  double s = 0.0;
  double lhs = 0.0;       // ||u||_s
  double rhs = 0.0;       // ||u||_{s1}^theta ||u||_{s2}^{1-theta}
  double constant = 0.0;  // lhs / rhs
};

/// Observed constant in ||u||_s <= C ||u||_{s1}^theta ||u||_{s2}^{1-theta}, s = theta s1 + (1-theta) s2.
inline InterpolationReport verify_interpolation(const SpectralScalar& u, double s1, double s2, double theta,
                                                const DyadicFilter& filter) {
  if (!(0.0 < s1 && s1 < s2)) throw std::invalid_argument("interpolation needs 0 < s1 < s2");
  if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("theta must lie in [0, 1]");
  InterpolationReport r;
  r.s = theta * s1 + (1.0 - theta) * s2;
  r.lhs = besov(u, r.s, filter);
  r.rhs = std::pow(besov(u, s1, filter), theta) * std::pow(besov(u, s2, filter), 1.0 - theta);
  r.constant = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
  return r;
}

}  // namespace nlc::lp

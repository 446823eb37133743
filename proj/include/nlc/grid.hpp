#pragma once

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlc {

using cplx = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

namespace detail {

// The FFTW planner is not reentrant; execution on new arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct GridData {
  int dim = 0;
  int n = 0;
  std::size_t real_size = 0;
  std::size_t spec_size = 0;
  std::vector<std::array<int, 3>> k;  // integer wavevector per spectral index
  std::vector<double> k2;             // |k|^2
  std::vector<unsigned char> nyquist; // any |k_m| == n/2
  std::vector<unsigned char> alias;   // any |k_m| > n/3 (2/3 rule)
  std::vector<double> weight;         // multiplicity in the half spectrum
  std::vector<std::size_t> partner;   // index of -k inside the half spectrum
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  GridData(int dim_, int n_) : dim(dim_), n(n_) {
    const int h = n / 2 + 1;
    real_size = 1;
    for (int m = 0; m < dim; ++m) real_size *= static_cast<std::size_t>(n);
    spec_size = real_size / static_cast<std::size_t>(n) * static_cast<std::size_t>(h);

    auto signed_k = [this](int i) { return i <= n / 2 ? i : i - n; };
    k.resize(spec_size);
    k2.resize(spec_size);
    nyquist.resize(spec_size);
    alias.resize(spec_size);
    weight.resize(spec_size);
    partner.resize(spec_size);

    const int outer0 = n;
    const int outer1 = dim == 3 ? n : 1;
    for (int i0 = 0; i0 < outer0; ++i0) {
      for (int i1 = 0; i1 < outer1; ++i1) {
        for (int il = 0; il < h; ++il) {
          const std::size_t idx =
              (static_cast<std::size_t>(i0) * outer1 + i1) * h + il;
          std::array<int, 3> kv{signed_k(i0), dim == 3 ? signed_k(i1) : il,
                                dim == 3 ? il : 0};
          k[idx] = kv;
          double sq = 0.0;
          bool nyq = false;
          bool al = false;
          for (int m = 0; m < dim; ++m) {
            sq += static_cast<double>(kv[m]) * kv[m];
            nyq = nyq || std::abs(kv[m]) == n / 2;
            al = al || 3 * std::abs(kv[m]) > n;
          }
          k2[idx] = sq;
          nyquist[idx] = nyq;
          alias[idx] = al;
          weight[idx] = (il == 0 || il == n / 2) ? 1.0 : 2.0;
          const int p0 = (n - i0) % n;
          const int p1 = dim == 3 ? (n - i1) % n : i1;
          partner[idx] = (static_cast<std::size_t>(p0) * outer1 + p1) * h + il;
        }
      }
    }

    std::vector<int> shape(static_cast<std::size_t>(dim), n);
    double* r = fftw_alloc_real(real_size);
    fftw_complex* c = fftw_alloc_complex(spec_size);
    {
      std::lock_guard lock(fftw_planner_mutex());
      const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      forward = fftw_plan_dft_r2c(dim, shape.data(), r, c, flags);
      inverse = fftw_plan_dft_c2r(dim, shape.data(), c, r, flags);
    }
    fftw_free(r);
    fftw_free(c);
    if (!forward || !inverse) throw std::runtime_error("FFTW planning failed");
  }

  ~GridData() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }

  GridData(const GridData&) = delete;
  GridData& operator=(const GridData&) = delete;
};

}  // namespace detail

/// Periodic grid on the torus [0, 2pi)^dim with n points per axis.
///
/// Spectral data is stored in the FFTW half-complex layout: the last axis keeps
/// wavenumbers 0..n/2, the other axes keep all n (wrapped to (-n/2, n/2]).
/// Physical samples are row-major with the x axis slowest. Forward transforms
/// are unnormalized; inverse transforms carry the 1/n^dim factor.
class Grid {
 public:
  Grid() = default;

  Grid(int dim, int n) {
    if (dim != 2 && dim != 3)
      throw std::invalid_argument("grid dimension must be 2 or 3");
    if (n < 16 || (n & (n - 1)) != 0)
      throw std::invalid_argument("points per axis must be a power of two >= 16, got " +
                                  std::to_string(n));
    data_ = std::make_shared<const detail::GridData>(dim, n);
  }

  bool valid() const { return data_ != nullptr; }
  int dim() const { return data_->dim; }
  int n() const { return data_->n; }
  std::size_t real_size() const { return data_->real_size; }
  std::size_t spec_size() const { return data_->spec_size; }
  double dx() const { return two_pi / data_->n; }
  double volume() const { return std::pow(two_pi, data_->dim); }

  const std::array<int, 3>& k(std::size_t idx) const { return data_->k[idx]; }
  double k2(std::size_t idx) const { return data_->k2[idx]; }
  double kabs(std::size_t idx) const { return std::sqrt(data_->k2[idx]); }
  bool nyquist(std::size_t idx) const { return data_->nyquist[idx] != 0; }
  bool aliased(std::size_t idx) const { return data_->alias[idx] != 0; }
  double weight(std::size_t idx) const { return data_->weight[idx]; }
  std::size_t partner(std::size_t idx) const { return data_->partner[idx]; }

  /// Largest |k| present on the grid (corner of the cube).
  double max_kabs() const { return std::sqrt(static_cast<double>(dim())) * n() / 2.0; }

  /// Physical coordinate along axis m of the sample with flat index idx.
  double coordinate(std::size_t idx, int m) const {
    std::size_t stride = 1;
    for (int a = dim() - 1; a > m; --a) stride *= static_cast<std::size_t>(n());
    return dx() * static_cast<double>((idx / stride) % static_cast<std::size_t>(n()));
  }

  void forward(std::span<const double> in, std::span<cplx> out) const {
    fftw_execute_dft_r2c(data_->forward, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
  }

  void inverse(std::span<const cplx> in, std::span<double> out) const {
    std::vector<cplx> scratch(in.begin(), in.end());
    fftw_execute_dft_c2r(data_->inverse, reinterpret_cast<fftw_complex*>(scratch.data()),
                         out.data());
    const double scale = 1.0 / static_cast<double>(real_size());
    for (double& x : out) x *= scale;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    if (a.data_ == b.data_) return true;
    if (!a.data_ || !b.data_) return false;
    return a.dim() == b.dim() && a.n() == b.n();
  }

 private:
  std::shared_ptr<const detail::GridData> data_;
};

}  // namespace nlc

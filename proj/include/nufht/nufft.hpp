#ifndef NUFHT_NUFFT_HPP
#define NUFHT_NUFFT_HPP

// Type-3 nonuniform DFT g_j = sum_k c_k exp(i sign s_j x_k).
//
// Points and frequencies are first centred, x = C + dx, s = D + ds, so that
//   g_j = exp(i sign s_j C) sum_k [c_k exp(i sign D dx_k)] exp(i sign ds_j dx_k).
// The bracketed strengths are spread with an exponential-of-semicircle
// kernel onto a uniform grid of spacing h = pi / (2 S) (S the frequency
// half-width), which turns the sum into a trigonometric polynomial
// T(theta) = sum_l b_l exp(i l theta) evaluated at theta_j = sign ds_j h.
// T is evaluated by an ordinary type-2 step on a grid twice as fine:
// deconvolve, FFT, interpolate with the same kernel. Finally each output is
// divided by the kernel's Fourier transform at ds_j.
//
// Grid lengths are even 2,3,5-smooth numbers, about 4 S X / pi + w, so the
// work grows linearly with the space-frequency product.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nufht/fft.hpp"
#include "nufht/special.hpp"

namespace nufht::nufft {

using complex = std::complex<double>;

constexpr std::size_t kDefaultMaxGrid = std::size_t(1) << 28;

enum class Backend { internal, direct };

struct NufftOptions {
  Backend backend = Backend::internal;
  std::size_t max_grid = kDefaultMaxGrid;  // cap on the oversampled FFT length
};

// Backend name and memory cap as configured by the caller or environment.
// "finufft" is accepted and maps to the internal backend, since no FINUFFT
// adapter is compiled into this build.
struct BackendConfig {
  std::string name = "internal";
  std::size_t max_grid = kDefaultMaxGrid;

  static BackendConfig from_env() {
    BackendConfig config;
    if (const char* name = std::getenv("NUFHT_NUFFT_BACKEND"); name != nullptr && *name != '\0') {
      config.name = name;
    }
    if (const char* cap = std::getenv("NUFHT_NUFFT_MAX_GRID"); cap != nullptr && *cap != '\0') {
      char* end = nullptr;
      const unsigned long long value = std::strtoull(cap, &end, 10);
      if (end == cap || *end != '\0' || value == 0) {
        throw std::invalid_argument("NUFHT_NUFFT_MAX_GRID must be a positive integer");
      }
      config.max_grid = static_cast<std::size_t>(value);
    }
    return config;
  }
};

inline NufftOptions nufft_backend_select(const BackendConfig& config = {}) {
  NufftOptions options;
  options.max_grid = config.max_grid;
  if (config.name == "internal" || config.name == "finufft") {
    options.backend = Backend::internal;
  } else if (config.name == "direct") {
    options.backend = Backend::direct;
  } else {
    throw std::invalid_argument("unknown NUFFT backend '" + config.name + "'");
  }
  return options;
}

struct NufftRequest {
  std::span<const double> points;
  std::span<const double> freqs;
  std::span<const complex> strengths;
  double tol = 1e-12;
  int sign = 1;
};

struct FineGrid {
  std::size_t spread_size = 0;  // N1: grid holding the spread strengths
  std::size_t fft_size = 0;     // N2 = 2 N1: oversampled grid of the type-2 step
  double spacing = 0.0;         // physical spacing of the spread grid
  int width = 0;                // kernel width w in grid points
  double beta = 0.0;            // kernel shape parameter
};

// Smallest even n' >= n whose only prime factors are 2, 3 and 5.
inline std::size_t next_smooth_even(std::size_t n) {
  if (n <= 2) return 2;
  if (n % 2 == 1) ++n;
  for (;; n += 2) {
    std::size_t m = n;
    while (m % 2 == 0) m /= 2;
    while (m % 3 == 0) m /= 3;
    while (m % 5 == 0) m /= 5;
    if (m == 1) return n;
  }
}

inline void check_tolerance(double tol) {
  if (!(tol >= 1e-15 * (1.0 - 1e-9) && tol <= 1e-4 * (1.0 + 1e-9))) {
    throw std::invalid_argument("NUFFT tolerance must lie in [1e-15, 1e-4]");
  }
}

inline int kernel_width(double tol) {
  check_tolerance(tol);
  const int w = static_cast<int>(std::ceil(std::log10(1.0 / tol) - 1e-9)) + 2;
  return std::clamp(w, 2, 16);
}

// phi(t) = exp(beta (sqrt(1 - t^2) - 1)) on [-1, 1].
class EsKernel {
 public:
  explicit EsKernel(int width) : width_(width), beta_(2.30 * width), half_(0.5 * width) {
    const auto rule = gauss_legendre(2 * width + 8, 0.0, 1.0);
    nodes_ = rule.nodes;
    weights_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) weights_[i] = 2.0 * rule.weights[i] * (*this)(nodes_[i]);
  }

  int width() const { return width_; }
  double beta() const { return beta_; }
  double half_width() const { return half_; }

  double operator()(double t) const {
    const double s = 1.0 - t * t;
    return s <= 0.0 ? 0.0 : std::exp(beta_ * (std::sqrt(s) - 1.0));
  }

  // int_{-1}^{1} phi(t) cos(k t) dt
  double fourier(double k) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * std::cos(k * nodes_[i]);
    return sum;
  }

  // Weights of the grid points l0..l0+w-1 around the grid coordinate u. The
  // integer part is split off in long double so that the offsets keep full
  // double accuracy on large grids.
  std::int64_t weights(long double u, double* w) const {
    const auto l0 = static_cast<std::int64_t>(std::ceil(u - half_));
    const auto offset = static_cast<double>(static_cast<long double>(l0) - u);
    for (int i = 0; i < width_; ++i) w[i] = (*this)((offset + i) / half_);
    return l0;
  }

 private:
  int width_;
  double beta_;
  double half_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

inline void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string("NUFFT ") + what + " must be finite");
  }
}

// r exp(i sign a b), with the product and the reduction carried in long double
// so that large phases keep their low-order bits.
inline complex phase(double r, int sign, long double a, long double b) {
  const long double t = sign * a * b;
  return {static_cast<double>(r * std::cos(t)), static_cast<double>(r * std::sin(t))};
}

// Exact O(nm) summation.
inline void nudft_direct(std::span<const double> points, std::span<const double> freqs,
                         std::span<const complex> strengths, int sign, std::span<complex> out) {
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    complex sum = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      sum += strengths[k] * phase(1.0, sign, freqs[j], points[k]);
    }
    out[j] = sum;
  }
}

inline std::vector<complex> nudft_direct(const NufftRequest& req) {
  if (req.points.size() != req.strengths.size()) {
    throw std::invalid_argument("NUFFT: points and strengths differ in length");
  }
  std::vector<complex> out(req.freqs.size());
  nudft_direct(req.points, req.freqs, req.strengths, req.sign, out);
  return out;
}

// Reusable type-3 transform for fixed points, frequencies, tolerance and
// sign. Immutable after construction; execute() may be called concurrently.
class Type3Plan {
 public:
  Type3Plan(std::span<const double> points, std::span<const double> freqs, double tol, int sign,
            const NufftOptions& options = {})
      : n_(points.size()), m_(freqs.size()), sign_(sign), backend_(options.backend), kernel_(kernel_width(tol)) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("NUFFT sign must be +1 or -1");
    check_finite(points, "points");
    check_finite(freqs, "frequencies");
    if (n_ == 0 || m_ == 0) return;
    if (backend_ == Backend::direct) {
      points_.assign(points.begin(), points.end());
      freqs_.assign(freqs.begin(), freqs.end());
      return;
    }

    const auto [xmin, xmax] = std::minmax_element(points.begin(), points.end());
    const auto [smin, smax] = std::minmax_element(freqs.begin(), freqs.end());
    const double cx = 0.5 * (*xmin + *xmax);
    const double ds = 0.5 * (*smin + *smax);
    double x_half = 0.5 * (*xmax - *xmin);
    double s_half = 0.5 * (*smax - *smin);
    if (x_half == 0.0 && s_half == 0.0) {
      x_half = 1.0;
      s_half = 1.0;
    } else if (x_half == 0.0) {
      x_half = 1.0 / s_half;
    } else if (s_half * x_half < 1.0) {
      s_half = 1.0 / x_half;
    }

    const int w = kernel_.width();
    const double need = 4.0 * s_half * x_half / std::numbers::pi + w + 2.0;
    grid_.width = w;
    grid_.beta = kernel_.beta();
    grid_.spread_size = next_smooth_even(std::max<std::size_t>(2 * w, static_cast<std::size_t>(std::ceil(need))));
    grid_.fft_size = 2 * grid_.spread_size;
    grid_.spacing = std::numbers::pi / (2.0 * s_half);
    if (grid_.fft_size > options.max_grid) {
      throw std::length_error("NUFFT fine grid of " + std::to_string(grid_.fft_size) +
                              " points exceeds the cap of " + std::to_string(options.max_grid) +
                              " (set NUFHT_NUFFT_MAX_GRID to raise it)");
    }

    const double h = grid_.spacing;
    const double h2 = 2.0 * std::numbers::pi / static_cast<double>(grid_.fft_size);
    const double alpha1 = kernel_.half_width() * h;
    const double alpha2 = kernel_.half_width() * h2;

    // Offsets from the centres and grid coordinates stay in long double: in
    // double their rounding alone costs about u s_half x_half in the phases.
    spread_coord_.resize(n_);
    prephase_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      const long double dx = static_cast<long double>(points[k]) - cx;
      spread_coord_[k] = dx / h;
      prephase_[k] = phase(1.0, sign_, ds, dx);
    }

    const long double grid_scale =
        h * static_cast<long double>(grid_.fft_size) / (2.0L * std::numbers::pi_v<long double>);
    interp_coord_.resize(m_);
    postfactor_.resize(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      const long double dsj = static_cast<long double>(freqs[j]) - ds;
      interp_coord_[j] = sign_ * dsj * grid_scale;
      const double deconv = h / (alpha1 * kernel_.fourier(static_cast<double>(dsj) * alpha1));
      postfactor_[j] = phase(deconv, sign_, freqs[j], cx);
    }

    const auto n1 = static_cast<std::int64_t>(grid_.spread_size);
    mode_scale_.resize(grid_.spread_size);
    for (std::int64_t l = -n1 / 2; l < n1 / 2; ++l) {
      const double phi_hat = alpha2 / (2.0 * std::numbers::pi) * kernel_.fourier(static_cast<double>(l) * alpha2);
      mode_scale_[static_cast<std::size_t>(l + n1 / 2)] = 1.0 / (static_cast<double>(grid_.fft_size) * phi_hat);
    }
  }

  std::size_t num_points() const { return n_; }
  std::size_t num_freqs() const { return m_; }
  const FineGrid& grid() const { return grid_; }
  Backend backend() const { return backend_; }

  void execute(std::span<const complex> strengths, std::span<complex> out) const {
    execute_many(strengths, 1, out);
  }

  // `count` strength vectors stored back to back (count x n), outputs
  // likewise (count x m).
  void execute_many(std::span<const complex> strengths, std::size_t count, std::span<complex> out) const {
    if (strengths.size() != count * n_ || out.size() != count * m_) {
      throw std::invalid_argument("NUFFT: strength/output sizes do not match the plan");
    }
    if (m_ == 0) return;
    if (n_ == 0) {
      std::fill(out.begin(), out.end(), complex(0.0));
      return;
    }
    if (backend_ == Backend::direct) {
      for (std::size_t v = 0; v < count; ++v) {
        nudft_direct(points_, freqs_, strengths.subspan(v * n_, n_), sign_, out.subspan(v * m_, m_));
      }
      return;
    }
    const std::size_t chunk = std::max<std::size_t>(1, kChunkBudget / grid_.fft_size);
    for (std::size_t first = 0; first < count; first += chunk) {
      const std::size_t batch = std::min(chunk, count - first);
      execute_chunk(strengths.subspan(first * n_, batch * n_), batch, out.subspan(first * m_, batch * m_));
    }
  }

 private:
  // Fine-grid points processed together. Batching several vectors only pays
  // while their grids stay cache sized; large grids go one vector at a time.
  static constexpr std::size_t kChunkBudget = std::size_t(1) << 18;

  void execute_chunk(std::span<const complex> strengths, std::size_t batch, std::span<complex> out) const {
    const std::size_t n1 = grid_.spread_size;
    const std::size_t n2 = grid_.fft_size;
    const auto half1 = static_cast<std::int64_t>(n1 / 2);
    const auto size2 = static_cast<std::int64_t>(n2);
    const int w = kernel_.width();
    double weights[32];

    // Spread, then place the deconvolved modes on the oversampled grid.
    std::vector<complex> spread(batch * n1, complex(0.0));
    for (std::size_t k = 0; k < n_; ++k) {
      const std::int64_t l0 = kernel_.weights(spread_coord_[k], weights);
      const std::size_t base = static_cast<std::size_t>(l0 + half1);
      for (std::size_t v = 0; v < batch; ++v) {
        const complex c = strengths[v * n_ + k] * prephase_[k];
        complex* row = spread.data() + v * n1 + base;
        for (int i = 0; i < w; ++i) row[i] += c * weights[i];
      }
    }

    FftBuffer grid(batch * n2);
    for (std::size_t v = 0; v < batch; ++v) {
      complex* g = grid.data() + v * n2;
      std::fill(g, g + n2, complex(0.0));
      const complex* b = spread.data() + v * n1;
      for (std::int64_t l = -half1; l < half1; ++l) {
        const std::size_t src = static_cast<std::size_t>(l + half1);
        const std::size_t dst = static_cast<std::size_t>(l < 0 ? l + size2 : l);
        g[dst] = b[src] * mode_scale_[src];
      }
      fft_inplace(g, n2, +1);
    }

    for (std::size_t j = 0; j < m_; ++j) {
      const std::int64_t q0 = kernel_.weights(interp_coord_[j], weights);
      for (std::size_t v = 0; v < batch; ++v) {
        const complex* g = grid.data() + v * n2;
        complex sum = 0.0;
        for (int i = 0; i < w; ++i) {
          std::int64_t q = (q0 + i) % size2;
          if (q < 0) q += size2;
          sum += g[q] * weights[i];
        }
        out[v * m_ + j] = sum * postfactor_[j];
      }
    }
  }

  std::size_t n_;
  std::size_t m_;
  int sign_;
  Backend backend_;
  EsKernel kernel_;
  FineGrid grid_;
  std::vector<long double> spread_coord_;
  std::vector<complex> prephase_;
  std::vector<long double> interp_coord_;
  std::vector<complex> postfactor_;
  std::vector<double> mode_scale_;
  std::vector<double> points_;
  std::vector<double> freqs_;
};

inline std::vector<complex> nufft_type3(const NufftRequest& req, const NufftOptions& options = {}) {
  if (req.points.size() != req.strengths.size()) {
    throw std::invalid_argument("NUFFT: points and strengths differ in length");
  }
  check_finite(std::span<const double>(reinterpret_cast<const double*>(req.strengths.data()),
                                       2 * req.strengths.size()),
               "strengths");
  Type3Plan plan(req.points, req.freqs, req.tol, req.sign, options);
  std::vector<complex> out(req.freqs.size());
  plan.execute(req.strengths, out);
  return out;
}

}  // namespace nufht::nufft

#endif  // NUFHT_NUFFT_HPP

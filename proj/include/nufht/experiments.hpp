#ifndef NUFHT_EXPERIMENTS_HPP
#define NUFHT_EXPERIMENTS_HPP

// Benchmark setups and the CSV harness behind `nufht bench`.
//
// Random inputs come from std::mt19937_64 seeded with the user's seed.
// Uniform variates are (x >> 11) * 2^-53 and normal variates use the
// Box-Muller transform, so rows are reproducible on any platform.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nufht/special.hpp"
#include "nufht/transform.hpp"

namespace nufht {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct Setup {
  std::vector<double> freqs;
  std::vector<double> points;

  // (w_max - w_min)(r_max - r_min)
  double space_frequency_product() const {
    if (freqs.empty() || points.empty()) return 0.0;
    const auto [w0, w1] = std::minmax_element(freqs.begin(), freqs.end());
    const auto [r0, r1] = std::minmax_element(points.begin(), points.end());
    return (*w1 - *w0) * (*r1 - *r0);
  }
};

// n equispaced points on [0, sqrt(1e5)] and m equispaced frequencies on
// [0, p / sqrt(1e5)].
inline Setup equispaced_setup(std::size_t n, std::size_t m, double p) {
  const double rmax = std::sqrt(1e5);
  Setup s;
  s.points.resize(n);
  s.freqs.resize(m);
  for (std::size_t k = 0; k < n; ++k) s.points[k] = n == 1 ? 0.0 : rmax * k / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < m; ++j) s.freqs[j] = m == 1 ? 0.0 : (p / rmax) * j / static_cast<double>(m - 1);
  return s;
}

// w_j = j_{nu,j}, r_k = j_{nu,k} / j_{nu,n+1}, j, k = 1..n.
inline Setup fourier_bessel_setup(int nu, std::size_t n) {
  const auto roots = bessel_roots(nu, static_cast<int>(n) + 1);
  Setup s;
  s.points.resize(n);
  s.freqs.assign(roots.begin(), roots.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t k = 0; k < n; ++k) s.points[k] = roots[k] / roots[n];
  return s;
}

// w_j = r_j = 10^(log10(n) (j - 1) / (n - 1) - log10(n) / 2), j = 1..n, which
// spreads the samples exponentially over [n^-1/2, n^1/2].
inline Setup exp_points_setup(std::size_t n) {
  Setup s;
  const double top = std::log10(static_cast<double>(n));
  s.points.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = n == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(n - 1);
    s.points[j] = std::pow(10.0, top * t - 0.5 * top);
  }
  s.freqs = s.points;
  return s;
}

inline std::vector<double> gaussian_vector(Rng& rng, std::size_t n) {
  std::vector<double> c(n);
  for (auto& v : c) v = rng.normal();
  return c;
}

// nnz standard normal entries at distinct random positions, zeros elsewhere.
inline std::vector<double> sparse_vector(Rng& rng, std::size_t n, std::size_t nnz) {
  nnz = std::min(nnz, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates driven by the documented generator.
  for (std::size_t i = 0; i < nnz; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - i));
    std::swap(idx[i], idx[std::min(j, n - 1)]);
  }
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 0; i < nnz; ++i) c[idx[i]] = rng.normal();
  return c;
}

inline double relative_l2_error(std::span<const double> approx, std::span<const double> exact) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num += (approx[i] - exact[i]) * (approx[i] - exact[i]);
    den += exact[i] * exact[i];
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

struct BenchRecord {
  std::string experiment;
  std::size_t n = 0;
  std::size_t m = 0;
  double p = 0.0;
  int nu = 0;
  double eps = 0.0;
  double time_ms = 0.0;
  std::optional<double> rel_err;
};

inline constexpr std::string_view kBenchHeader = "experiment,n,m,p,nu,eps,time_ms,rel_err";

inline void write_bench_header(std::ostream& out) { out << kBenchHeader << '\n'; }

inline void write_bench_row(std::ostream& out, const BenchRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, ",%zu,%zu,%.6g,%d,%.3g,%.3f,", r.n, r.m, r.p, r.nu, r.eps, r.time_ms);
  out << r.experiment << buf;
  if (r.rel_err) {
    std::snprintf(buf, sizeof buf, "%.6e", *r.rel_err);
    out << buf;
  }
  out << '\n';
}

inline const std::vector<std::string>& bench_experiments() {
  static const std::vector<std::string> names{"n-scaling",  "m-scaling", "p-scaling", "fourier-bessel",
                                              "exp-points", "eps-sweep", "nu-sweep",  "accuracy"};
  return names;
}

struct BenchOptions {
  std::uint64_t seed = 1;
  std::size_t max_n = std::size_t(1) << 14;
  // Adds a "<experiment>-direct" row timing dense summation per configuration.
  bool direct = false;
  // Each timing is the fastest of this many apply() calls.
  int repeats = 1;
  PlanOptions plan = {};
};

namespace detail {

template <class F>
double best_time_ms(int repeats, F&& f) {
  double best = 1e300;
  for (int i = 0; i < std::max(repeats, 1); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

inline std::vector<std::size_t> doublings(std::size_t start, std::size_t limit) {
  std::vector<std::size_t> sizes;
  for (std::size_t n = start; n <= limit; n *= 2) sizes.push_back(n);
  return sizes;
}

}  // namespace detail

// Times one transform (and optionally dense summation) on a setup. When
// `exact` is given the relative 2-norm error against it is recorded.
inline void bench_configuration(const std::string& name, const Setup& s, int nu, double eps,
                                std::span<const double> c, const BenchOptions& options,
                                const std::function<void(const BenchRecord&)>& emit,
                                const std::vector<double>* exact = nullptr) {
  BenchRecord r;
  r.experiment = name;
  r.n = s.points.size();
  r.m = s.freqs.size();
  r.p = s.space_frequency_product();
  r.nu = nu;
  r.eps = eps;
  const auto plan = build_plan(nu, eps, s.freqs, s.points, options.plan);
  std::vector<double> g(s.freqs.size());
  r.time_ms = detail::best_time_ms(options.repeats, [&] { plan.apply(c, g); });
  if (exact != nullptr) r.rel_err = relative_l2_error(g, *exact);
  emit(r);
  if (options.direct) {
    BenchRecord d = r;
    d.experiment = name + "-direct";
    d.rel_err.reset();
    d.time_ms = detail::best_time_ms(options.repeats, [&] { g = dht_direct(nu, s.freqs, s.points, c); });
    emit(d);
  }
}

inline void run_bench(const std::string& experiment, const BenchOptions& options,
                      const std::function<void(const BenchRecord&)>& emit) {
  Rng rng(options.seed);
  const std::size_t max_n = std::max<std::size_t>(options.max_n, 1);
  if (experiment == "n-scaling" || experiment == "m-scaling") {
    for (std::size_t size : detail::doublings(1000, std::max<std::size_t>(max_n, 1000))) {
      const bool vary_n = experiment == "n-scaling";
      const auto s = equispaced_setup(vary_n ? size : 1000, vary_n ? 1000 : size, 1e5);
      bench_configuration(experiment, s, 0, 1e-8, gaussian_vector(rng, s.points.size()), options, emit);
    }
  } else if (experiment == "p-scaling") {
    for (double p = 1e4; p <= 1e6; p *= 2.0) {
      const auto s = equispaced_setup(1000, 1000, p);
      bench_configuration(experiment, s, 0, 1e-8, gaussian_vector(rng, 1000), options, emit);
    }
  } else if (experiment == "fourier-bessel" || experiment == "exp-points") {
    for (std::size_t n : detail::doublings(1024, std::max<std::size_t>(max_n, 1024))) {
      const auto s = experiment == "exp-points" ? exp_points_setup(n) : fourier_bessel_setup(0, n);
      bench_configuration(experiment, s, 0, 1e-8, gaussian_vector(rng, n), options, emit);
    }
  } else if (experiment == "eps-sweep") {
    for (std::size_t n : detail::doublings(1024, std::max<std::size_t>(max_n, 1024))) {
      const auto s = fourier_bessel_setup(0, n);
      const auto c = gaussian_vector(rng, n);
      for (double eps : {1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14, 1e-15}) {
        bench_configuration(experiment, s, 0, eps, c, options, emit);
      }
    }
  } else if (experiment == "nu-sweep") {
    for (std::size_t n : detail::doublings(1024, std::max<std::size_t>(max_n, 1024))) {
      const auto c = gaussian_vector(rng, n);
      for (int nu : {0, 1, 10, 25, 50, 100}) {
        bench_configuration(experiment, fourier_bessel_setup(nu, n), nu, 1e-8, c, options, emit);
      }
    }
  } else if (experiment == "accuracy") {
    for (std::size_t n = 1000; n <= std::max<std::size_t>(max_n, 1000); n *= 10) {
      const auto s = fourier_bessel_setup(0, n);
      const auto c = sparse_vector(rng, n, 1000);
      // Dense summation skips zero coefficients, so this touches only the nonzeros.
      const auto exact = dht_direct(0, s.freqs, s.points, c);
      for (double eps : {1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14}) {
        bench_configuration(experiment, s, 0, eps, c, options, emit, &exact);
      }
    }
  } else {
    throw std::invalid_argument("unknown experiment '" + experiment + "'");
  }
}

}  // namespace nufht

#endif  // NUFHT_EXPERIMENTS_HPP

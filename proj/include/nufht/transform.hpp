#ifndef NUFHT_TRANSFORM_HPP
#define NUFHT_TRANSFORM_HPP

// The nonuniform fast Hankel transform
//   g_j = sum_k c_k J_nu(w_j r_k),   j = 0..m-1, k = 0..n-1,
// for nonnegative points r_k and frequencies w_j in any order.
//
// build_plan sorts both inputs, looks up the expansion parameters (z, L, M)
// for (nu, eps), partitions the kernel matrix around the hyperbola w r = z and
// precomputes per-block data. apply() then sums three kinds of block:
//
//   local       w r <= z. Wimp's expansion J_nu(x y) = sum_l C_l(x) T_l(y)
//               with x = w R, y = r / R and R the block's largest point gives
//               a rank L + 1 factorization C (T^T c).
//   asymptotic  w r > z. Hankel's expansion turns each block into 2M type-3
//               NUFFTs of the rescaled coefficients r^(-l-1/2) c.
//   direct      small mixed blocks, summed densely.
//
// Each block writes into its own buffer and the buffers are added into the
// output in partition order, so results do not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nufht/bounds.hpp"
#include "nufht/expansions.hpp"
#include "nufht/nufft.hpp"
#include "nufht/partition.hpp"
#include "nufht/special.hpp"

namespace nufht {

struct PlanOptions {
  std::size_t min_size = 1024;
  std::size_t split_candidates = kDefaultSplitCandidates;
  // 0 reads NUFHT_NUM_THREADS, falling back to 1.
  unsigned num_threads = 0;
  // Doubles of precomputed local coefficients and dense direct blocks kept in
  // the plan; blocks past the budget are recomputed on every apply().
  std::size_t cache_budget = std::size_t(1) << 24;
  nufft::NufftOptions nufft = {};
};

namespace detail {

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NUFHT_NUM_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || value < 1) {
      throw std::invalid_argument(std::string("NUFHT_NUM_THREADS must be a positive integer, got '") + env + "'");
    }
    return static_cast<unsigned>(value);
  }
  return 1;
}

inline void check_samples(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument(std::string(what) + " must be finite and nonnegative");
    }
  }
}

// Indices that sort `values` ascending; ties keep their input order.
inline std::vector<std::size_t> sorting_permutation(std::span<const double> values) {
  std::vector<std::size_t> perm(values.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return perm;
}

// T_deg(y) for every degree in 0..top.
inline void chebyshev_all(double y, std::span<double> out) {
  out[0] = 1.0;
  if (out.size() > 1) out[1] = y;
  for (std::size_t d = 2; d < out.size(); ++d) out[d] = 2.0 * y * out[d - 1] - out[d - 2];
}

// v_l = sum_k c_k T_{deg(l)}(r_k / R) over the block's columns.
inline std::vector<double> local_moments(int nu, int L, std::span<const double> points, const Block& b,
                                         std::span<const double> c) {
  const double R = points[b.k1];
  const std::size_t terms = static_cast<std::size_t>(L) + 1;
  const int parity = nu % 2;
  std::vector<double> t(2 * terms);
  std::vector<double> v(terms, 0.0);
  for (std::size_t k = b.k0; k <= b.k1; ++k) {
    if (c[k] == 0.0) continue;
    chebyshev_all(std::min(points[k] / R, 1.0), t);
    for (std::size_t l = 0; l < terms; ++l) v[l] += c[k] * t[2 * l + parity];
  }
  return v;
}

// All points of the block are zero: J_nu(0) is 1 for nu = 0 and 0 otherwise.
inline void zero_radius_block(int nu, const Block& b, std::span<const double> c, std::span<double> g) {
  if (nu != 0) return;
  double sum = 0.0;
  for (std::size_t k = b.k0; k <= b.k1; ++k) sum += c[k];
  for (double& v : g) v += sum;
}

}  // namespace detail

// Adds the local block's contribution to g (length b.rows()). freqs, points
// and c are the full sorted arrays.
inline void apply_local_block(int nu, int L, std::span<const double> freqs, std::span<const double> points,
                              const Block& b, std::span<const double> c, std::span<double> g) {
  const double R = points[b.k1];
  if (R == 0.0) {
    detail::zero_radius_block(nu, b, c, g);
    return;
  }
  const auto v = detail::local_moments(nu, L, points, b, c);
  std::vector<double> coeffs(v.size());
  for (std::size_t j = b.j0; j <= b.j1; ++j) {
    wimp_coefficients(nu, freqs[j] * R, coeffs);
    double sum = 0.0;
    for (std::size_t l = 0; l < v.size(); ++l) sum += coeffs[l] * v[l];
    g[j - b.j0] += sum;
  }
}

namespace detail {

// Type-3 NUFFT for an asymptotic block on rescaled samples r' = s r and
// w' = w / s with s = sqrt(w_j0 / r_k0). Products w r are unchanged, while
// both r' and w' are at least sqrt(z), so the negative powers in Hankel's
// expansion stay in range for any input scaling.
struct AsymptoticKernel {
  double scale = 1.0;
  nufft::Type3Plan transform;

  AsymptoticKernel(std::span<const double> freqs, std::span<const double> points, const Block& b, double tol,
                   const nufft::NufftOptions& options)
      : scale(std::sqrt(freqs[b.j0] / points[b.k0])),
        transform(scaled(points.subspan(b.k0, b.cols()), scale), scaled(freqs.subspan(b.j0, b.rows()), 1.0 / scale),
                  tol, 1, options) {}

  static std::vector<double> scaled(std::span<const double> values, double factor) {
    std::vector<double> out(values.begin(), values.end());
    for (double& v : out) v *= factor;
    return out;
  }
};

inline double asymptotic_tolerance(double eps, int M) { return std::max(eps / (4.0 * M), 1e-15); }

inline void apply_asymptotic_with(const AsymptoticKernel& kernel, int nu, int M, std::span<const double> freqs,
                                  std::span<const double> points, const Block& b, std::span<const double> c,
                                  std::span<double> g) {
  using complex = std::complex<double>;
  const std::size_t n = b.cols();
  const std::size_t m = b.rows();
  const std::size_t terms = 2 * static_cast<std::size_t>(M);
  const auto coeffs = asymptotic_coeffs(nu, static_cast<int>(terms));

  // Strengths for term i: c_k r'_k^(-i-1/2), built by running division.
  std::vector<complex> strengths(terms * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double r = points[b.k0 + k] * kernel.scale;
    const double inv = 1.0 / r;
    double weight = c[b.k0 + k] / std::sqrt(r);
    for (std::size_t i = 0; i < terms; ++i) {
      strengths[i * n + k] = weight;
      weight *= inv;
    }
  }
  std::vector<complex> sums(terms * m);
  kernel.transform.execute_many(strengths, terms, sums);

  const complex rotation = std::polar(1.0, coeffs.phi);
  const double front = std::sqrt(2.0 / std::numbers::pi);
  for (std::size_t j = 0; j < m; ++j) {
    const double w = freqs[b.j0 + j] / kernel.scale;
    const double inv = 1.0 / w;
    double weight = front / std::sqrt(w);
    double total = 0.0;
    for (std::size_t i = 0; i < terms; ++i) {
      const complex s = rotation * sums[i * m + j];
      // Pair l = i / 2 carries (-1)^l; even i takes the real part, odd i the
      // negated imaginary part.
      const double sign = (i / 2) % 2 == 0 ? 1.0 : -1.0;
      const double part = i % 2 == 0 ? s.real() : -s.imag();
      total += sign * coeffs.a[i] * weight * part;
      weight *= inv;
    }
    g[j] += total;
  }
}

}  // namespace detail

// Adds the asymptotic block's contribution to g (length b.rows()) using 2M
// type-3 NUFFTs at tolerance eps / (4M).
inline void apply_asymptotic_block(int nu, int M, double eps, std::span<const double> freqs,
                                   std::span<const double> points, const Block& b, std::span<const double> c,
                                   std::span<double> g, const nufft::NufftOptions& options = {}) {
  const detail::AsymptoticKernel kernel(freqs, points, b, detail::asymptotic_tolerance(eps, M), options);
  detail::apply_asymptotic_with(kernel, nu, M, freqs, points, b, c, g);
}

inline void apply_direct_block(int nu, std::span<const double> freqs, std::span<const double> points,
                               const Block& b, std::span<const double> c, std::span<double> g) {
  for (std::size_t j = b.j0; j <= b.j1; ++j) {
    double sum = 0.0;
    for (std::size_t k = b.k0; k <= b.k1; ++k) {
      if (c[k] != 0.0) sum += c[k] * bessel_j(nu, freqs[j] * points[k]);
    }
    g[j - b.j0] += sum;
  }
}

// O(nm) reference summation in the caller's ordering.
inline std::vector<double> dht_direct(int nu, std::span<const double> freqs, std::span<const double> points,
                                      std::span<const double> c) {
  if (c.size() != points.size()) throw std::invalid_argument("dht_direct: coefficient length must match points");
  if (nu < 0) throw std::domain_error("order nu must be nonnegative");
  detail::check_samples(freqs, "frequencies");
  detail::check_samples(points, "points");
  std::vector<double> g(freqs.size(), 0.0);
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    double sum = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (c[k] != 0.0) sum += c[k] * bessel_j(nu, freqs[j] * points[k]);
    }
    g[j] = sum;
  }
  return g;
}

class Plan {
 public:
  int nu() const { return params_.nu; }
  double eps() const { return eps_; }
  const ExpansionParams& params() const { return params_; }
  const Partition& partition() const { return partition_; }
  std::size_t num_points() const { return points_.size(); }
  std::size_t num_freqs() const { return freqs_.size(); }
  std::span<const double> sorted_points() const { return points_; }
  std::span<const double> sorted_freqs() const { return freqs_; }
  // point_perm()[i] is the caller's index of the i-th smallest point.
  std::span<const std::size_t> point_perm() const { return point_perm_; }
  std::span<const std::size_t> freq_perm() const { return freq_perm_; }
  unsigned num_threads() const { return threads_; }
  // Doubles held in block caches.
  std::size_t cached_values() const { return cached_; }

  std::vector<double> apply(std::span<const double> c) const {
    std::vector<double> g(freqs_.size());
    apply(c, g);
    return g;
  }

  void apply(std::span<const double> c, std::span<double> g) const {
    if (c.size() != points_.size()) {
      throw std::invalid_argument("apply: expected " + std::to_string(points_.size()) + " coefficients, got " +
                                  std::to_string(c.size()));
    }
    if (g.size() != freqs_.size()) throw std::invalid_argument("apply: output length must match frequencies");
    for (double v : c) {
      if (!std::isfinite(v)) throw std::invalid_argument("apply: coefficients must be finite");
    }
    std::vector<double> cs(c.size());
    for (std::size_t i = 0; i < cs.size(); ++i) cs[i] = c[point_perm_[i]];

    const auto& blocks = partition_.blocks;
    std::vector<std::vector<double>> parts(blocks.size());
    auto run = [&](std::size_t i) {
      parts[i].assign(blocks[i].rows(), 0.0);
      evaluate(i, cs, parts[i]);
    };
    const unsigned workers = std::min<std::size_t>(threads_, blocks.size());
    if (workers <= 1) {
      for (std::size_t i = 0; i < blocks.size(); ++i) run(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::exception_ptr failure;
      std::mutex failure_mutex;
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < blocks.size(); i = next++) {
            try {
              run(i);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
      for (auto& th : pool) th.join();
      if (failure) std::rethrow_exception(failure);
    }

    std::vector<double> gs(freqs_.size(), 0.0);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& b = blocks[i];
      for (std::size_t j = 0; j < b.rows(); ++j) gs[b.j0 + j] += parts[i][j];
    }
    for (std::size_t i = 0; i < gs.size(); ++i) g[freq_perm_[i]] = gs[i];
  }

 private:
  friend Plan build_plan(int, double, std::span<const double>, std::span<const double>, const PlanOptions&);

  struct BlockData {
    std::vector<double> table;  // local: rows x (L + 1) coefficients; direct: rows x cols kernel
    std::unique_ptr<detail::AsymptoticKernel> kernel;
  };

  void prepare(const PlanOptions& options) {
    const auto& blocks = partition_.blocks;
    data_.resize(blocks.size());
    const std::size_t terms = static_cast<std::size_t>(params_.L) + 1;
    const double tol = detail::asymptotic_tolerance(eps_, params_.M);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& b = blocks[i];
      auto& d = data_[i];
      switch (b.kind) {
        case BlockKind::local: {
          const double R = points_[b.k1];
          const std::size_t size = b.rows() * terms;
          if (R == 0.0 || cached_ + size > options.cache_budget) break;
          d.table.resize(size);
          for (std::size_t j = 0; j < b.rows(); ++j) {
            wimp_coefficients(params_.nu, freqs_[b.j0 + j] * R, std::span<double>(d.table).subspan(j * terms, terms));
          }
          cached_ += size;
          break;
        }
        case BlockKind::asymptotic:
          d.kernel = std::make_unique<detail::AsymptoticKernel>(freqs_, points_, b, tol, options.nufft);
          break;
        case BlockKind::direct: {
          const std::size_t size = b.area();
          if (cached_ + size > options.cache_budget) break;
          d.table.resize(size);
          for (std::size_t j = 0; j < b.rows(); ++j) {
            for (std::size_t k = 0; k < b.cols(); ++k) {
              d.table[j * b.cols() + k] = bessel_j(params_.nu, freqs_[b.j0 + j] * points_[b.k0 + k]);
            }
          }
          cached_ += size;
          break;
        }
      }
    }
  }

  void evaluate(std::size_t i, std::span<const double> c, std::span<double> g) const {
    const auto& b = partition_.blocks[i];
    const auto& d = data_[i];
    switch (b.kind) {
      case BlockKind::local: {
        if (d.table.empty()) {
          apply_local_block(params_.nu, params_.L, freqs_, points_, b, c, g);
          return;
        }
        const auto v = detail::local_moments(params_.nu, params_.L, points_, b, c);
        const std::size_t terms = v.size();
        for (std::size_t j = 0; j < b.rows(); ++j) {
          const double* row = d.table.data() + j * terms;
          double sum = 0.0;
          for (std::size_t l = 0; l < terms; ++l) sum += row[l] * v[l];
          g[j] += sum;
        }
        return;
      }
      case BlockKind::asymptotic:
        detail::apply_asymptotic_with(*d.kernel, params_.nu, params_.M, freqs_, points_, b, c, g);
        return;
      case BlockKind::direct: {
        if (d.table.empty()) {
          apply_direct_block(params_.nu, freqs_, points_, b, c, g);
          return;
        }
        const std::size_t cols = b.cols();
        for (std::size_t j = 0; j < b.rows(); ++j) {
          const double* row = d.table.data() + j * cols;
          double sum = 0.0;
          for (std::size_t k = 0; k < cols; ++k) sum += row[k] * c[b.k0 + k];
          g[j] += sum;
        }
        return;
      }
    }
  }

  ExpansionParams params_;
  double eps_ = 0.0;
  std::vector<double> freqs_;
  std::vector<double> points_;
  std::vector<std::size_t> freq_perm_;
  std::vector<std::size_t> point_perm_;
  Partition partition_;
  std::vector<BlockData> data_;
  unsigned threads_ = 1;
  std::size_t cached_ = 0;
};

inline Plan build_plan(int nu, double eps, std::span<const double> freqs, std::span<const double> points,
                       const PlanOptions& options = {}) {
  if (options.min_size == 0) throw std::invalid_argument("build_plan: min_size must be positive");
  detail::check_samples(freqs, "frequencies");
  detail::check_samples(points, "points");
  Plan plan;
  plan.params_ = get_params(nu, eps);
  plan.eps_ = eps;
  plan.threads_ = detail::resolve_threads(options.num_threads);
  plan.freq_perm_ = detail::sorting_permutation(freqs);
  plan.point_perm_ = detail::sorting_permutation(points);
  plan.freqs_.resize(freqs.size());
  plan.points_.resize(points.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) plan.freqs_[i] = freqs[plan.freq_perm_[i]];
  for (std::size_t i = 0; i < points.size(); ++i) plan.points_[i] = points[plan.point_perm_[i]];
  if (freqs.size() * points.size() < options.min_size) {
    // Too small for either expansion to pay off.
    auto& part = plan.partition_;
    part.m = freqs.size();
    part.n = points.size();
    part.z = plan.params_.z;
    part.min_size = options.min_size;
    if (part.m > 0 && part.n > 0) {
      part.blocks.push_back(Block{0, part.m - 1, 0, part.n - 1, BlockKind::direct});
      part.levels = 1;
    }
  } else {
    plan.partition_ =
        subdivide(plan.freqs_, plan.points_, plan.params_.z, options.min_size, options.split_candidates);
  }
  plan.prepare(options);
  return plan;
}

// One-shot convenience: build a plan and apply it once.
inline std::vector<double> nufht(int nu, double eps, std::span<const double> freqs, std::span<const double> points,
                                 std::span<const double> c, const PlanOptions& options = {}) {
  return build_plan(nu, eps, freqs, points, options).apply(c);
}

}  // namespace nufht

#endif  // NUFHT_TRANSFORM_HPP

#ifndef NUFHT_APPS_HPP
#define NUFHT_APPS_HPP

// Two applications of the transform.
//
// Radial Fourier transform in the plane. For f supported on the unit disk and
// depending on r only,
//   F(w) = 2 pi int_0^1 f(r) J_0(w r) r dr,
// discretized with Gauss-Legendre nodes on [0, 1]; the node count doubles
// until two successive results agree to eps in max norm.
//
// Fourier-Bessel series on the unit disk. With psi_{jl}(r, theta) =
// J_|l|(j_{|l|,j} r) e^{i l theta}, the Dirichlet eigenfunctions of the
// Laplacian with eigenvalue -j_{|l|,j}^2,
//   alpha_{jl} = 1 / (pi J_{|l|+1}(j_{|l|,j})^2) int int f conj(psi_{jl}) r dr dtheta,
// which makes synthesis the exact inverse of analysis. The angular integral
// is an FFT over equispaced theta samples and each radial integral is one
// NUFHT per order. The Helmholtz problem (Laplacian + kappa^2) u = f with
// u = 0 on the circle is then diagonal: beta = alpha / (kappa^2 - j^2).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nufht/errors.hpp"
#include "nufht/fft.hpp"
#include "nufht/special.hpp"
#include "nufht/transform.hpp"

namespace nufht {

namespace detail {

inline double clamp_tolerance(double eps) { return std::clamp(eps, 1e-15, 1e-4); }

inline void check_app_tolerance(double eps) {
  if (!(eps >= 1e-15 * (1.0 - 1e-9) && eps <= 1e-4 * (1.0 + 1e-9))) {
    throw std::domain_error("eps must lie in [1e-15, 1e-4]");
  }
}

}  // namespace detail

struct RadialFourierOptions {
  int start_nodes = 32;
  int max_nodes = 1 << 20;
  PlanOptions plan = {};
};

struct RadialFourierResult {
  std::vector<double> values;
  int nodes = 0;  // Gauss-Legendre nodes of the accepted rule
};

// F(w_j) = 2 pi int_0^1 f(r) J_0(w_j r) r dr for each frequency. Each
// quadrature level is one NUFHT, run at eps / ||c||_1 so that its absolute
// error stays below eps.
inline RadialFourierResult radial_fourier_disk(const std::function<double(double)>& f, std::span<const double> freqs,
                                               double eps, const RadialFourierOptions& options = {}) {
  detail::check_app_tolerance(eps);
  if (options.start_nodes < 1 || options.max_nodes < options.start_nodes) {
    throw std::invalid_argument("radial_fourier_disk: need 1 <= start_nodes <= max_nodes");
  }
  for (double w : freqs) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("radial_fourier_disk: frequencies must be >= 0");
  }

  auto level = [&](int m) {
    const auto rule = gauss_legendre(m, 0.0, 1.0);
    std::vector<double> c(rule.nodes.size());
    double norm = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
      c[k] = 2.0 * std::numbers::pi * rule.weights[k] * f(rule.nodes[k]) * rule.nodes[k];
      if (!std::isfinite(c[k])) throw std::invalid_argument("radial_fourier_disk: f is not finite on [0, 1]");
      norm += std::abs(c[k]);
    }
    if (norm == 0.0) return std::vector<double>(freqs.size(), 0.0);
    return nufht(0, detail::clamp_tolerance(eps / norm), freqs, rule.nodes, c, options.plan);
  };

  RadialFourierResult result;
  int m = options.start_nodes;
  result.values = level(m);
  result.nodes = m;
  while (2 * static_cast<long>(m) <= options.max_nodes) {
    m *= 2;
    auto next = level(m);
    double change = 0.0;
    for (std::size_t j = 0; j < next.size(); ++j) change = std::max(change, std::abs(next[j] - result.values[j]));
    result.values = std::move(next);
    result.nodes = m;
    if (change <= eps) return result;
  }
  throw ConvergenceError("radial_fourier_disk: no convergence to " + std::to_string(eps) + " within " +
                         std::to_string(options.max_nodes) + " quadrature nodes");
}

// Coefficients of a Fourier-Bessel series, for radial indices j = 1..jmax
// and angular orders l = -lmax..lmax.
class FourierBesselField {
 public:
  using complex = std::complex<double>;

  FourierBesselField() = default;
  FourierBesselField(int jmax, int lmax) : jmax_(jmax), lmax_(lmax) {
    if (jmax < 0 || lmax < 0 || lmax > kMaxOrder) {
      throw std::invalid_argument("FourierBesselField: need jmax >= 0 and 0 <= lmax <= 100");
    }
    coeffs_.assign(static_cast<std::size_t>(jmax) * static_cast<std::size_t>(2 * lmax + 1), 0.0);
    roots_.resize(static_cast<std::size_t>(lmax) + 1);
    if (jmax > 0) {
      for (int nu = 0; nu <= lmax; ++nu) roots_[static_cast<std::size_t>(nu)] = bessel_roots(nu, jmax);
    }
  }

  int jmax() const { return jmax_; }
  int lmax() const { return lmax_; }

  complex& at(int j, int ell) { return coeffs_[index(j, ell)]; }
  const complex& at(int j, int ell) const { return coeffs_[index(j, ell)]; }

  // j_{|l|,j}, the frequency of mode (j, l).
  double root(int j, int ell) const {
    check(j, ell);
    return roots_[static_cast<std::size_t>(std::abs(ell))][static_cast<std::size_t>(j - 1)];
  }
  std::span<const double> roots(int ell) const { return roots_[static_cast<std::size_t>(std::abs(ell))]; }
  double eigenvalue(int j, int ell) const {
    const double x = root(j, ell);
    return -x * x;
  }

  // Coefficients j = 1..jmax of order l.
  std::span<complex> order(int ell) {
    check(1, ell);
    return std::span<complex>(coeffs_).subspan(static_cast<std::size_t>(ell + lmax_) * jmax_, jmax_);
  }
  std::span<const complex> order(int ell) const {
    check(1, ell);
    return std::span<const complex>(coeffs_).subspan(static_cast<std::size_t>(ell + lmax_) * jmax_, jmax_);
  }

  double norm() const {
    double s = 0.0;
    for (const auto& a : coeffs_) s += std::norm(a);
    return std::sqrt(s);
  }

 private:
  void check(int j, int ell) const {
    if (j < 1 || j > jmax_ || ell < -lmax_ || ell > lmax_) {
      throw std::out_of_range("FourierBesselField: mode (" + std::to_string(j) + ", " + std::to_string(ell) +
                              ") outside the truncation");
    }
  }
  std::size_t index(int j, int ell) const {
    check(j, ell);
    return static_cast<std::size_t>(ell + lmax_) * jmax_ + static_cast<std::size_t>(j - 1);
  }

  int jmax_ = 0;
  int lmax_ = 0;
  std::vector<complex> coeffs_;
  std::vector<std::vector<double>> roots_;
};

using DiskFunction = std::function<std::complex<double>(double r, double theta)>;

struct FbAnalyzeOptions {
  int start_radial_nodes = 32;
  int start_angular_nodes = 64;
  int max_radial_nodes = 1 << 14;
  int max_angular_nodes = 1 << 12;
  int max_order = kMaxOrder;      // lmax cap
  int max_radial_modes = 1 << 13;  // jmax cap
  PlanOptions plan = {};
};

namespace detail {

// Radial sums of order |l| for the orders l and -l at once: out_l[j] =
// sum_i c_l[i] J_|l|(freqs[j] points[i]), with complex c split into two real
// transforms.
inline void radial_pair(const Plan& plan, std::span<const std::complex<double>> c_pos,
                        std::span<const std::complex<double>> c_neg, std::span<std::complex<double>> out_pos,
                        std::span<std::complex<double>> out_neg) {
  const std::size_t n = plan.num_points();
  std::vector<double> re(n), im(n);
  auto one = [&](std::span<const std::complex<double>> c, std::span<std::complex<double>> out) {
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = c[i].real();
      im[i] = c[i].imag();
    }
    const auto a = plan.apply(re);
    const auto b = plan.apply(im);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = {a[j], b[j]};
  };
  one(c_pos, out_pos);
  if (!c_neg.empty()) one(c_neg, out_neg);
}

// One analysis pass with m radial and t angular nodes.
inline FourierBesselField fb_analyze_once(const DiskFunction& f, double eps, int m, int t, int jmax, int lmax,
                                          const PlanOptions& plan_options) {
  using complex = std::complex<double>;
  const auto rule = gauss_legendre(m, 0.0, 1.0);
  const auto tm = static_cast<std::size_t>(t);

  // angular[i * t + q] holds f(r_i, theta_q), then its FFT in q.
  FftBuffer angular(static_cast<std::size_t>(m) * tm);
  for (int i = 0; i < m; ++i) {
    for (std::size_t q = 0; q < tm; ++q) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(q) / static_cast<double>(t);
      const complex v = f(rule.nodes[static_cast<std::size_t>(i)], theta);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw std::invalid_argument("fb_analyze: f is not finite on the disk");
      }
      angular[static_cast<std::size_t>(i) * tm + q] = v;
    }
    fft_inplace(angular.data() + static_cast<std::size_t>(i) * tm, tm, -1);
  }

  FourierBesselField field(jmax, lmax);
  if (jmax == 0) return field;
  const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(t);
  // c_l[i] = w_i r_i (2 pi / t) sum_q f(r_i, theta_q) e^{-i l theta_q}.
  auto weights = [&](int ell) {
    std::vector<complex> c(static_cast<std::size_t>(m));
    const std::size_t slot = static_cast<std::size_t>((ell % t + t) % t);
    for (int i = 0; i < m; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      c[ii] = rule.weights[ii] * rule.nodes[ii] * dtheta * angular[ii * tm + slot];
    }
    return c;
  };
  for (int nu = 0; nu <= lmax; ++nu) {
    const auto roots = field.roots(nu);
    // A tenth of eps keeps transform noise out of the pass-to-pass comparison.
    const auto plan = build_plan(nu, clamp_tolerance(0.1 * eps), roots, rule.nodes, plan_options);
    const auto c_pos = weights(nu);
    const auto c_neg = nu > 0 ? weights(-nu) : std::vector<complex>{};
    std::vector<complex> out_pos(static_cast<std::size_t>(jmax)), out_neg(nu > 0 ? out_pos.size() : 0);
    radial_pair(plan, c_pos, c_neg, out_pos, out_neg);
    for (int j = 1; j <= jmax; ++j) {
      const double jn = bessel_j(nu + 1, roots[static_cast<std::size_t>(j - 1)]);
      const double scale = 1.0 / (std::numbers::pi * jn * jn);
      field.at(j, nu) = scale * out_pos[static_cast<std::size_t>(j - 1)];
      if (nu > 0) field.at(j, -nu) = scale * out_neg[static_cast<std::size_t>(j - 1)];
    }
  }
  return field;
}

}  // namespace detail

// Fourier-Bessel coefficients of f. Each pass doubles both the radial node
// count m and the angular node count t, resolving jmax = m / 2 radial modes
// and lmax = t / 4 angular orders (within the caps). It stops once the
// coefficients shared with the previous pass moved by at most eps relative to
// the field's norm, and the newly resolved ones carry at most eps of it.
inline FourierBesselField fb_analyze(const DiskFunction& f, double eps, const FbAnalyzeOptions& options = {}) {
  detail::check_app_tolerance(eps);
  if (options.max_order < 0 || options.max_order > kMaxOrder || options.max_radial_modes < 1) {
    throw std::invalid_argument("fb_analyze: need 0 <= max_order <= 100 and max_radial_modes >= 1");
  }
  if (options.start_radial_nodes < 2 || options.start_angular_nodes < 4) {
    throw std::invalid_argument("fb_analyze: need at least 2 radial and 4 angular nodes");
  }
  int m = options.start_radial_nodes;
  int t = options.start_angular_nodes;
  auto modes = [&](int mm, int tt) {
    return std::pair{std::min(mm / 2, options.max_radial_modes), std::min(tt / 4, options.max_order)};
  };
  auto [jmax, lmax] = modes(m, t);
  auto previous = detail::fb_analyze_once(f, eps, m, t, jmax, lmax, options.plan);
  for (;;) {
    if (2L * m > options.max_radial_nodes || 2L * t > options.max_angular_nodes) {
      throw ConvergenceError("fb_analyze: no convergence to " + std::to_string(eps) + " within " +
                             std::to_string(options.max_radial_nodes) + " radial and " +
                             std::to_string(options.max_angular_nodes) + " angular nodes");
    }
    m *= 2;
    t *= 2;
    std::tie(jmax, lmax) = modes(m, t);
    auto current = detail::fb_analyze_once(f, eps, m, t, jmax, lmax, options.plan);

    double shared_change = 0.0;
    double appended = 0.0;
    for (int ell = -lmax; ell <= lmax; ++ell) {
      for (int j = 1; j <= jmax; ++j) {
        const auto& a = current.at(j, ell);
        if (j <= previous.jmax() && std::abs(ell) <= previous.lmax()) {
          shared_change += std::norm(a - previous.at(j, ell));
        } else {
          appended += std::norm(a);
        }
      }
    }
    const double total = current.norm();
    if (total == 0.0 || (std::sqrt(shared_change) <= eps * total && std::sqrt(appended) <= eps * total)) {
      return current;
    }
    previous = std::move(current);
  }
}

// u(r_i, theta_q) = sum_{j,l} beta_{jl} J_|l|(j_{|l|,j} r_i) e^{i l theta_q},
// returned row-major with r as the slow index.
inline std::vector<std::complex<double>> fb_synthesize(const FourierBesselField& field,
                                                       std::span<const double> radii,
                                                       std::span<const double> thetas, double eps = 1e-12,
                                                       const PlanOptions& plan_options = {}) {
  using complex = std::complex<double>;
  detail::check_app_tolerance(eps);
  for (double r : radii) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("fb_synthesize: radii must lie in [0, 1]");
  }
  for (double th : thetas) {
    if (!std::isfinite(th)) throw std::invalid_argument("fb_synthesize: angles must be finite");
  }
  const std::size_t nr = radii.size();
  const std::size_t nt = thetas.size();
  std::vector<complex> out(nr * nt, 0.0);
  if (field.jmax() == 0 || nr == 0 || nt == 0) return out;

  const int lmax = field.lmax();
  // radial[(l + lmax) * nr + i] = sum_j beta_{jl} J_|l|(j_{|l|,j} r_i)
  std::vector<complex> radial(static_cast<std::size_t>(2 * lmax + 1) * nr);
  for (int nu = 0; nu <= lmax; ++nu) {
    const auto plan = build_plan(nu, eps, radii, field.roots(nu), plan_options);
    const auto pos = field.order(nu);
    const auto neg = nu > 0 ? field.order(-nu) : std::span<const complex>{};
    auto slot = [&](int ell) {
      return std::span<complex>(radial).subspan(static_cast<std::size_t>(ell + lmax) * nr, nr);
    };
    detail::radial_pair(plan, pos, neg, slot(nu), nu > 0 ? slot(-nu) : std::span<complex>{});
  }

  for (std::size_t q = 0; q < nt; ++q) {
    // e^{i l theta} for l = -lmax..lmax.
    std::vector<complex> phase(static_cast<std::size_t>(2 * lmax + 1));
    for (int ell = -lmax; ell <= lmax; ++ell) {
      phase[static_cast<std::size_t>(ell + lmax)] = std::polar(1.0, ell * thetas[q]);
    }
    for (std::size_t i = 0; i < nr; ++i) {
      complex sum = 0.0;
      for (std::size_t l = 0; l < phase.size(); ++l) sum += radial[l * nr + i] * phase[l];
      out[i * nt + q] = sum;
    }
  }
  return out;
}

// Below this fraction of kappa^2 the diagonal entry kappa^2 - j^2 counts as
// a resonance.
inline constexpr double kResonanceThreshold = 1e-10;

// beta_{jl} = alpha_{jl} / (lambda_{jl} + kappa^2), lambda_{jl} = -j_{|l|,j}^2.
inline FourierBesselField helmholtz_coefficients(const FourierBesselField& alpha, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("helmholtz: kappa must be positive");
  const double k2 = kappa * kappa;
  FourierBesselField beta = alpha;
  for (int ell = -alpha.lmax(); ell <= alpha.lmax(); ++ell) {
    for (int j = 1; j <= alpha.jmax(); ++j) {
      const double d = alpha.eigenvalue(j, ell) + k2;
      if (std::abs(d) < kResonanceThreshold * k2) {
        throw ResonanceError("helmholtz: kappa^2 = " + std::to_string(k2) + " resonates with mode (j, l) = (" +
                                 std::to_string(j) + ", " + std::to_string(ell) + ")",
                             j, ell);
      }
      beta.at(j, ell) = alpha.at(j, ell) / d;
    }
  }
  return beta;
}

struct HelmholtzSolution {
  FourierBesselField forcing;   // alpha
  FourierBesselField solution;  // beta
};

// Solves (Laplacian + kappa^2) u = f on the unit disk with u = 0 on the
// boundary, returning the series of f and of u.
inline HelmholtzSolution helmholtz_solve(const DiskFunction& f, double kappa, double eps,
                                         const FbAnalyzeOptions& options = {}) {
  HelmholtzSolution s;
  s.forcing = fb_analyze(f, eps, options);
  s.solution = helmholtz_coefficients(s.forcing, kappa);
  return s;
}

}  // namespace nufht

#endif  // NUFHT_APPS_HPP

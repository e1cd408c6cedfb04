#ifndef NUFHT_SPECIAL_HPP
#define NUFHT_SPECIAL_HPP

// Scalar special functions: Bessel J of real order, positive zeros of
// integer-order J, Chebyshev polynomials of the first kind, Gauss-Legendre
// rules and the exponent function that appears in Siegel's bound.
//
// Everything here is a pure function of its arguments. Bessel evaluation
// picks one of three methods:
//   - the power series when x^2 <= 4(nu+1), where the terms alternate
//     but never grow, so the sum loses at most a digit;
//   - Hankel's large-argument series when x >= 25 + nu^2/2, stopped as soon
//     as a term drops below 1e-17 (falls through if the terms start growing);
//   - Miller's backward recurrence otherwise, normalised by the sum rule
//     J_0 + 2 sum J_2k = 1 and sum of squares for integer order, the closed
//     forms for half-integer order, and the Neumann series of (x/2)^mu for
//     any other fractional part.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nufht {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double a = 0.0;
  double b = 0.0;
};

namespace detail {

inline double bessel_power_series(double nu, double x) {
  const double half = 0.5 * x;
  double prefactor = 0.0;
  if (nu <= 150.0) {
    prefactor = std::pow(half, nu) / std::tgamma(nu + 1.0);
  }
  if (!(prefactor >= std::numeric_limits<double>::min())) {
    prefactor = std::exp(nu * std::log(half) - std::lgamma(nu + 1.0));
  }
  const double q = -half * half;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 400; ++k) {
    term *= q / (k * (nu + k));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return prefactor * sum;
}

// Returns false if the asymptotic series starts to diverge before reaching
// double precision; the caller then uses the recurrence instead.
inline bool bessel_hankel_series(double nu, double x, double& value) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (8.0 * k * x);
    switch (k % 4) {
      case 0: p += term; break;
      case 1: q += term; break;
      case 2: p -= term; break;
      default: q -= term; break;
    }
    const double size = std::abs(term);
    if (size <= 1e-17) {
      converged = true;
      break;
    }
    if (size > previous) break;
    previous = size;
  }
  if (!converged) return false;
  const double phase = -(2.0 * nu + 1.0) * std::numbers::pi / 4.0;
  const double cx = std::cos(x);
  const double sx = std::sin(x);
  const double cp = std::cos(phase);
  const double sp = std::sin(phase);
  const double c = cx * cp - sx * sp;
  const double s = sx * cp + cx * sp;
  value = std::sqrt(2.0 / (std::numbers::pi * x)) * (p * c - q * s);
  return true;
}

inline int miller_start_order(int n_max, double x) {
  const double top = std::max(static_cast<double>(n_max), std::ceil(x));
  return static_cast<int>(top) + 20 + static_cast<int>(std::ceil(std::sqrt(40.0 * top)));
}

// Fills out[i] = J_{mu+i}(x) for i = 0..out.size()-1, with 0 <= mu < 1 and
// x > 0.
inline void miller_sequence(double mu, double x, std::span<double> out) {
  const int n_max = static_cast<int>(out.size()) - 1;
  const int top = miller_start_order(n_max, x);
  thread_local std::vector<double> f;
  f.assign(static_cast<std::size_t>(top) + 2, 0.0);
  f[top] = 1.0;
  for (int k = top; k >= 1; --k) {
    f[k - 1] = 2.0 * (mu + k) / x * f[k] - f[k + 1];
    if (std::abs(f[k - 1]) > 1e100) {
      for (int i = k - 1; i <= top; ++i) f[i] *= 1e-100;
    }
  }

  double scale = 0.0;
  if (mu == 0.0) {
    double fmax = 0.0;
    for (int i = 0; i <= top; ++i) fmax = std::max(fmax, std::abs(f[i]));
    double squares = 0.0;
    double even = 0.0;
    for (int i = top; i >= 1; --i) {
      const double t = f[i] / fmax;
      squares += t * t;
      if (i % 2 == 0) even += t;
    }
    const double t0 = f[0] / fmax;
    squares = t0 * t0 + 2.0 * squares;
    const double sum_rule = t0 + 2.0 * even;
    scale = std::copysign(1.0 / (fmax * std::sqrt(squares)), sum_rule);
  } else if (mu == 0.5) {
    const double amp = std::sqrt(2.0 / (std::numbers::pi * x));
    const double j_half = amp * std::sin(x);
    const double j_three_halves = amp * (std::sin(x) / x - std::cos(x));
    const double fmax = std::max(std::abs(f[0]), std::abs(f[1]));
    const double a = f[0] / fmax;
    const double b = f[1] / fmax;
    scale = (a * j_half + b * j_three_halves) / (a * a + b * b) / fmax;
  } else {
    // (x/2)^mu = sum_k (mu+2k) Gamma(mu+k)/k! J_{mu+2k}(x)
    double fmax = 0.0;
    for (int i = 0; i <= top; ++i) fmax = std::max(fmax, std::abs(f[i]));
    double gamma_ratio = std::tgamma(mu);
    double sum = 0.0;
    for (int k = 0; 2 * k <= top; ++k) {
      if (k > 0) gamma_ratio *= (mu + k - 1.0) / k;
      sum += (mu + 2.0 * k) * gamma_ratio * (f[2 * k] / fmax);
    }
    scale = std::exp(mu * std::log(0.5 * x)) / (sum * fmax);
  }
  for (int i = 0; i <= n_max; ++i) out[i] = f[i] * scale;
}

inline void check_bessel_arguments(double nu, double x) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw std::domain_error("bessel_j: order must be finite and >= 0");
  }
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw std::domain_error("bessel_j: argument must be finite and >= 0");
  }
}

}  // namespace detail

inline double bessel_j(double nu, double x) {
  detail::check_bessel_arguments(nu, x);
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (x * x <= 4.0 * (nu + 1.0)) return detail::bessel_power_series(nu, x);
  if (x >= 25.0 + 0.5 * nu * nu) {
    double value = 0.0;
    if (detail::bessel_hankel_series(nu, x, value)) return value;
  }
  const double n = std::floor(nu);
  const int order = static_cast<int>(n);
  thread_local std::vector<double> seq;
  seq.resize(static_cast<std::size_t>(order) + 1);
  detail::miller_sequence(nu - n, x, seq);
  return seq[order];
}

// Fills out[n] = J_n(x) for n = 0..out.size()-1.
inline void bessel_j_integer_orders(double x, std::span<double> out) {
  if (out.empty()) return;
  detail::check_bessel_arguments(0.0, x);
  if (x == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
    return;
  }
  detail::miller_sequence(0.0, x, out);
}

// J_n for any integer n, using J_{-n} = (-1)^n J_n.
inline double bessel_j_signed(int n, double x) {
  const double value = bessel_j(std::abs(n), x);
  return (n < 0 && (n % 2 != 0)) ? -value : value;
}

namespace detail {

inline double bessel_j_derivative(int nu, double x) {
  if (nu == 0) return -bessel_j(1.0, x);
  return bessel_j(nu - 1.0, x) - nu / x * bessel_j(nu, x);
}

// McMahon's expansion of j_{nu,k} for large k.
inline double mcmahon_root(int nu, int k) {
  const double mu = 4.0 * nu * nu;
  const double beta = (k + 0.5 * nu - 0.25) * std::numbers::pi;
  const double e = 8.0 * beta;
  const double e3 = e * e * e;
  const double e5 = e3 * e * e;
  return beta - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e3) -
         32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e5);
}

// Newton's method kept inside a sign-change bracket, bisecting whenever a
// step leaves it.
inline double refine_root(int nu, double lo, double hi) {
  double flo = bessel_j(nu, lo);
  if (flo == 0.0) return lo;
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = bessel_j(nu, x);
    if (f == 0.0) return x;
    if ((f < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = f;
    } else {
      hi = x;
    }
    double next = x - f / bessel_j_derivative(nu, x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - x) <= 4e-16 * x || hi - lo <= 4e-16 * x;
    x = next;
    if (done) break;
  }
  return x;
}

inline double scan_next_root(int nu, double from) {
  double x = from;
  double f = bessel_j(nu, x);
  for (;;) {
    const double next = x + 1.0;
    const double fn = bessel_j(nu, next);
    if (f == 0.0) return x;
    if ((f < 0.0) != (fn < 0.0)) return refine_root(nu, x, next);
    x = next;
    f = fn;
  }
}

inline bool mcmahon_bracketed_root(int nu, int k, double floor, double& root) {
  const double guess = mcmahon_root(nu, k);
  const double lo = std::max(guess - 1.0, floor);
  const double hi = guess + 1.0;
  if (!(lo < hi)) return false;
  const double flo = bessel_j(nu, lo);
  const double fhi = bessel_j(nu, hi);
  if ((flo < 0.0) == (fhi < 0.0)) return false;
  root = refine_root(nu, lo, hi);
  return true;
}

inline void check_root_arguments(int nu, int k) {
  if (nu < 0) throw std::domain_error("bessel_root: order must be >= 0");
  if (k < 1) throw std::domain_error("bessel_root: root index must be >= 1");
}

}  // namespace detail

// The first `count` positive zeros j_{nu,1} < ... < j_{nu,count}.
inline std::vector<double> bessel_roots(int nu, int count) {
  detail::check_root_arguments(nu, std::max(count, 1));
  std::vector<double> roots;
  roots.reserve(static_cast<std::size_t>(count));
  double previous = 0.0;
  for (int k = 1; k <= count; ++k) {
    double root = 0.0;
    const bool asymptotic = k >= 4 * nu + 4 &&
                            detail::mcmahon_bracketed_root(nu, k, previous + 1.0, root);
    if (!asymptotic) {
      const double start = k == 1 ? std::max(static_cast<double>(nu), 1.0) : previous + 1.0;
      root = detail::scan_next_root(nu, start);
    }
    roots.push_back(root);
    previous = root;
  }
  return roots;
}

inline double bessel_root(int nu, int k) {
  detail::check_root_arguments(nu, k);
  double root = 0.0;
  if (k >= 4 * nu + 4 && detail::mcmahon_bracketed_root(nu, k, 0.0, root)) return root;
  return bessel_roots(nu, k).back();
}

inline double chebyshev_t(int degree, double y) {
  if (degree < 0) throw std::domain_error("chebyshev_t: degree must be >= 0");
  if (!(std::abs(y) <= 1.0 + 1e-12)) {
    throw std::domain_error("chebyshev_t: argument outside [-1, 1]");
  }
  y = std::clamp(y, -1.0, 1.0);
  if (degree == 0) return 1.0;
  double t0 = 1.0;
  double t1 = y;
  for (int n = 2; n <= degree; ++n) {
    const double t2 = 2.0 * y * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return t1;
}

namespace detail {

// P_m(x) and P_m'(x) by the three-term recurrence.
inline void legendre_eval(int m, double x, double& p, double& dp) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= m; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = m * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace detail

// Nodes are the zeros of P_m found by Newton's method from Tricomi's
// initial guesses; weights from the derivative.
inline QuadratureRule gauss_legendre(int m, double a, double b) {
  if (m < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("gauss_legendre: need finite a < b");
  }
  QuadratureRule rule;
  rule.a = a;
  rule.b = b;
  rule.nodes.resize(static_cast<std::size_t>(m));
  rule.weights.resize(static_cast<std::size_t>(m));
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const int pairs = (m + 1) / 2;
  for (int i = 0; i < pairs; ++i) {
    const double theta = std::numbers::pi * (i + 0.75) / (m + 0.5);
    double x = std::cos(theta) * (1.0 - (1.0 - 1.0 / m) / (8.0 * m * m));
    if (m % 2 == 1 && i == pairs - 1) x = 0.0;
    double p = 0.0;
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      detail::legendre_eval(m, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-15) break;
    }
    detail::legendre_eval(m, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const std::size_t lo = static_cast<std::size_t>(i);
    const std::size_t hi = static_cast<std::size_t>(m - 1 - i);
    rule.nodes[lo] = mid - half * x;
    rule.nodes[hi] = mid + half * x;
    rule.weights[lo] = half * w;
    rule.weights[hi] = half * w;
  }
  return rule;
}

// psi(p) = log p + sqrt(1 - p^2) - log(1 + sqrt(1 - p^2)), so that Siegel's
// bound reads |J_nu(nu p)| <= exp(nu psi(p)).
inline double siegel_psi(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::domain_error("siegel_psi: argument must lie in (0, 1]");
  }
  const double s = std::sqrt((1.0 - p) * (1.0 + p));
  return std::log(p) + s - std::log1p(s);
}

}  // namespace nufht

#endif  // NUFHT_SPECIAL_HPP

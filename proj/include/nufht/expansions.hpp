#ifndef NUFHT_EXPANSIONS_HPP
#define NUFHT_EXPANSIONS_HPP

// The two separable expansions of J_nu(w r).
//
// Local (Wimp): for y in [-1, 1],
//   nu even:  J_nu(x y) = sum_l d_l J_{nu/2+l}(x/2) J_{nu/2-l}(x/2) T_{2l}(y),
//             d_0 = 1, d_l = 2 otherwise;
//   nu odd:   J_nu(x y) = sum_l 2 J_{(nu+1)/2+l}(x/2) J_{(nu-1)/2-l}(x/2) T_{2l+1}(y),
// both following from J_a(t) J_b(t) = (2/pi) int_0^{pi/2} J_{a+b}(2t cos s) cos((a-b)s) ds.
// Negative orders use J_{-n} = (-1)^n J_n, so only integer orders occur.
//
// Asymptotic (Hankel): M pairs of
//   J_nu(x) ~ sqrt(2/(pi x)) sum_l (-1)^l [a_2l x^-2l cos(x+phi) - a_{2l+1} x^-(2l+1) sin(x+phi)].

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "nufht/bounds.hpp"
#include "nufht/special.hpp"

namespace nufht {

// Chebyshev degree multiplying coefficient l.
inline int wimp_degree(int nu, int ell) { return 2 * ell + (nu % 2); }

// out[l] for l = 0..out.size()-1, the coefficients of T_{wimp_degree(nu, l)}(y)
// in the expansion of J_nu(x y).
inline void wimp_coefficients(int nu, double x, std::span<double> out) {
  if (nu < 0) throw std::domain_error("wimp_coefficients: nu must be >= 0");
  const int count = static_cast<int>(out.size());
  if (count == 0) return;
  const int h = nu / 2;
  const bool odd = nu % 2 != 0;
  const int top = h + count + 1;
  thread_local std::vector<double> j;
  j.resize(static_cast<std::size_t>(top) + 1);
  bessel_j_integer_orders(0.5 * x, j);
  auto signed_j = [&](int n) {
    if (n >= 0) return j[n];
    return (-n) % 2 == 0 ? j[-n] : -j[-n];
  };
  for (int l = 0; l < count; ++l) {
    if (odd) {
      out[l] = 2.0 * j[h + 1 + l] * signed_j(h - l);
    } else {
      out[l] = (l == 0 ? 1.0 : 2.0) * j[h + l] * signed_j(h - l);
    }
  }
}

// Truncated Wimp expansion with terms 0..L evaluated at a single (x, y).
inline double wimp_eval(int nu, int L, double x, double y) {
  std::vector<double> c(static_cast<std::size_t>(L) + 1);
  wimp_coefficients(nu, x, c);
  double sum = 0.0;
  for (int l = 0; l <= L; ++l) sum += c[l] * chebyshev_t(wimp_degree(nu, l), y);
  return sum;
}

// M-pair Hankel expansion of J_nu(x), x > 0.
inline double hankel_expansion(int nu, int M, double x) {
  if (!(x > 0.0)) throw std::domain_error("hankel_expansion: x must be positive");
  const auto c = asymptotic_coeffs(nu, 2 * M);
  const double cs = std::cos(x + c.phi);
  const double sn = std::sin(x + c.phi);
  double p = 0.0;
  double q = 0.0;
  double power = 1.0;
  for (int l = 0; l < M; ++l) {
    const double sign = l % 2 == 0 ? 1.0 : -1.0;
    p += sign * c.a[2 * l] * power;
    power /= x;
    q += sign * c.a[2 * l + 1] * power;
    power /= x;
  }
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * cs - q * sn);
}

}  // namespace nufht

#endif  // NUFHT_EXPANSIONS_HPP

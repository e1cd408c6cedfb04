#ifndef NUFHT_BOUNDS_HPP
#define NUFHT_BOUNDS_HPP

// Error bounds for the two expansions of J_nu(w r) and the parameters that
// make them complementary.
//
// For w r >= z the M-pair Hankel expansion is used. Its remainder is bounded
// by the first two neglected terms, b_asy. For w r <= z the Wimp expansion
// truncated after L + 1 Chebyshev terms is used, bounded by b_loc through
// Siegel's inequality. For each order nu and tolerance decade the crossover z
// solves b_asy(z) = eps and L is the smallest count with b_loc(z, L) < eps.
// These (nu, eps, M, z, L) tuples are cached in a ParamTable.

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "nufht/special.hpp"

namespace nufht {

constexpr int kMaxOrder = 100;
constexpr int kMaxAsymptoticPairs = 20;
constexpr int kMaxAsymptoticCoeff = 45;
constexpr int kMaxLocalTerms = 2000;
constexpr int kTightestDecade = 15;
constexpr int kLoosestDecade = 4;

struct AsymptoticCoeffs {
  double nu = 0.0;
  std::vector<double> a;
  double phi = 0.0;
};

// a_0..a_{count-1} via a_l = a_{l-1} (4 nu^2 - (2l-1)^2) / (8 l).
inline AsymptoticCoeffs asymptotic_coeffs(double nu, int count) {
  if (count < 1 || count > kMaxAsymptoticCoeff + 1) {
    throw std::out_of_range("asymptotic_coeffs: count must lie in [1, 46]");
  }
  AsymptoticCoeffs c;
  c.nu = nu;
  c.phi = -(2.0 * nu + 1.0) * std::numbers::pi / 4.0;
  c.a.resize(static_cast<std::size_t>(count));
  c.a[0] = 1.0;
  const double mu = 4.0 * nu * nu;
  for (int l = 1; l < count; ++l) {
    const double odd = 2.0 * l - 1.0;
    c.a[l] = c.a[l - 1] * (mu - odd * odd) / (8.0 * l);
  }
  return c;
}

inline double asymptotic_coeff(double nu, int ell) {
  if (ell < 0 || ell > kMaxAsymptoticCoeff) {
    throw std::out_of_range("asymptotic_coeff: index must lie in [0, 45]");
  }
  return asymptotic_coeffs(nu, ell + 1).a[ell];
}

// sqrt(2/pi) (|a_2M| z^{-2M-1/2} + |a_{2M+1}| z^{-2M-3/2})
inline double b_asy(double z, double nu, int M) {
  if (!(z > 0.0)) throw std::domain_error("b_asy: z must be positive");
  if (M < 0 || 2 * M + 1 > kMaxAsymptoticCoeff) {
    throw std::out_of_range("b_asy: M must lie in [0, 22]");
  }
  const auto c = asymptotic_coeffs(nu, 2 * M + 2);
  const double lead = std::abs(c.a[2 * M]) * std::pow(z, -2.0 * M - 0.5);
  const double next = std::abs(c.a[2 * M + 1]) * std::pow(z, -2.0 * M - 1.5);
  return std::sqrt(2.0 / std::numbers::pi) * (lead + next);
}

// Truncation bound for the Wimp expansion of J_nu(w r) with w r <= omega_r,
// keeping terms 0..L. Infinite when Siegel's bound does not apply yet.
inline double b_loc(double omega_r, int nu, int L) {
  if (!(omega_r > 0.0)) throw std::domain_error("b_loc: omega_R must be positive");
  if (nu < 0 || L < 0) throw std::domain_error("b_loc: nu and L must be >= 0");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double p = omega_r / (2.0 * L + 2.0 + nu);
  if (p >= 1.0) return inf;
  const double beta = siegel_psi(p);
  double gamma = 0.0;
  if (2.0 * (L + 1.0) >= nu) {
    const double denom = 2.0 * L + 2.0 - nu;
    if (denom <= 0.0) return inf;
    const double q = omega_r / denom;
    if (q >= 1.0) return inf;
    gamma = siegel_psi(q);
  }
  const double s = beta + gamma;
  if (s >= 0.0) return inf;
  return 2.0 * std::exp(0.5 * nu * (beta - gamma) + (L + 1.0) * s) / -std::expm1(s);
}

// M = min(floor(1 + nu/5 - log10(eps)/4), 20). The small offset keeps exact
// decades such as 1e-8 from rounding down through log10.
inline int select_num_asymptotic_terms(int nu, double eps) {
  if (nu < 0) throw std::domain_error("select_num_asymptotic_terms: nu must be >= 0");
  if (!(eps >= 1e-15 * (1 - 1e-12) && eps <= 1e-4 * (1 + 1e-12))) {
    throw std::domain_error("select_num_asymptotic_terms: eps must lie in [1e-15, 1e-4]");
  }
  const double raw = 1.0 + nu / 5.0 - std::log10(eps) / 4.0;
  const int M = static_cast<int>(std::floor(raw + 1e-9));
  return std::min(M, kMaxAsymptoticPairs);
}

// Smallest z >= max(nu, 1) with b_asy(z) <= eps, solved to within 1e-6 eps
// by Newton's method on log b_asy, falling back to bisection in log z.
inline double solve_crossover(int nu, double eps, int M) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("solve_crossover: eps must lie in (0, 1)");
  if (M < 1 || M > kMaxAsymptoticPairs) {
    throw std::domain_error("solve_crossover: M must lie in [1, 20]");
  }
  const auto c = asymptotic_coeffs(nu, 2 * M + 2);
  const double a0 = std::sqrt(2.0 / std::numbers::pi) * std::abs(c.a[2 * M]);
  const double a1 = std::sqrt(2.0 / std::numbers::pi) * std::abs(c.a[2 * M + 1]);
  const double p0 = 2.0 * M + 0.5;
  const double p1 = 2.0 * M + 1.5;
  auto bound = [&](double z) { return a0 * std::pow(z, -p0) + a1 * std::pow(z, -p1); };

  double lo = std::max(static_cast<double>(nu), 1.0);
  if (bound(lo) <= eps) return lo;
  double hi = 2.0 * lo;
  int doublings = 0;
  while (bound(hi) > eps) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200) throw std::runtime_error("solve_crossover: failed to bracket the crossover");
  }

  // Aim slightly below eps so the returned z always satisfies b_asy(z) <= eps.
  const double log_target = std::log(eps * (1.0 - 1e-6));
  double z = std::sqrt(lo * hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double t0 = a0 * std::pow(z, -p0);
    const double t1 = a1 * std::pow(z, -p1);
    const double b = t0 + t1;
    const double g = std::log(b) - log_target;
    if (g > 0.0) {
      lo = z;
    } else {
      hi = z;
    }
    if (std::abs(g) <= 1e-9) break;
    // d log b / d log z
    const double slope = -(p0 * t0 + p1 * t1) / b;
    double next = z * std::exp(-g / slope);
    if (!(next > lo && next < hi)) next = std::sqrt(lo * hi);
    z = next;
  }
  while (bound(z) > eps) z = std::nextafter(z, std::numeric_limits<double>::infinity());
  return z;
}

inline int select_local_terms(int nu, double eps, double z) {
  for (int L = 0; L <= kMaxLocalTerms; ++L) {
    if (b_loc(z, nu, L) < eps) return L;
  }
  throw std::runtime_error("select_local_terms: no L up to the cap satisfies the bound");
}

struct ExpansionParams {
  int nu = 0;
  int eps_decade = 0;  // eps = 10^-eps_decade
  double eps = 0.0;
  int M = 0;
  double z = 0.0;
  int L = 0;
};

inline double decade_tolerance(int decade) {
  static constexpr double values[] = {1e-4,  1e-5,  1e-6,  1e-7,  1e-8,  1e-9,
                                      1e-10, 1e-11, 1e-12, 1e-13, 1e-14, 1e-15};
  if (decade < kLoosestDecade || decade > kTightestDecade) {
    throw std::domain_error("decade_tolerance: decade must lie in [4, 15]");
  }
  return values[decade - kLoosestDecade];
}

// The tolerance decade used for a request: the tighter one when eps falls
// between two decades.
inline int snap_eps_decade(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::domain_error("eps must be positive and finite");
  if (eps > 1e-4 * (1.0 + 1e-12)) throw std::domain_error("eps must lie in [1e-15, 1e-4]");
  const int decade = static_cast<int>(std::ceil(-std::log10(eps) - 1e-9));
  if (decade < kLoosestDecade || decade > kTightestDecade) {
    throw std::domain_error("eps must lie in [1e-15, 1e-4]");
  }
  return decade;
}

inline ExpansionParams compute_params(int nu, int decade, int M) {
  ExpansionParams p;
  p.nu = nu;
  p.eps_decade = decade;
  p.eps = decade_tolerance(decade);
  p.M = M;
  p.z = solve_crossover(nu, p.eps, M);
  p.L = select_local_terms(nu, p.eps, p.z);
  return p;
}

class ParamTable {
 public:
  ExpansionParams get(int nu, double eps) {
    check_order(nu);
    const int decade = snap_eps_decade(eps);
    return lookup(nu, decade, select_num_asymptotic_terms(nu, decade_tolerance(decade)));
  }

  ExpansionParams get(int nu, double eps, int M) {
    check_order(nu);
    if (M < 1 || M > kMaxAsymptoticPairs) throw std::domain_error("ParamTable: M must lie in [1, 20]");
    return lookup(nu, snap_eps_decade(eps), M);
  }

  // Populates every (nu, decade) pair with the heuristic M.
  void warm() {
    for (int decade = kLoosestDecade; decade <= kTightestDecade; ++decade) {
      for (int nu = 0; nu <= kMaxOrder; ++nu) get(nu, decade_tolerance(decade));
    }
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

  std::vector<ExpansionParams> entries() const {
    std::shared_lock lock(mutex_);
    std::vector<ExpansionParams> out;
    out.reserve(entries_.size());
    for (const auto& [key, value] : entries_) out.push_back(value);
    return out;
  }

  // Inserts an entry read from a dump. The bound invariants are re-checked.
  void insert(const ExpansionParams& p) {
    check_order(p.nu);
    const double eps = decade_tolerance(p.eps_decade);
    if (!(b_asy(p.z, p.nu, p.M) <= eps) || !(b_loc(p.z, p.nu, p.L) <= eps)) {
      throw std::invalid_argument("ParamTable: entry violates the bound invariants");
    }
    ExpansionParams q = p;
    q.eps = eps;
    std::unique_lock lock(mutex_);
    entries_.emplace(std::make_tuple(q.nu, q.eps_decade, q.M), q);
  }

  // Text format: a header comment, then one `nu,eps_decade,M,z,L` line per
  // entry, eps_decade being the positive exponent d of eps = 10^-d.
  void dump(std::ostream& os) const {
    os << "# nu,eps_decade,M,z,L\n";
    char buf[64];
    for (const auto& p : entries()) {
      std::snprintf(buf, sizeof buf, "%.17g", p.z);
      os << p.nu << ',' << p.eps_decade << ',' << p.M << ',' << buf << ',' << p.L << '\n';
    }
  }

  void load(std::istream& is) {
    std::string line;
    int line_number = 0;
    while (std::getline(is, line)) {
      ++line_number;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream fields(line);
      ExpansionParams p;
      char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
      if (!(fields >> p.nu >> c1 >> p.eps_decade >> c2 >> p.M >> c3 >> p.z >> c4 >> p.L) ||
          c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',') {
        throw std::invalid_argument("ParamTable: malformed line " + std::to_string(line_number));
      }
      insert(p);
    }
  }

 private:
  using Key = std::tuple<int, int, int>;

  static void check_order(int nu) {
    if (nu < 0 || nu > kMaxOrder) throw std::domain_error("order nu must be an integer in [0, 100]");
  }

  ExpansionParams lookup(int nu, int decade, int M) {
    const Key key{nu, decade, M};
    {
      std::shared_lock lock(mutex_);
      auto it = entries_.find(key);
      if (it != entries_.end()) return it->second;
    }
    // Computed outside the lock; a concurrent duplicate computes the same
    // value and the first insertion wins.
    const ExpansionParams p = compute_params(nu, decade, M);
    std::unique_lock lock(mutex_);
    return entries_.emplace(key, p).first->second;
  }

  mutable std::shared_mutex mutex_;
  std::map<Key, ExpansionParams> entries_;
};

inline ParamTable& default_param_table() {
  static ParamTable table;
  return table;
}

inline ExpansionParams get_params(ParamTable& table, int nu, double eps) { return table.get(nu, eps); }

inline ExpansionParams get_params(int nu, double eps) { return default_param_table().get(nu, eps); }

}  // namespace nufht

#endif  // NUFHT_BOUNDS_HPP

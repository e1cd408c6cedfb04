#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include "bound_checks.hpp"
#include "nufht/bounds.hpp"
#include "nufht/expansions.hpp"
#include "oracle.hpp"

namespace {

TEST(AsymptoticCoeff, Examples) {
  EXPECT_EQ(nufht::asymptotic_coeff(0.0, 0), 1.0);
  EXPECT_EQ(nufht::asymptotic_coeff(7.0, 0), 1.0);
  EXPECT_EQ(nufht::asymptotic_coeff(0.0, 1), -1.0 / 8.0);
  EXPECT_EQ(nufht::asymptotic_coeff(0.0, 2), 9.0 / 128.0);
  EXPECT_EQ(nufht::asymptotic_coeff(0.0, 3), -225.0 / 3072.0);
  EXPECT_THROW(nufht::asymptotic_coeff(0.0, 46), std::out_of_range);
}

// The definition prod (4 nu^2 - (2i-1)^2) / (l! 8^l) accumulated as
// numerator and denominator separately; rounding differs from the recurrence
// by at most a couple of ulps per factor.
TEST(AsymptoticCoeff, ProductDefinitionMatchesRecurrence) {
  for (double nu : {0.0, 1.0, 2.5, 10.0, 100.0}) {
    const auto c = nufht::asymptotic_coeffs(nu, 46);
    EXPECT_EQ(c.phi, -(2.0 * nu + 1.0) * std::numbers::pi / 4.0);
    for (int l = 0; l <= 45; ++l) {
      long double numerator = 1.0L;
      long double denominator = 1.0L;
      for (int i = 1; i <= l; ++i) {
        const long double odd = 2.0L * i - 1.0L;
        numerator *= 4.0L * nu * nu - odd * odd;
        denominator *= 8.0L * i;
      }
      const double definition = static_cast<double>(numerator / denominator);
      EXPECT_LE(std::abs(c.a[l] - definition), 2.0 * (l + 1) * 2.2e-16 * std::abs(definition))
          << "nu=" << nu << " l=" << l;
    }
  }
}

TEST(BAsy, Examples) {
  const double expected =
      std::sqrt(2.0 / std::numbers::pi) * (9.0 / 128.0 * std::pow(10.0, -2.5) + 225.0 / 3072.0 * std::pow(10.0, -3.5));
  EXPECT_NEAR(nufht::b_asy(10.0, 0.0, 1), expected, 1e-16);
  EXPECT_NEAR(nufht::b_asy(10.0, 0.0, 1), 1.95887729981e-4, 1e-14);
  EXPECT_LT(nufht::b_asy(20.0, 0.0, 1), nufht::b_asy(10.0, 0.0, 1));
  EXPECT_EQ(nufht::b_asy(3.0, 0.5, 1), 0.0);
  EXPECT_THROW(nufht::b_asy(0.0, 0.0, 1), std::domain_error);
}

TEST(BLoc, Examples) {
  EXPECT_TRUE(std::isinf(nufht::b_loc(10.0, 0, 3)));
  EXPECT_NEAR(nufht::b_loc(1.0, 0, 4), 4.27425722116e-9, 1e-19);
  const double beta = nufht::siegel_psi(0.1);
  EXPECT_NEAR(nufht::b_loc(1.0, 0, 4), 2.0 * std::exp(10.0 * beta) / (1.0 - std::exp(2.0 * beta)), 1e-22);
  EXPECT_LT(nufht::b_loc(1.0, 0, 6), nufht::b_loc(1.0, 0, 4));
  // gamma only enters once L + 1 >= nu / 2; before that the bound is finite
  // through beta alone.
  EXPECT_TRUE(std::isfinite(nufht::b_loc(1.0, 10, 2)));
  EXPECT_THROW(nufht::b_loc(0.0, 0, 1), std::domain_error);
}

TEST(NumAsymptoticTerms, Examples) {
  EXPECT_EQ(nufht::select_num_asymptotic_terms(0, 1e-8), 3);
  EXPECT_EQ(nufht::select_num_asymptotic_terms(0, 1e-4), 2);
  EXPECT_EQ(nufht::select_num_asymptotic_terms(100, 1e-15), 20);
  EXPECT_THROW(nufht::select_num_asymptotic_terms(0, 1e-3), std::domain_error);
  EXPECT_THROW(nufht::select_num_asymptotic_terms(0, 1e-16), std::domain_error);
}

// Closed form evaluated with exact rational arithmetic: 1 + nu/5 + d/4 for
// eps = 10^-d, floored as a fraction with denominator 20.
TEST(NumAsymptoticTerms, FullGridMatchesClosedFormula) {
  int capped = 0;
  for (int d = 4; d <= 15; ++d) {
    for (int nu = 0; nu <= 100; ++nu) {
      const int numerator = 20 + 4 * nu + 5 * d;
      const int expected = std::min(numerator / 20, 20);
      if (numerator / 20 > 20) ++capped;
      EXPECT_EQ(nufht::select_num_asymptotic_terms(nu, nufht::decade_tolerance(d)), expected)
          << "nu=" << nu << " d=" << d;
    }
  }
  EXPECT_GT(capped, 0);
}

double bisect_crossover(int nu, double eps, int M) {
  double lo = std::max(nu, 1);
  double hi = lo;
  while (nufht::b_asy(hi, nu, M) > eps) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (nufht::b_asy(mid, nu, M) > eps) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

TEST(SolveCrossover, ResidualAndBisectionOracle) {
  const double z = nufht::solve_crossover(0, 1e-8, 3);
  EXPECT_NEAR(nufht::b_asy(z, 0, 3), 1e-8, 1e-11);
  EXPECT_LE(nufht::b_asy(z, 0, 3), 1e-8);
  EXPECT_GT(nufht::solve_crossover(0, 1e-12, 3), nufht::solve_crossover(0, 1e-4, 3));
  for (int nu : {0, 1, 7, 30, 100}) {
    for (double eps : {1e-4, 1e-9, 1e-15}) {
      const int M = nufht::select_num_asymptotic_terms(nu, eps);
      const double zn = nufht::solve_crossover(nu, eps, M);
      const double zb = bisect_crossover(nu, eps, M);
      EXPECT_NEAR(zn, zb, 1e-6 * zb) << "nu=" << nu << " eps=" << eps;
      EXPECT_LE(nufht::b_asy(zn, nu, M), eps);
      EXPECT_LE(std::abs(nufht::b_asy(zn, nu, M) - eps), 1e-3 * eps);
    }
  }
}

TEST(SelectLocalTerms, MinimalAndMatchesBruteScan) {
  const double z = nufht::solve_crossover(0, 1e-8, 3);
  const int L = nufht::select_local_terms(0, 1e-8, z);
  int brute = -1;
  for (int l = 0; l <= 100; ++l) {
    if (nufht::b_loc(z, 0, l) < 1e-8) {
      brute = l;
      break;
    }
  }
  EXPECT_EQ(L, brute);
  EXPECT_LT(nufht::b_loc(z, 0, L), 1e-8);
  if (L > 0) {
    EXPECT_GE(nufht::b_loc(z, 0, L - 1), 1e-8);
  }
}

// Monotone at a fixed number of asymptotic pairs. With the heuristic M the
// crossover moves inward whenever M steps up, so L can drop between decades.
TEST(SelectLocalTerms, NondecreasingAsEpsShrinks) {
  for (int nu : {0, 1, 10, 55, 100}) {
    for (int M : {nufht::select_num_asymptotic_terms(nu, 1e-4), 20}) {
      int previous = -1;
      for (int d = 4; d <= 15; ++d) {
        const auto p = nufht::compute_params(nu, d, M);
        EXPECT_GE(p.L, previous) << "nu=" << nu << " M=" << M << " d=" << d;
        previous = p.L;
      }
    }
  }
}

TEST(ParamTable, SnappingAndDeterminism) {
  EXPECT_EQ(nufht::snap_eps_decade(1e-8), 8);
  EXPECT_EQ(nufht::snap_eps_decade(3e-8), 8);
  EXPECT_EQ(nufht::snap_eps_decade(9.99e-9), 9);
  EXPECT_EQ(nufht::snap_eps_decade(1e-4), 4);
  EXPECT_EQ(nufht::snap_eps_decade(1e-15), 15);
  EXPECT_THROW(nufht::snap_eps_decade(2e-4), std::domain_error);
  EXPECT_THROW(nufht::snap_eps_decade(1e-16), std::domain_error);

  nufht::ParamTable table;
  const auto a = nufht::get_params(table, 3, 1e-10);
  const auto b = nufht::get_params(table, 3, 1e-10);
  EXPECT_EQ(a.z, b.z);
  EXPECT_EQ(a.L, b.L);
  EXPECT_EQ(a.M, b.M);
  EXPECT_EQ(table.size(), 1u);
  EXPECT_THROW(table.get(101, 1e-8), std::domain_error);
  EXPECT_THROW(table.get(-1, 1e-8), std::domain_error);
}

TEST(ParamTable, FullTableBuildsQuicklyAndSatisfiesBounds) {
  nufht::ParamTable table;
  const auto start = std::chrono::steady_clock::now();
  table.warm();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(seconds, 10.0);
  EXPECT_EQ(table.size(), 12u * 101u);
  for (const auto& p : table.entries()) {
    EXPECT_LE(nufht::b_asy(p.z, p.nu, p.M), p.eps);
    EXPECT_LE(nufht::b_loc(p.z, p.nu, p.L), p.eps);
    EXPECT_GT(p.z, 0.0);
  }
}

TEST(ParamTable, DumpAndReload) {
  nufht::ParamTable table;
  table.get(0, 1e-8);
  table.get(17, 1e-13);
  table.get(100, 1e-4);
  std::stringstream buffer;
  table.dump(buffer);
  nufht::ParamTable reloaded;
  reloaded.load(buffer);
  const auto a = table.entries();
  const auto b = reloaded.entries();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].z, b[i].z);
    EXPECT_EQ(a[i].L, b[i].L);
    EXPECT_LE(nufht::b_asy(b[i].z, b[i].nu, b[i].M), b[i].eps);
  }
  std::stringstream bad("0,8,3,1.0,0\n");
  EXPECT_THROW(reloaded.load(bad), std::invalid_argument);
}

TEST(ParamTable, ConcurrentLookupsAgree) {
  nufht::ParamTable table;
  std::vector<std::thread> threads;
  std::vector<double> z(8);
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] { z[t] = table.get(42, 1e-11).z; });
  }
  for (auto& th : threads) th.join();
  for (int t = 1; t < 8; ++t) EXPECT_EQ(z[t], z[0]);
  EXPECT_EQ(table.size(), 1u);
}

TEST(Expansions, WimpHalfArgumentIdentityAtUnitY) {
  // y = 1 reproduces J_0(x) = J_0(x/2)^2 + 2 sum (-1)^l J_l(x/2)^2.
  for (double x : {0.5, 3.0, 11.0}) {
    EXPECT_NEAR(nufht::wimp_eval(0, 40, x, 1.0), nufht::bessel_j(0, x), 1e-15);
  }
}

TEST(Expansions, WimpMatchesDenseEvaluationForEvenAndOddOrders) {
  for (int nu : {0, 1, 2, 3, 5, 8, 21, 64, 99}) {
    for (int d : {4, 8, 12}) {
      const auto p = nufht::compute_params(nu, d, nufht::select_num_asymptotic_terms(nu, nufht::decade_tolerance(d)));
      const double bound = nufht::b_loc(p.z, nu, p.L);
      for (int i = 0; i <= 20; ++i) {
        for (int k = 0; k <= 20; ++k) {
          const double x = p.z * i / 20.0;
          const double y = k / 20.0;
          const double err = std::abs(nufht::wimp_eval(nu, p.L, x, y) - nufht::bessel_j(nu, x * y));
          EXPECT_LE(err, bound + 1e-14) << "nu=" << nu << " x=" << x << " y=" << y;
        }
      }
    }
  }
}

TEST(Expansions, HankelMatchesOracle) {
  for (int nu : {0, 3, 40}) {
    for (int M : {1, 4}) {
      for (double x : {150.0, 1000.0, 5000.0}) {
        EXPECT_NEAR(nufht::hankel_expansion(nu, M, x), static_cast<double>(oracle::hankel_truncated(nu, M, x)), 1e-14);
      }
    }
  }
}

TEST(EmpiricalBounds, AsymptoticRemainder) {
  for (int nu : {0, 1, 10}) {
    for (int M : {1, 3, 5}) {
      for (int d : {4, 8, 12}) {
        nufht::ExpansionParams p;
        p.nu = nu;
        p.M = M;
        p.eps = nufht::decade_tolerance(d);
        p.z = nufht::solve_crossover(nu, p.eps, M);
        const auto outcome = bound_checks::check_asymptotic(p, 200);
        EXPECT_EQ(outcome.failures, 0) << "nu=" << nu << " M=" << M << " d=" << d
                                       << " worst ratio " << outcome.worst_ratio;
      }
    }
  }
}

TEST(EmpiricalBounds, LocalTruncation) {
  for (int nu : {0, 2, 10}) {
    for (int d : {4, 8, 12, 15}) {
      const auto p = nufht::compute_params(nu, d, nufht::select_num_asymptotic_terms(nu, nufht::decade_tolerance(d)));
      const auto outcome = bound_checks::check_local(p, 200, 1000 + nu * 31 + d);
      EXPECT_EQ(outcome.failures, 0) << "nu=" << nu << " d=" << d << " worst ratio " << outcome.worst_ratio;
    }
  }
}

}  // namespace

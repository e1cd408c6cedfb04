#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <vector>

#include "nufht/transform.hpp"
#include "oracle.hpp"

namespace {

using nufht::Block;
using nufht::BlockKind;

struct Setup {
  std::vector<double> freqs;
  std::vector<double> points;
};

// w_j = j_{nu,j}, r_k = j_{nu,k} / j_{nu,n+1}.
Setup fourier_bessel(int nu, std::size_t n) {
  const auto roots = nufht::bessel_roots(nu, static_cast<int>(n) + 1);
  Setup s;
  for (std::size_t k = 0; k < n; ++k) {
    s.points.push_back(roots[k] / roots[n]);
    s.freqs.push_back(roots[k]);
  }
  return s;
}

// Random log-spaced points in [1e-3, 1] and frequencies in [1e-1, 1e4], unsorted.
Setup log_spaced(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Setup s;
  for (std::size_t k = 0; k < n; ++k) s.points.push_back(std::pow(10.0, -3.0 + 3.0 * u(rng)));
  for (std::size_t j = 0; j < m; ++j) s.freqs.push_back(std::pow(10.0, -1.0 + 5.0 * u(rng)));
  return s;
}

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> c(n);
  for (auto& v : c) v = g(rng);
  return c;
}

double rel_l2(const std::vector<double>& approx, const std::vector<double>& exact) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    num += (approx[i] - exact[i]) * (approx[i] - exact[i]);
    den += exact[i] * exact[i];
  }
  return std::sqrt(num / den);
}

double norm1(std::span<const double> c) {
  double s = 0.0;
  for (double v : c) s += std::abs(v);
  return s;
}

TEST(BuildPlan, SingleEntry) {
  const std::vector<double> w{3.5};
  const std::vector<double> r{0.7};
  const auto plan = nufht::build_plan(2, 1e-8, w, r);
  ASSERT_EQ(plan.partition().blocks.size(), 1u);
  EXPECT_EQ(plan.partition().blocks[0].kind, BlockKind::direct);
  const std::vector<double> c{-1.25};
  EXPECT_DOUBLE_EQ(plan.apply(c)[0], -1.25 * oracle::bessel_j(2, 3.5 * 0.7));
}

TEST(BuildPlan, FourierBesselHasAllBlockKinds) {
  const auto s = fourier_bessel(0, 2048);
  const auto plan = nufht::build_plan(0, 1e-8, s.freqs, s.points);
  EXPECT_TRUE(nufht::validate_partition(plan.partition(), plan.sorted_freqs(), plan.sorted_points()));
  EXPECT_GT(plan.partition().area(BlockKind::local), 0u);
  EXPECT_GT(plan.partition().area(BlockKind::asymptotic), 0u);
  EXPECT_GT(plan.partition().area(BlockKind::direct), 0u);
}

TEST(BuildPlan, RejectsInvalidInput) {
  const std::vector<double> ok{0.0, 1.0};
  const std::vector<double> negative{-1.0, 1.0};
  const std::vector<double> nan{std::nan(""), 1.0};
  EXPECT_THROW(nufht::build_plan(0, 1e-8, negative, ok), std::invalid_argument);
  EXPECT_THROW(nufht::build_plan(0, 1e-8, ok, nan), std::invalid_argument);
  EXPECT_THROW(nufht::build_plan(101, 1e-8, ok, ok), std::domain_error);
  EXPECT_THROW(nufht::build_plan(-1, 1e-8, ok, ok), std::domain_error);
  EXPECT_THROW(nufht::build_plan(0, 1e-3, ok, ok), std::domain_error);
  EXPECT_THROW(nufht::build_plan(0, 1e-16, ok, ok), std::domain_error);
  const auto plan = nufht::build_plan(0, 1e-8, ok, ok);
  const std::vector<double> short_c{1.0};
  EXPECT_THROW(plan.apply(short_c), std::invalid_argument);
}

TEST(Apply, ZeroCoefficientsGiveZero) {
  const auto s = fourier_bessel(3, 600);
  const auto plan = nufht::build_plan(3, 1e-10, s.freqs, s.points);
  const std::vector<double> c(600, 0.0);
  for (double v : plan.apply(c)) EXPECT_EQ(v, 0.0);
}

TEST(Apply, UnsortedInputsMatchSorted) {
  std::mt19937_64 rng(3);
  auto s = fourier_bessel(1, 700);
  const auto c = gaussian(rng, 700);
  const auto sorted = nufht::build_plan(1, 1e-8, s.freqs, s.points).apply(c);

  std::vector<std::size_t> pk(700), pj(700);
  std::iota(pk.begin(), pk.end(), 0);
  std::iota(pj.begin(), pj.end(), 0);
  std::shuffle(pk.begin(), pk.end(), rng);
  std::shuffle(pj.begin(), pj.end(), rng);
  std::vector<double> r(700), w(700), cc(700);
  for (std::size_t i = 0; i < 700; ++i) {
    r[i] = s.points[pk[i]];
    cc[i] = c[pk[i]];
    w[i] = s.freqs[pj[i]];
  }
  const auto shuffled = nufht::build_plan(1, 1e-8, w, r).apply(cc);
  for (std::size_t i = 0; i < 700; ++i) EXPECT_EQ(shuffled[i], sorted[pj[i]]);
}

TEST(Apply, EndToEndAccuracyFourierBessel) {
  std::mt19937_64 rng(5);
  for (int nu : {0, 1, 5, 20}) {
    const auto s = fourier_bessel(nu, 1024);
    const auto c = gaussian(rng, 1024);
    const auto exact = nufht::dht_direct(nu, s.freqs, s.points, c);
    for (double eps : {1e-4, 1e-8, 1e-12}) {
      const auto g = nufht::build_plan(nu, eps, s.freqs, s.points).apply(c);
      EXPECT_LE(rel_l2(g, exact), 10 * eps) << "nu=" << nu << " eps=" << eps;
    }
  }
}

TEST(Apply, EndToEndAccuracyLogSpaced) {
  std::mt19937_64 rng(7);
  for (int nu : {0, 1, 5, 20}) {
    const auto s = log_spaced(rng, 900, 1100);
    const auto c = gaussian(rng, 900);
    const auto exact = nufht::dht_direct(nu, s.freqs, s.points, c);
    for (double eps : {1e-4, 1e-8, 1e-12}) {
      const auto g = nufht::build_plan(nu, eps, s.freqs, s.points).apply(c);
      EXPECT_LE(rel_l2(g, exact), 10 * eps) << "nu=" << nu << " eps=" << eps;
    }
  }
}

TEST(Apply, DirectOracleAgreesWithLongDouble) {
  std::mt19937_64 rng(9);
  const auto s = log_spaced(rng, 60, 50);
  const auto c = gaussian(rng, 60);
  for (int nu : {0, 7}) {
    const auto fast = nufht::dht_direct(nu, s.freqs, s.points, c);
    const auto ref = oracle::dht(nu, s.freqs, s.points, c);
    EXPECT_LE(rel_l2(fast, ref), 1e-13);
  }
}

TEST(Apply, ModerateSizeMatchesOracle) {
  // n = m = 1024 Fourier-Bessel at eps = 1e-8, the documented example.
  std::mt19937_64 rng(11);
  const auto s = fourier_bessel(0, 1024);
  const auto c = gaussian(rng, 1024);
  const auto g = nufht::build_plan(0, 1e-8, s.freqs, s.points).apply(c);
  EXPECT_LE(rel_l2(g, nufht::dht_direct(0, s.freqs, s.points, c)), 1e-7);
}

TEST(Apply, Linearity) {
  std::mt19937_64 rng(13);
  const auto s = fourier_bessel(5, 900);
  const double eps = 1e-8;
  const auto plan = nufht::build_plan(5, eps, s.freqs, s.points);
  const auto c1 = gaussian(rng, 900);
  const auto c2 = gaussian(rng, 900);
  const double alpha = -2.5;
  std::vector<double> mix(900);
  for (std::size_t k = 0; k < 900; ++k) mix[k] = c1[k] + alpha * c2[k];
  const auto g1 = plan.apply(c1);
  const auto g2 = plan.apply(c2);
  const auto gm = plan.apply(mix);
  std::vector<double> combined(g1.size());
  for (std::size_t j = 0; j < g1.size(); ++j) combined[j] = g1[j] + alpha * g2[j];
  EXPECT_LE(rel_l2(gm, combined), 10 * eps);
}

TEST(Apply, PlanReuseIsBitIdenticalAcrossThreadCounts) {
  std::mt19937_64 rng(17);
  const auto s = fourier_bessel(2, 1500);
  const auto c = gaussian(rng, 1500);
  nufht::PlanOptions serial;
  serial.num_threads = 1;
  nufht::PlanOptions parallel;
  parallel.num_threads = 3;
  const auto a = nufht::build_plan(2, 1e-10, s.freqs, s.points, serial);
  const auto b = nufht::build_plan(2, 1e-10, s.freqs, s.points, parallel);
  EXPECT_EQ(b.num_threads(), 3u);
  const auto first = a.apply(c);
  EXPECT_EQ(first, a.apply(c));
  EXPECT_EQ(first, b.apply(c));
}

TEST(Apply, UncachedBlocksMatchCached) {
  std::mt19937_64 rng(19);
  const auto s = fourier_bessel(4, 1200);
  const auto c = gaussian(rng, 1200);
  nufht::PlanOptions none;
  none.cache_budget = 0;
  const auto cached = nufht::build_plan(4, 1e-9, s.freqs, s.points);
  const auto uncached = nufht::build_plan(4, 1e-9, s.freqs, s.points, none);
  EXPECT_GT(cached.cached_values(), 0u);
  EXPECT_EQ(uncached.cached_values(), 0u);
  EXPECT_LE(rel_l2(uncached.apply(c), cached.apply(c)), 1e-14);
}

TEST(Apply, BlockAdditivityWithDenseBlocks) {
  std::mt19937_64 rng(23);
  const auto s = fourier_bessel(3, 400);
  const auto plan = nufht::build_plan(3, 1e-6, s.freqs, s.points, {.min_size = 64});
  const auto w = plan.sorted_freqs();
  const auto r = plan.sorted_points();
  // A unit coefficient puts exactly one block-evaluated term on each row.
  for (std::size_t k : {std::size_t{0}, std::size_t{57}, std::size_t{399}}) {
    std::vector<double> c(400, 0.0);
    c[k] = 1.0;
    std::vector<double> g(400, 0.0);
    for (const auto& b : plan.partition().blocks) {
      std::vector<double> part(b.rows(), 0.0);
      nufht::apply_direct_block(3, w, r, b, c, part);
      for (std::size_t j = 0; j < b.rows(); ++j) g[b.j0 + j] += part[j];
    }
    const std::vector<double> wv(w.begin(), w.end()), rv(r.begin(), r.end());
    EXPECT_EQ(g, nufht::dht_direct(3, wv, rv, c));
  }
}

TEST(Apply, SparseCoefficientProbe) {
  std::mt19937_64 rng(29);
  const std::size_t n = 10000;
  const auto s = fourier_bessel(0, n);
  std::vector<double> c(n, 0.0);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < 1000; ++i) c[idx[i]] = g(rng);
  const auto exact = nufht::dht_direct(0, s.freqs, s.points, c);
  for (double eps : {1e-4, 1e-8, 1e-12}) {
    const auto out = nufht::build_plan(0, eps, s.freqs, s.points).apply(c);
    EXPECT_LE(rel_l2(out, exact), 10 * eps) << "eps=" << eps;
  }
}

TEST(LocalBlock, MatchesDenseWithinTruncationBound) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int nu : {0, 1, 2, 9, 30}) {
    for (double eps : {1e-4, 1e-10}) {
      const auto p = nufht::get_params(nu, eps);
      for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> r(40), w(30);
        for (auto& v : r) v = u(rng);
        std::sort(r.begin(), r.end());
        for (auto& v : w) v = u(rng) * p.z / r.back();
        std::sort(w.begin(), w.end());
        const auto c = gaussian(rng, 40);
        const Block b{0, 29, 0, 39, BlockKind::local};
        std::vector<double> g(30, 0.0);
        nufht::apply_local_block(nu, p.L, w, r, b, c, g);
        const auto exact = oracle::dht(nu, w, r, c);
        const double bound = nufht::b_loc(p.z, nu, p.L) * norm1(c) + 1e-14 * norm1(c);
        for (std::size_t j = 0; j < 30; ++j) EXPECT_LE(std::abs(g[j] - exact[j]), bound) << "nu=" << nu;
      }
    }
  }
}

TEST(LocalBlock, ZeroRadius) {
  const std::vector<double> w{1.0, 2.0};
  const std::vector<double> r{0.0, 0.0, 0.0};
  const std::vector<double> c{1.0, 2.0, -0.5};
  const Block b{0, 1, 0, 2, BlockKind::local};
  std::vector<double> g(2, 0.0);
  nufht::apply_local_block(0, 5, w, r, b, c, g);
  EXPECT_EQ(g[0], 2.5);
  EXPECT_EQ(g[1], 2.5);
  std::fill(g.begin(), g.end(), 0.0);
  nufht::apply_local_block(3, 5, w, r, b, c, g);
  EXPECT_EQ(g[0], 0.0);
}

TEST(LocalBlock, SingleTermForTinyArguments) {
  const std::vector<double> w{1e-4, 2e-4};
  const std::vector<double> r{0.1, 0.5, 1.0};
  const std::vector<double> c{1.0, 1.0, 1.0};
  const Block b{0, 1, 0, 2, BlockKind::local};
  std::vector<double> g(2, 0.0);
  nufht::apply_local_block(0, 0, w, r, b, c, g);
  const auto exact = oracle::dht(0, w, r, c);
  const double bound = nufht::b_loc(2e-4, 0, 0) * 3.0 + 1e-15;
  for (std::size_t j = 0; j < 2; ++j) EXPECT_LE(std::abs(g[j] - exact[j]), bound);
}

TEST(AsymptoticBlock, MatchesDenseWithinRemainderBound) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int nu : {0, 1, 6, 25}) {
    for (double eps : {1e-4, 1e-8, 1e-12}) {
      const auto p = nufht::get_params(nu, eps);
      for (int trial = 0; trial < 4; ++trial) {
        const double r0 = 0.05 + u(rng);
        std::vector<double> r(50), w(45);
        for (auto& v : r) v = r0 * (1.0 + 3.0 * u(rng));
        std::sort(r.begin(), r.end());
        for (auto& v : w) v = p.z / r0 * (1.0 + 1e-9 + 20.0 * u(rng));
        std::sort(w.begin(), w.end());
        const auto c = gaussian(rng, 50);
        const Block b{0, 44, 0, 49, BlockKind::asymptotic};
        std::vector<double> g(45, 0.0);
        nufht::apply_asymptotic_block(nu, p.M, p.eps, w, r, b, c, g);
        const auto exact = oracle::dht(nu, w, r, c);
        const double bound = (nufht::b_asy(w[0] * r[0], nu, p.M) + eps) * norm1(c);
        for (std::size_t j = 0; j < 45; ++j) {
          EXPECT_LE(std::abs(g[j] - exact[j]), bound) << "nu=" << nu << " eps=" << eps;
        }
      }
    }
  }
}

TEST(AsymptoticBlock, ConvergesAsTermsIncrease) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> r(30), w(30);
  for (auto& v : r) v = 1.0 + u(rng);
  for (auto& v : w) v = 60.0 + 100.0 * u(rng);
  std::sort(r.begin(), r.end());
  std::sort(w.begin(), w.end());
  const auto c = gaussian(rng, 30);
  const auto exact = oracle::dht(2, w, r, c);
  const Block b{0, 29, 0, 29, BlockKind::asymptotic};
  double previous = 1e300;
  for (int M = 1; M <= 5; ++M) {
    std::vector<double> g(30, 0.0);
    nufht::apply_asymptotic_block(2, M, 1e-15, w, r, b, c, g);
    const double err = rel_l2(g, exact);
    EXPECT_LT(err, previous) << "M=" << M;
    previous = std::max(err, 1e-13);
  }
  EXPECT_LT(previous, 1e-9);
}

TEST(DirectBlock, SplitEqualsUnsplit) {
  std::mt19937_64 rng(43);
  const auto s = log_spaced(rng, 20, 15);
  std::vector<double> w = s.freqs, r = s.points;
  std::sort(w.begin(), w.end());
  std::sort(r.begin(), r.end());
  const auto c = gaussian(rng, 20);
  std::vector<double> whole(15, 0.0), split(15, 0.0);
  nufht::apply_direct_block(4, w, r, Block{0, 14, 0, 19, BlockKind::direct}, c, whole);
  nufht::apply_direct_block(4, w, r, Block{0, 6, 0, 19, BlockKind::direct}, c, std::span(split).subspan(0, 7));
  nufht::apply_direct_block(4, w, r, Block{7, 14, 0, 19, BlockKind::direct}, c, std::span(split).subspan(7));
  EXPECT_EQ(whole, split);
  std::vector<double> one(1, 0.0);
  nufht::apply_direct_block(4, w, r, Block{3, 3, 5, 5, BlockKind::direct}, c, one);
  EXPECT_EQ(one[0], c[5] * nufht::bessel_j(4, w[3] * r[5]));
}

TEST(DhtDirect, ZeroPointForOrderZero) {
  const std::vector<double> w{0.0, 1.0, 50.0};
  const std::vector<double> r{0.0};
  const std::vector<double> c{1.75};
  for (double v : nufht::dht_direct(0, w, r, c)) EXPECT_EQ(v, 1.75);
}

TEST(DhtDirect, LinearAndPermutationEquivariant) {
  std::mt19937_64 rng(47);
  const auto s = log_spaced(rng, 40, 30);
  const auto c1 = gaussian(rng, 40);
  const auto c2 = gaussian(rng, 40);
  std::vector<double> sum(40);
  for (std::size_t k = 0; k < 40; ++k) sum[k] = c1[k] + c2[k];
  const auto g1 = nufht::dht_direct(1, s.freqs, s.points, c1);
  const auto g2 = nufht::dht_direct(1, s.freqs, s.points, c2);
  const auto gs = nufht::dht_direct(1, s.freqs, s.points, sum);
  for (std::size_t j = 0; j < 30; ++j) EXPECT_NEAR(gs[j], g1[j] + g2[j], 1e-13 * (1.0 + std::abs(gs[j])));

  std::vector<double> w(s.freqs.rbegin(), s.freqs.rend());
  const auto reversed = nufht::dht_direct(1, w, s.points, c1);
  for (std::size_t j = 0; j < 30; ++j) EXPECT_EQ(reversed[j], g1[29 - j]);
}

TEST(Threads, EnvironmentSetting) {
  setenv("NUFHT_NUM_THREADS", "2", 1);
  EXPECT_EQ(nufht::detail::resolve_threads(0), 2u);
  EXPECT_EQ(nufht::detail::resolve_threads(5), 5u);
  setenv("NUFHT_NUM_THREADS", "zero", 1);
  EXPECT_THROW(nufht::detail::resolve_threads(0), std::invalid_argument);
  unsetenv("NUFHT_NUM_THREADS");
  EXPECT_EQ(nufht::detail::resolve_threads(0), 1u);
}

}  // namespace

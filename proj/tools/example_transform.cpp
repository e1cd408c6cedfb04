// Fourier-Bessel transform of order 0 on n = 4096 nodes, checked against
// dense summation on a few rows.

#include <cmath>
#include <cstdio>
#include <vector>

#include "nufht/experiments.hpp"
#include "nufht/transform.hpp"

int main() {
  const int nu = 0;
  const double eps = 1e-10;
  const auto setup = nufht::fourier_bessel_setup(nu, 4096);
  nufht::Rng rng(7);
  const auto c = nufht::gaussian_vector(rng, setup.points.size());

  const auto plan = nufht::build_plan(nu, eps, setup.freqs, setup.points);
  const auto g = plan.apply(c);

  std::printf("cells: %zu local, %zu asymptotic, %zu direct\n",
              plan.partition().area(nufht::BlockKind::local), plan.partition().area(nufht::BlockKind::asymptotic),
              plan.partition().area(nufht::BlockKind::direct));
  for (std::size_t j : {std::size_t(0), std::size_t(1000), setup.freqs.size() - 1}) {
    const std::vector<double> w{setup.freqs[j]};
    const double exact = nufht::dht_direct(nu, w, setup.points, c)[0];
    std::printf("g[%zu] = % .15e  direct % .15e  diff %.2e\n", j, g[j], exact, std::abs(g[j] - exact));
  }
  return 0;
}

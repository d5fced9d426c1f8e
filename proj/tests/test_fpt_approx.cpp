#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cda/chain.hpp"
#include "cda/fpt_approx.hpp"
#include "cda/rng.hpp"

using namespace cda;

namespace {

// Exact absorbed-mass sequence of the +-1 walk from the midpoint with
// absorbing states 1 and N. Halving is exact in binary floating point, so
// these masses are exact dyadic rationals up to the step horizon used here.
std::vector<double> enumerate_absorption(int N, int h_max) {
  std::vector<double> mass(static_cast<std::size_t>(N) + 1, 0.0);
  mass[static_cast<std::size_t>((N + 1) / 2)] = 1.0;
  std::vector<double> out;
  for (int h = 1; h <= h_max; ++h) {
    std::vector<double> next(static_cast<std::size_t>(N) + 1, 0.0);
    double absorbed = 0.0;
    for (int s = 2; s <= N - 1; ++s) {
      const double m = mass[static_cast<std::size_t>(s)] / 2.0;
      if (m == 0.0) continue;
      if (s - 1 == 1) absorbed += m;
      else next[static_cast<std::size_t>(s - 1)] += m;
      if (s + 1 == N) absorbed += m;
      else next[static_cast<std::size_t>(s + 1)] += m;
    }
    out.push_back(absorbed);
    mass.swap(next);
  }
  return out;
}

}  // namespace

TEST_CASE("pmf rejects even or tiny N and h < 1") {
  REQUIRE_THROWS_AS(discrete_fpt_pmf(4, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(discrete_fpt_pmf(1, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(discrete_fpt_pmf(5, 0), std::invalid_argument);
}

TEST_CASE("N=3 absorbs in exactly one step") {
  REQUIRE(discrete_fpt_pmf(3, 1) == Catch::Approx(1.0).margin(1e-14));
  for (long long h = 2; h <= 10; ++h)
    REQUIRE(std::abs(discrete_fpt_pmf(3, h)) < 1e-14);
}

TEST_CASE("N=5 pmf is 2^-m at even steps, zero at odd steps") {
  for (int m = 1; m <= 10; ++m)
    REQUIRE(discrete_fpt_pmf(5, 2 * m) ==
            Catch::Approx(std::pow(2.0, -m)).margin(1e-13));
  for (int h = 1; h <= 19; h += 2)
    REQUIRE(std::abs(discrete_fpt_pmf(5, h)) < 1e-13);
}

TEST_CASE("pmf matches exhaustive path enumeration") {
  for (int N : {3, 5, 7, 9}) {
    const auto exact = enumerate_absorption(N, 20);
    for (int h = 1; h <= 20; ++h)
      REQUIRE(std::abs(discrete_fpt_pmf(N, h) -
                       exact[static_cast<std::size_t>(h) - 1]) < 1e-12);
  }
}

TEST_CASE("support parity matches the start-to-boundary distance") {
  for (int N : {5, 7, 9, 11, 13}) {
    const int dist = (N - 1) / 2;
    for (int h = 1; h <= 30; ++h)
      if ((h - dist) % 2 != 0)
        REQUIRE(std::abs(discrete_fpt_pmf(N, h)) < 1e-13);
  }
}

TEST_CASE("truncated distribution keeps nearly all the mass") {
  for (int N = 3; N <= 51; N += 2) {
    const auto dist = DiscreteFptDist::build(N);
    double total = 0.0;
    for (double p : dist.pmf) {
      REQUIRE(p >= 0.0);
      REQUIRE(p <= 1.0);
      total += p;
    }
    REQUIRE(total >= 1.0 - 1e-9);
    REQUIRE(dist.truncation_eps <= 1e-9);
    REQUIRE(std::abs(dist.mean() - midpoint_walk_mean_steps(N)) < 1e-6);
  }
}

TEST_CASE("mixture parameters stay in range") {
  for (double rho : {0.01, 0.1, 0.5, 0.99}) {
    const MixtureApprox approx(ModelParams::from_traffic(11, 1, rho));
    REQUIRE(approx.move_prob() > 0.0);
    REQUIRE(approx.move_prob() < 0.5);
    REQUIRE(approx.event_time_scale() > 0.0);
  }
}

TEST_CASE("mixture mean equals the chain mean for n=1") {
  for (int N : {11, 21, 51}) {
    for (double rho : {0.01, 0.1, 0.5}) {
      const auto params = ModelParams::from_traffic(N, 1, rho);
      const MixtureApprox approx(params);
      const double lhs = mixture_mean(approx, N);
      const double rhs = mean_fpt_continuous(params);
      REQUIRE(std::abs(lhs - rhs) <= 1e-9);
    }
  }
}

TEST_CASE("mixture sample mean approaches the analytic mean") {
  const auto params = ModelParams::from_traffic(11, 1, 0.01);
  const MixtureApprox approx(params);
  REQUIRE(mixture_mean(approx, 11) == Catch::Approx(2500.0).margin(1e-9));
  const auto samples = mixture_batch(approx, 11, 10000, RngSpec{11, 0});
  double acc = 0.0;
  double acc2 = 0.0;
  for (double v : samples) {
    acc += v;
    acc2 += v * v;
  }
  const double mean = acc / static_cast<double>(samples.size());
  const double var = (acc2 - acc * acc / static_cast<double>(samples.size())) /
                     static_cast<double>(samples.size() - 1);
  const double se = std::sqrt(var / static_cast<double>(samples.size()));
  REQUIRE(std::abs(mean - 2500.0) < 3.0 * se);
}

TEST_CASE("geometric collapse at move probability one") {
  // with one walk step and unit success probability the mixture reduces to
  // a single exponential of the event time scale
  const auto dist = DiscreteFptDist::build(3);
  REQUIRE(dist.pmf.size() == 1);
  Rng rng(RngSpec{21, 0});
  REQUIRE(rng.geometric_trials(1.0) == 1);
}

TEST_CASE("log-mean estimate is reproducible and tight") {
  const auto params = ModelParams::from_traffic(11, 1, 0.02);
  const MixtureApprox approx(params);
  Rng a(RngSpec{31, 4});
  Rng b(RngSpec{31, 4});
  const auto ra = mixture_log_mean(approx, 11, 10000, a);
  const auto rb = mixture_log_mean(approx, 11, 10000, b);
  REQUIRE(ra.mean == rb.mean);
  REQUIRE(ra.std_error == rb.std_error);
  REQUIRE(ra.std_error <= 0.02);
  REQUIRE(std::isfinite(ra.mean));
}

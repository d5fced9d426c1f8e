#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cda/model.hpp"
#include "cda/rng.hpp"

namespace cda {

// P(h steps to absorption at 1 or N) for the simple symmetric +-1 walk
// started at the midpoint (N+1)/2, N odd. Only odd k contribute (the
// sin(k*pi/2) factor kills even k); summing them alone avoids cancellation
// against identically-zero terms. The h = 1 evaluation takes 0^0 = 1 so the
// N = 3 case comes out right.
inline double discrete_fpt_pmf(int num_prices, long long h) {
  const int N = num_prices;
  if (N < 3 || N % 2 == 0)
    throw std::invalid_argument("discrete_fpt_pmf requires odd N >= 3");
  if (h < 1) throw std::invalid_argument("h must be >= 1");
  const double pi = 3.14159265358979323846;
  double acc = 0.0;
  for (int k = 1; k <= N - 2; k += 2) {
    const double angle = k * pi / (N - 1);
    const double c = std::cos(angle);
    const double cpow = (h == 1) ? 1.0 : std::pow(c, static_cast<double>(h - 1));
    // for odd k, (-1)^(k+1) = 1 and sin(k*pi/2) alternates +1, -1, ...
    const double sign = (k % 4 == 1) ? 1.0 : -1.0;
    acc += sign * std::sin(angle) * cpow;
  }
  return std::max(0.0, 2.0 / (N - 1) * acc);
}

// Tabulated pmf of the walk's absorption step count, truncated once the
// cumulative mass reaches 1 - 1e-12 (or a generous step cap, whichever
// comes first). Sampling renormalizes, which spreads the leftover tail mass
// proportionally over the table.
struct DiscreteFptDist {
  int num_prices = 0;
  std::vector<double> pmf;  // pmf[h-1] = P(steps = h)
  std::vector<double> cdf;
  double truncation_eps = 0.0;

  static DiscreteFptDist build(int num_prices, double tail_eps = 1e-12) {
    DiscreteFptDist d;
    d.num_prices = num_prices;
    const long long cap =
        200LL * (num_prices - 1) * (num_prices - 1);
    double total = 0.0;
    for (long long h = 1; total < 1.0 - tail_eps && h <= cap; ++h) {
      const double p = discrete_fpt_pmf(num_prices, h);
      total += p;
      d.pmf.push_back(p);
      d.cdf.push_back(total);
    }
    d.truncation_eps = std::max(0.0, 1.0 - total);
    return d;
  }

  double mean() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i)
      acc += static_cast<double>(i + 1) * pmf[i];
    return acc;
  }

  long long sample(Rng& rng) const {
    const double u = rng.uniform01() * cdf.back();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    return 1 + static_cast<long long>(it - cdf.begin());
  }
};

// Exact mean step count of the midpoint walk: (start-1)*(N-start) with
// start = (N+1)/2.
inline double midpoint_walk_mean_steps(int num_prices) {
  const double half = (num_prices - 1) / 2.0;
  return half * half;
}

// Parameters lifting the walk to continuous time: each order arrival moves
// the price with probability rho/(2(1+rho)), and arrivals come at total rate
// 2*mu*(1+rho).
struct MixtureApprox {
  ModelParams params;

  explicit MixtureApprox(const ModelParams& p) : params(p) {
    params.validate();
  }

  double move_prob() const {
    const double rho = params.traffic_intensity();
    return rho / (2.0 * (1.0 + rho));
  }

  double event_time_scale() const {
    const double rho = params.traffic_intensity();
    return 1.0 / (2.0 * params.market_rate * (1.0 + rho));
  }
};

// One draw of the approximate first-passage time: number of price moves from
// the walk distribution, order arrivals per move geometric (trials up to and
// including the move), total time Gamma with the event count as shape.
inline double mixture_sample(const MixtureApprox& approx,
                             const DiscreteFptDist& dist, Rng& rng) {
  const long long moves = dist.sample(rng);
  const double q = approx.move_prob();
  long long events = 0;
  for (long long i = 0; i < moves; ++i) events += rng.geometric_trials(q);
  return rng.gamma(static_cast<double>(events), approx.event_time_scale());
}

inline double mixture_sample(const MixtureApprox& approx, int num_prices,
                             Rng& rng) {
  const DiscreteFptDist dist = DiscreteFptDist::build(num_prices);
  return mixture_sample(approx, dist, rng);
}

// Closed-form mean of the mixture: E[moves]/move_prob events on average,
// each of mean duration event_time_scale. Equals ((N-1)/2)^2 / (mu * rho),
// the same value the restricted-chain solve gives for max_jump = 1.
inline double mixture_mean(const MixtureApprox& approx, int num_prices) {
  return midpoint_walk_mean_steps(num_prices) / approx.move_prob() *
         approx.event_time_scale();
}

inline std::vector<double> mixture_batch(const MixtureApprox& approx,
                                         int num_prices, int count,
                                         RngSpec seed) {
  const DiscreteFptDist dist = DiscreteFptDist::build(num_prices);
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out.push_back(mixture_sample(approx, dist, rng));
  return out;
}

struct LogMeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

// Monte Carlo mean of log(T) under the mixture approximation.
inline LogMeanEstimate mixture_log_mean(const MixtureApprox& approx,
                                        int num_prices, int samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  const DiscreteFptDist dist = DiscreteFptDist::build(num_prices);
  double acc = 0.0;
  double acc2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double v = std::log(mixture_sample(approx, dist, rng));
    acc += v;
    acc2 += v * v;
  }
  LogMeanEstimate est;
  est.samples = samples;
  est.mean = acc / samples;
  if (samples > 1) {
    const double var = (acc2 - acc * acc / samples) / (samples - 1);
    est.std_error = std::sqrt(std::max(0.0, var) / samples);
  }
  return est;
}

}  // namespace cda

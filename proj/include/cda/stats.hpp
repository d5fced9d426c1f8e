#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cda/rng.hpp"

namespace cda {

// Right-continuous empirical CDF: F(x) = fraction of samples <= x.
class Ecdf {
 public:
  explicit Ecdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw std::invalid_argument("ecdf needs samples");
    std::sort(sorted_.begin(), sorted_.end());
  }

  double operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) /
           static_cast<double>(sorted_.size());
  }

  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

struct KsResult {
  double statistic = 0.0;  // sup |F_a - F_b|
  double d_a_above = 0.0;  // sup (F_a - F_b)
  double d_b_above = 0.0;  // sup (F_b - F_a)
  double p_value = 1.0;
  int replicates = 0;
};

namespace detail {

// Sup-distances between the ECDFs of the pooled values labelled true/false.
// Values must be sorted; equal values are consumed as one block so ties do
// not produce phantom gaps.
inline void ks_distances(const std::vector<double>& pooled,
                         const std::vector<unsigned char>& is_a,
                         std::size_t na, std::size_t nb, double& d_a_above,
                         double& d_b_above) {
  d_a_above = 0.0;
  d_b_above = 0.0;
  std::size_t ca = 0;
  std::size_t cb = 0;
  std::size_t i = 0;
  const std::size_t total = pooled.size();
  while (i < total) {
    const double v = pooled[i];
    while (i < total && pooled[i] == v) {
      if (is_a[i]) ++ca;
      else ++cb;
      ++i;
    }
    const double diff = static_cast<double>(ca) / static_cast<double>(na) -
                        static_cast<double>(cb) / static_cast<double>(nb);
    if (diff > d_a_above) d_a_above = diff;
    if (-diff > d_b_above) d_b_above = -diff;
  }
}

}  // namespace detail

// Two-sample Kolmogorov-Smirnov statistic with a permutation p-value:
// labels are reshuffled `replicates` times over the pooled sample and the
// p-value is the add-one fraction of permuted statistics >= the observed one.
inline KsResult ks_two_sample(std::span<const double> a,
                              std::span<const double> b, int replicates,
                              Rng& rng) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_two_sample needs non-empty samples");
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  std::vector<std::pair<double, unsigned char>> tagged;
  tagged.reserve(na + nb);
  for (double v : a) tagged.emplace_back(v, 1);
  for (double v : b) tagged.emplace_back(v, 0);
  std::sort(tagged.begin(), tagged.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<double> pooled(na + nb);
  std::vector<unsigned char> labels(na + nb);
  for (std::size_t i = 0; i < tagged.size(); ++i) {
    pooled[i] = tagged[i].first;
    labels[i] = tagged[i].second;
  }

  KsResult res;
  detail::ks_distances(pooled, labels, na, nb, res.d_a_above, res.d_b_above);
  res.statistic = std::max(res.d_a_above, res.d_b_above);
  res.replicates = replicates;

  int at_least = 0;
  std::vector<unsigned char> perm = labels;
  for (int r = 0; r < replicates; ++r) {
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(i)));
      std::swap(perm[i], perm[j]);
    }
    double da = 0.0;
    double db = 0.0;
    detail::ks_distances(pooled, perm, na, nb, da, db);
    if (std::max(da, db) >= res.statistic) ++at_least;
  }
  res.p_value = replicates > 0
                    ? static_cast<double>(at_least + 1) / (replicates + 1)
                    : 1.0;
  return res;
}

struct HistogramResult {
  std::vector<double> edges;        // bins + 1 entries
  std::vector<std::uint64_t> counts;
  double fit_mean = 0.0;            // moment fit of a normal curve
  double fit_sd = 0.0;
};

// Equal-width histogram over [min, max], bins right-closed with the lowest
// bin closed on both sides (R's hist convention). All-equal samples collapse
// to a single bin.
inline HistogramResult histogram(std::span<const double> samples, int bins) {
  if (samples.empty()) throw std::invalid_argument("histogram needs samples");
  if (bins < 1) throw std::invalid_argument("bins must be >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  HistogramResult out;
  double acc = 0.0;
  for (double v : samples) acc += v;
  out.fit_mean = acc / static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - out.fit_mean) * (v - out.fit_mean);
  out.fit_sd = samples.size() > 1
                   ? std::sqrt(ss / static_cast<double>(samples.size() - 1))
                   : 0.0;
  if (lo == hi) {
    out.edges = {lo, hi};
    out.counts = {samples.size()};
    return out;
  }
  const double width = (hi - lo) / bins;
  out.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i)
    out.edges[static_cast<std::size_t>(i)] = lo + width * i;
  out.edges.back() = hi;
  out.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : samples) {
    int idx = static_cast<int>(std::ceil((v - lo) / width)) - 1;
    if (idx < 0) idx = 0;
    if (idx >= bins) idx = bins - 1;
    ++out.counts[static_cast<std::size_t>(idx)];
  }
  return out;
}

inline int freedman_diaconis_bins(std::span<const double> samples) {
  if (samples.size() < 2) return 1;
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return i + 1 < sorted.size()
               ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
               : sorted[i];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double range = sorted.back() - sorted.front();
  if (range <= 0.0) return 1;
  if (iqr <= 0.0)
    return std::max(1, static_cast<int>(std::ceil(std::sqrt(
                           static_cast<double>(sorted.size())))));
  const double width =
      2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
  return std::max(1, static_cast<int>(std::ceil(range / width)));
}

struct SampleSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;        // with Bessel correction
  double std_error = 0.0;
  double skewness = 0.0;  // g1 = m3 / m2^(3/2)
};

inline SampleSummary summarize(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("summarize needs samples");
  SampleSummary s;
  s.count = samples.size();
  double acc = 0.0;
  for (double v : samples) acc += v;
  s.mean = acc / static_cast<double>(s.count);
  double m2 = 0.0;
  double m3 = 0.0;
  for (double v : samples) {
    const double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(s.count);
  m3 /= static_cast<double>(s.count);
  if (s.count > 1) {
    const double var =
        m2 * static_cast<double>(s.count) / static_cast<double>(s.count - 1);
    s.sd = std::sqrt(var);
    s.std_error = s.sd / std::sqrt(static_cast<double>(s.count));
  }
  if (m2 > 0.0) s.skewness = m3 / std::pow(m2, 1.5);
  return s;
}

// Half the L1 distance between two probability vectors.
inline double total_variation(std::span<const double> p,
                              std::span<const double> q) {
  if (p.size() != q.size())
    throw std::invalid_argument("total_variation size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

}  // namespace cda

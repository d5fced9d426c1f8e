#pragma once

#include <Eigen/Dense>
#include <boost/rational.hpp>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cda/model.hpp"

namespace cda {

using Rational = boost::rational<long long>;

// Row-stochastic matrix of the embedded trade-price chain in the low-traffic
// limit. Prices are 1-based; storage is row-major.
template <typename T>
struct SquareMatrix {
  int size = 0;
  std::vector<T> entries;

  explicit SquareMatrix(int n)
      : size(n), entries(static_cast<std::size_t>(n) * n, T(0)) {}

  T& at(int row, int col) {
    return entries[static_cast<std::size_t>(row - 1) * size + (col - 1)];
  }
  const T& at(int row, int col) const {
    return entries[static_cast<std::size_t>(row - 1) * size + (col - 1)];
  }
};

using TransitionMatrix = SquareMatrix<double>;
using RationalMatrix = SquareMatrix<Rational>;

// P(next trade is a bid at b | last price p): the limit bid is drawn
// uniformly on [p-n, p] clipped at 1 and is executed immediately.
inline Rational bid_prob_exact(Price p, Price b, const ModelParams& params) {
  const int n = params.max_jump;
  if (b < p - n || b > p) return Rational(0);
  if (p <= n) return Rational(1, p);      // interval clipped to [1, p]
  return Rational(1, n + 1);              // full interval [p-n, p]
}

// Mirror case for asks: uniform on [p, p+n] clipped at the top of the grid.
inline Rational ask_prob_exact(Price p, Price a, const ModelParams& params) {
  const int N = params.num_prices;
  const int n = params.max_jump;
  if (a < p || a > p + n) return Rational(0);
  if (p >= N - n + 1) return Rational(1, N - p + 1);
  return Rational(1, n + 1);
}

inline double bid_prob(Price p, Price b, const ModelParams& params) {
  return boost::rational_cast<double>(bid_prob_exact(p, b, params));
}

inline double ask_prob(Price p, Price a, const ModelParams& params) {
  return boost::rational_cast<double>(ask_prob_exact(p, a, params));
}

namespace detail {
inline void check_chain_params(const ModelParams& params) {
  params.validate();
  if (params.max_jump > params.num_prices - 1)
    throw std::invalid_argument("chain requires max_jump <= num_prices - 1");
}
}  // namespace detail

// One-step kernel of the price chain: an arriving order is a bid or an ask
// with probability 1/2 each (symmetric auction) and trades immediately.
inline RationalMatrix transition_matrix_exact(const ModelParams& params) {
  detail::check_chain_params(params);
  const int N = params.num_prices;
  RationalMatrix m(N);
  const Rational half(1, 2);
  for (Price p = 1; p <= N; ++p)
    for (Price q = 1; q <= N; ++q)
      m.at(p, q) = half * ask_prob_exact(p, q, params) +
                   half * bid_prob_exact(p, q, params);
  return m;
}

inline TransitionMatrix to_double(const RationalMatrix& m) {
  TransitionMatrix out(m.size);
  for (std::size_t i = 0; i < m.entries.size(); ++i)
    out.entries[i] = boost::rational_cast<double>(m.entries[i]);
  return out;
}

inline TransitionMatrix transition_matrix(const ModelParams& params) {
  return to_double(transition_matrix_exact(params));
}

// Block coefficients of the tri-diagonal band construction:
// a is the off-diagonal weight, d_i the boundary diagonals, b_i the
// sub-diagonal fill of the top-left block.
struct BlockParams {
  Rational a;
  std::vector<Rational> d;  // d[i-1] = d_i, i = 1..n
  std::vector<Rational> b;  // b[i-2] = b_i, i = 2..n
};

inline BlockParams block_params(int max_jump) {
  const int n = max_jump;
  BlockParams bp;
  bp.a = Rational(1, 2 * (n + 1));
  for (int i = 1; i <= n; ++i) bp.d.push_back(Rational(1, 2 * i) + bp.a);
  for (int i = 2; i <= n; ++i) bp.b.push_back(Rational(1, 2 * i));
  return bp;
}

// Assembles the chain matrix from its block structure: band of a's of width
// n with 2a on the interior diagonal, a top-left n-by-n boundary block
// (b_i below the diagonal, d_i on it), and its 180-degree rotation at the
// bottom right. Defined for num_prices >= 2*max_jump so the blocks do not
// overlap; otherwise transition_matrix_exact is the authoritative form.
inline RationalMatrix block_matrix_exact(const ModelParams& params) {
  detail::check_chain_params(params);
  const int N = params.num_prices;
  const int n = params.max_jump;
  if (N < 2 * n)
    throw std::invalid_argument("block layout requires num_prices >= 2*max_jump");
  const BlockParams bp = block_params(n);
  RationalMatrix m(N);
  for (int i = 1; i <= N; ++i) {
    m.at(i, i) = bp.a * 2;
    for (int k = 1; k <= n; ++k) {
      if (i + k <= N) m.at(i, i + k) = bp.a;
      if (i - k >= 1) m.at(i, i - k) = bp.a;
    }
  }
  for (int i = 1; i <= n; ++i) {
    m.at(i, i) = bp.d[static_cast<std::size_t>(i) - 1];
    for (int j = 1; j < i; ++j) m.at(i, j) = bp.b[static_cast<std::size_t>(i) - 2];
  }
  // bottom-right block = top-left block rotated by 180 degrees
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      m.at(N - n + i, N - n + j) = m.at(n - i + 1, n - j + 1);
  return m;
}

inline TransitionMatrix block_matrix(const ModelParams& params) {
  return to_double(block_matrix_exact(params));
}

namespace detail {
inline Eigen::MatrixXd to_eigen(const TransitionMatrix& m) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(m.entries.data(),
                                                          m.size, m.size);
}
}  // namespace detail

inline double stationarity_residual(const TransitionMatrix& m,
                                    const PriceDistribution& pi) {
  double worst = 0.0;
  for (int q = 1; q <= m.size; ++q) {
    double acc = 0.0;
    for (int p = 1; p <= m.size; ++p)
      acc += pi[static_cast<std::size_t>(p) - 1] * m.at(p, q);
    worst = std::max(worst, std::abs(acc - pi[static_cast<std::size_t>(q) - 1]));
  }
  return worst;
}

struct PowerIterationResult {
  PriceDistribution pi;
  std::uint64_t iterations = 0;
  bool converged = false;
};

inline PowerIterationResult power_iteration(const TransitionMatrix& m,
                                            double tol = 1e-12,
                                            std::uint64_t max_iterations = 1000000) {
  const int N = m.size;
  PriceDistribution pi(static_cast<std::size_t>(N), 1.0 / N);
  PriceDistribution next(static_cast<std::size_t>(N));
  PowerIterationResult out;
  for (std::uint64_t it = 1; it <= max_iterations; ++it) {
    double diff = 0.0;
    for (int q = 1; q <= N; ++q) {
      double acc = 0.0;
      for (int p = 1; p <= N; ++p)
        acc += pi[static_cast<std::size_t>(p) - 1] * m.at(p, q);
      next[static_cast<std::size_t>(q) - 1] = acc;
      diff = std::max(diff, std::abs(acc - pi[static_cast<std::size_t>(q) - 1]));
    }
    double total = 0.0;
    for (double v : next) total += v;
    for (double& v : next) v /= total;
    pi.swap(next);
    out.iterations = it;
    if (diff <= tol) {
      out.converged = true;
      break;
    }
  }
  out.pi = std::move(pi);
  return out;
}

// Unique pi with pi P = pi, sum(pi) = 1: least-squares solve of the
// transposed system with the normalization row appended. Falls back to
// power iteration if the direct result is not stationary to 1e-12.
inline PriceDistribution invariant_distribution(const TransitionMatrix& m) {
  const int N = m.size;
  if (N < 1) throw std::invalid_argument("empty matrix");
  const Eigen::MatrixXd P = detail::to_eigen(m);
  Eigen::MatrixXd A(N + 1, N);
  A.topRows(N) = P.transpose() - Eigen::MatrixXd::Identity(N, N);
  A.row(N).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N + 1);
  rhs(N) = 1.0;
  Eigen::VectorXd x = A.colPivHouseholderQr().solve(rhs);
  PriceDistribution pi(x.data(), x.data() + N);
  double total = 0.0;
  for (double v : pi) total += v;
  if (total > 0.0)
    for (double& v : pi) v /= total;
  if (stationarity_residual(m, pi) <= 1e-12) return pi;
  PowerIterationResult fallback = power_iteration(m);
  if (!fallback.converged)
    throw std::runtime_error(
        "invariant distribution: direct solve inaccurate and power iteration "
        "did not converge");
  return fallback.pi;
}

// Expected number of chain steps until the price first hits 1 or N, from
// `start`, via the fundamental-matrix system (I - Q) x = 1 over the
// transient states 2..N-1. One iterative-refinement pass keeps the result
// accurate to a few ulps.
inline double mean_fpt_discrete(const TransitionMatrix& m, Price start) {
  const int N = m.size;
  if (start < 2 || start > N - 1)
    throw std::invalid_argument("start must lie strictly inside the grid");
  const int t = N - 2;
  Eigen::MatrixXd A(t, t);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j)
      A(i, j) = (i == j ? 1.0 : 0.0) - m.at(i + 2, j + 2);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(t);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd x = lu.solve(ones);
  Eigen::VectorXd residual(t);
  for (int i = 0; i < t; ++i) {
    long double acc = 1.0L;
    for (int j = 0; j < t; ++j)
      acc -= static_cast<long double>(A(i, j)) * static_cast<long double>(x(j));
    residual(i) = static_cast<double>(acc);
  }
  x += lu.solve(residual);
  return x(start - 2);
}

// Mean first-passage time in continuous time from the median start price:
// chain steps are trades, which arrive at rate 2*lambda in the low-traffic
// limit, so the discrete mean is scaled by 1/(2*lambda).
inline double mean_fpt_continuous(const ModelParams& params) {
  const TransitionMatrix m = transition_matrix(params);
  const double steps = mean_fpt_discrete(m, params.median_price());
  return steps / (2.0 * params.limit_rate);
}

}  // namespace cda

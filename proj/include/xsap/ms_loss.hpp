#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "xsap/matrix.hpp"
#include "xsap/mining.hpp"

namespace xsap {

namespace detail {

// log(1 + sum_j e^{x_j}), factored around m = max(0, max x_j) so nothing
// overflows even at beta-scale exponents.
inline double log1p_sum_exp(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double m = 0.0;
  for (const double x : xs) m = std::max(m, x);
  double s = std::exp(-m);
  for (const double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace detail

// Multi-Similarity loss over a batch of size N with per-anchor pair sets:
//
//   L = (1/N) sum_i [ (1/alpha) log(1 + sum_{n in N_i} e^{ alpha (S_in - eps)})
//                   + (1/beta)  log(1 + sum_{p in P_i} e^{-beta  (S_ip - eps)}) ]
//
// Anchors with empty sets contribute log(1) = 0 but still divide by N.
inline double ms_loss(const Matrix& s, const PairSets& pairs, double alpha,
                      double beta, double epsilon) {
  if (alpha <= 0 || beta <= 0)
    throw std::runtime_error("ms_loss: alpha and beta must be > 0");
  const std::size_t n = pairs.size();
  if (s.rows != n || s.cols != n)
    throw std::runtime_error("ms_loss: pair sets do not match matrix size");
  if (n == 0) return 0.0;

  double total = 0.0;
  std::vector<double> xs;
  for (std::size_t i = 0; i < n; ++i) {
    xs.clear();
    for (const auto j : pairs.negatives[i])
      xs.push_back(alpha * (s.at(i, j) - epsilon));
    total += detail::log1p_sum_exp(xs) / alpha;
    xs.clear();
    for (const auto j : pairs.positives[i])
      xs.push_back(-beta * (s.at(i, j) - epsilon));
    total += detail::log1p_sum_exp(xs) / beta;
  }
  const double loss = total / static_cast<double>(n);
  if (!std::isfinite(loss))
    throw std::runtime_error("ms_loss: non-finite loss");
  return loss;
}

// dL/dS. Nonzero only at pair positions:
//   dL/dS_in =  (1/N) e^{ alpha (S_in - eps)} / (1 + sum_{n'} e^{ alpha (S_in' - eps)})
//   dL/dS_ip = -(1/N) e^{-beta  (S_ip - eps)} / (1 + sum_{p'} e^{-beta  (S_ip' - eps)})
// Each ratio is evaluated with the shared max factored out, so saturated
// exponents stay exact instead of overflowing.
inline Matrix ms_loss_grad(const Matrix& s, const PairSets& pairs, double alpha,
                           double beta, double epsilon) {
  if (alpha <= 0 || beta <= 0)
    throw std::runtime_error("ms_loss_grad: alpha and beta must be > 0");
  const std::size_t n = pairs.size();
  if (s.rows != n || s.cols != n)
    throw std::runtime_error("ms_loss_grad: pair sets do not match matrix size");
  Matrix grad(n, n);
  if (n == 0) return grad;
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> xs;
  const auto fill = [&](std::size_t i, const std::vector<std::uint32_t>& set,
                        double sign) {
    if (set.empty()) return;
    double m = 0.0;
    for (const double x : xs) m = std::max(m, x);
    double denom = std::exp(-m);
    for (const double x : xs) denom += std::exp(x - m);
    for (std::size_t k = 0; k < set.size(); ++k) {
      const double g = sign * inv_n * std::exp(xs[k] - m) / denom;
      if (!std::isfinite(g))
        throw std::runtime_error("ms_loss_grad: non-finite gradient entry");
      grad.at(i, set[k]) = g;
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    xs.clear();
    for (const auto j : pairs.negatives[i])
      xs.push_back(alpha * (s.at(i, j) - epsilon));
    fill(i, pairs.negatives[i], +1.0);
    xs.clear();
    for (const auto j : pairs.positives[i])
      xs.push_back(-beta * (s.at(i, j) - epsilon));
    fill(i, pairs.positives[i], -1.0);
  }
  return grad;
}

}  // namespace xsap

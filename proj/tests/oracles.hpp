#pragma once

// Reference implementations used only by the tests. They are deliberately
// naive so that they share no code path with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <vector>

#include "erepi/network.hpp"

namespace oracle {

using erepi::node_t;

// Plain adjacency matrix built from the edge list.
inline std::vector<std::vector<bool>> matrix(const erepi::Network& net) {
  std::vector<std::vector<bool>> a(net.size(), std::vector<bool>(net.size(), false));
  for (auto [i, j] : net.edges()) a[i][j] = a[j][i] = true;
  return a;
}

// Nodes reachable from any node in `from`, by breadth-first search.
inline std::vector<bool> reachable(const erepi::Network& net, const std::vector<node_t>& from) {
  const auto a = matrix(net);
  std::vector<bool> seen(net.size(), false);
  std::queue<node_t> q;
  for (auto s : from)
    if (!seen[s]) seen[s] = true, q.push(s);
  while (!q.empty()) {
    const node_t u = q.front();
    q.pop();
    for (node_t v = 0; v < net.size(); ++v)
      if (a[u][v] && !seen[v]) seen[v] = true, q.push(v);
  }
  return seen;
}

// Small random graph from std::mt19937 with independent Bernoulli pairs.
inline erepi::Network small_random(std::mt19937& gen, node_t max_n = 20) {
  std::uniform_int_distribution<node_t> nd(1, max_n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const node_t n = nd(gen);
  const double p = u(gen) * 0.4;
  std::vector<erepi::Edge> edges;
  for (node_t i = 0; i < n; ++i)
    for (node_t j = i + 1; j < n; ++j)
      if (u(gen) < p) edges.emplace_back(i, j);
  return erepi::Network(n, edges);
}

// Root of S = 1 - exp(-k S) in (0, 1] by bisection.
inline double giant_fraction_bisect(double k) {
  if (k <= 1.0) return 0.0;
  double lo = 1e-12, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - 1.0 + std::exp(-k * mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Composite Simpson rule.
template <class F>
double simpson(F f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Logistic Z(t) sampled at integer t, rounded to counts. Large populations
// keep the rounding far below the 1e-9 scale.
inline std::vector<std::size_t> logistic_counts(double pop, double z0, double beta, int steps) {
  std::vector<std::size_t> z;
  for (int t = 0; t <= steps; ++t) {
    const double v = pop * z0 / (z0 + (pop - z0) * std::exp(-beta * t));
    z.push_back(static_cast<std::size_t>(std::llround(v)));
  }
  return z;
}

}  // namespace oracle

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "erepi/error.hpp"
#include "erepi/format.hpp"
#include "erepi/rng.hpp"

namespace erepi {

using node_t = std::uint32_t;
using Edge = std::pair<node_t, node_t>;

enum class GenMode { Gnp, Gnl };

// How a network was drawn: G(n, p) uses `p`, G(n, L) uses `links`.
struct GenParams {
  GenMode mode = GenMode::Gnp;
  double p = 0.0;
  std::uint64_t links = 0;

  static GenParams gnp(double p) { return {GenMode::Gnp, p, 0}; }
  static GenParams gnl(std::uint64_t links) { return {GenMode::Gnl, 0.0, links}; }
};

constexpr std::uint64_t pair_count(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Immutable simple undirected graph in compressed adjacency form.
///
/// Neighbour lists are sorted. Construction rejects self-loops, duplicate
/// edges and out-of-range endpoints, so every Network satisfies adjacency
/// symmetry and sum(degree) == 2 * edge_count().
class Network {
 public:
  Network(node_t n, std::span<const Edge> edges, GenParams params = {}, std::uint64_t seed = 0)
      : n_(n), params_(params), seed_(seed) {
    require(n >= 1, ErrorKind::InvalidParameter, "network needs at least one node");
    offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (auto [a, b] : edges) {
      require(a < n && b < n, ErrorKind::InvalidParameter, "edge endpoint out of range");
      require(a != b, ErrorKind::InvalidParameter, "self-loop on node " + std::to_string(a));
      ++offsets_[a + 1];
      ++offsets_[b + 1];
    }
    for (node_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    adjacency_.resize(offsets_[n]);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (auto [a, b] : edges) {
      adjacency_[cursor[a]++] = b;
      adjacency_[cursor[b]++] = a;
    }
    for (node_t i = 0; i < n; ++i) {
      auto first = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
      auto last = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
      if (!std::is_sorted(first, last)) std::sort(first, last);
      require(std::adjacent_find(first, last) == last, ErrorKind::InvalidParameter,
              "duplicate edge at node " + std::to_string(i));
    }
  }

  node_t size() const { return n_; }
  std::size_t edge_count() const { return adjacency_.size() / 2; }
  std::size_t degree(node_t i) const { return offsets_[i + 1] - offsets_[i]; }

  std::span<const node_t> neighbours(node_t i) const {
    return {adjacency_.data() + offsets_[i], degree(i)};
  }

  bool has_edge(node_t a, node_t b) const {
    auto nb = neighbours(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  const GenParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  // Visits each edge once as (i, j) with i < j, in lexicographic order.
  template <class F>
  void for_each_edge(F&& f) const {
    for (node_t i = 0; i < n_; ++i)
      for (node_t j : neighbours(i))
        if (i < j) f(i, j);
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for_each_edge([&](node_t i, node_t j) { out.emplace_back(i, j); });
    return out;
  }

 private:
  node_t n_;
  std::vector<std::size_t> offsets_;
  std::vector<node_t> adjacency_;
  GenParams params_;
  std::uint64_t seed_;
};

namespace detail {

// Inverse of idx = v * (v - 1) / 2 + w with 0 <= w < v.
inline Edge decode_pair(std::uint64_t idx) {
  auto v = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(idx))) / 2.0);
  while (v * (v - 1) / 2 > idx) --v;
  while ((v + 1) * v / 2 <= idx) ++v;
  const std::uint64_t w = idx - v * (v - 1) / 2;
  return {static_cast<node_t>(w), static_cast<node_t>(v)};
}

// Batagelj-Brandes geometric skipping over the pair sequence
// (1,0), (2,0), (2,1), (3,0), ...; expected O(n + |E|) time.
inline std::vector<Edge> sample_gnp(node_t n, double p, Rng& rng) {
  std::vector<Edge> edges;
  if (p <= 0.0 || n < 2) return edges;
  edges.reserve(static_cast<std::size_t>(p * static_cast<double>(pair_count(n)) * 1.05) + 16);
  if (p >= 1.0) {
    for (node_t v = 1; v < n; ++v)
      for (node_t w = 0; w < v; ++w) edges.emplace_back(w, v);
    return edges;
  }
  const double log_q = std::log1p(-p);
  const auto limit = static_cast<double>(pair_count(n));
  std::int64_t v = 1;
  std::int64_t w = -1;
  const auto nn = static_cast<std::int64_t>(n);
  while (v < nn) {
    const double skip = std::floor(std::log1p(-rng.uniform()) / log_q);
    if (skip >= limit) break;
    w += 1 + static_cast<std::int64_t>(skip);
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn) edges.emplace_back(static_cast<node_t>(w), static_cast<node_t>(v));
  }
  return edges;
}

// Exactly `links` distinct pairs, uniformly without replacement (Floyd's
// algorithm over pair indices; the complement is sampled when denser).
inline std::vector<Edge> sample_gnl(node_t n, std::uint64_t links, Rng& rng) {
  const std::uint64_t total = pair_count(n);
  const bool complement = links > total / 2;
  const std::uint64_t draw = complement ? total - links : links;
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(draw) * 2);
  for (std::uint64_t j = total - draw; j < total; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> picked;
  if (complement) {
    picked.reserve(static_cast<std::size_t>(links));
    for (std::uint64_t idx = 0; idx < total; ++idx)
      if (!chosen.contains(idx)) picked.push_back(idx);
  } else {
    picked.assign(chosen.begin(), chosen.end());
    std::sort(picked.begin(), picked.end());
  }
  std::vector<Edge> edges;
  edges.reserve(picked.size());
  for (std::uint64_t idx : picked) edges.push_back(decode_pair(idx));
  return edges;
}

}  // namespace detail

/// Draws an Erdos-Renyi network. The same (n, params, seed) always yields the
/// same edge set.
inline Network generate(node_t n, const GenParams& params, std::uint64_t seed) {
  require(n >= 1, ErrorKind::InvalidParameter, "n must be >= 1");
  Rng rng(seed, Stream::Network);
  std::vector<Edge> edges;
  if (params.mode == GenMode::Gnp) {
    require(params.p >= 0.0 && params.p <= 1.0, ErrorKind::InvalidParameter,
            "p must lie in [0, 1], got " + format_double(params.p));
    edges = detail::sample_gnp(n, params.p, rng);
  } else {
    require(params.links <= pair_count(n), ErrorKind::InvalidParameter,
            "L = " + std::to_string(params.links) + " exceeds n(n-1)/2 = " +
                std::to_string(pair_count(n)));
    edges = detail::sample_gnl(n, params.links, rng);
  }
  return Network(n, edges, params, seed);
}

inline Network generate_gnp(node_t n, double p, std::uint64_t seed) {
  return generate(n, GenParams::gnp(p), seed);
}

struct DegreeStats {
  std::vector<std::size_t> histogram;  // histogram[k] = number of nodes of degree k
  double mean = 0.0;
  double variance = 0.0;  // sample variance, n - 1 denominator
};

inline DegreeStats degree_stats(const Network& net) {
  DegreeStats s;
  const node_t n = net.size();
  std::size_t max_degree = 0;
  for (node_t i = 0; i < n; ++i) max_degree = std::max(max_degree, net.degree(i));
  s.histogram.assign(max_degree + 1, 0);
  for (node_t i = 0; i < n; ++i) ++s.histogram[net.degree(i)];
  s.mean = 2.0 * static_cast<double>(net.edge_count()) / n;
  if (n > 1) {
    double ss = 0.0;
    for (node_t i = 0; i < n; ++i) {
      const double d = static_cast<double>(net.degree(i)) - s.mean;
      ss += d * d;
    }
    s.variance = ss / (n - 1);
  }
  return s;
}

struct Thresholds {
  double p1 = 0.0;  // 1/(n-1): onset of giant-component growth
  double p2 = 0.0;  // ln(n)/n: giant component spans the network
};

inline Thresholds thresholds(std::uint64_t n) {
  require(n >= 3, ErrorKind::InvalidParameter, "thresholds need n >= 3");
  const auto nd = static_cast<double>(n);
  return {1.0 / (nd - 1.0), std::log(nd) / nd};
}

/// Largest root of S = 1 - exp(-k S): expected giant-component fraction of a
/// sparse ER graph with mean degree k.
inline double giant_fraction_theory(double k) {
  require(k >= 0.0, ErrorKind::InvalidParameter, "mean degree must be >= 0");
  if (k <= 1.0) return 0.0;
  double s = 1.0;
  for (int it = 0; it < 100000000; ++it) {
    const double next = 1.0 - std::exp(-k * s);
    if (std::abs(next - s) < 1e-12) return next;
    s = next;
  }
  return s;
}

// ---- edge-list text format -------------------------------------------------
//
//   n=<n> seed=<seed> mode=<GNP|GNL> param=<p or L>
//   i j
//   ...

inline void write_edge_list(std::ostream& os, const Network& net) {
  const auto& gp = net.params();
  os << "n=" << net.size() << " seed=" << net.seed()
     << " mode=" << (gp.mode == GenMode::Gnp ? "GNP" : "GNL")
     << " param=" << (gp.mode == GenMode::Gnp ? format_double(gp.p) : std::to_string(gp.links))
     << '\n';
  net.for_each_edge([&](node_t i, node_t j) { os << i << ' ' << j << '\n'; });
}

inline Network read_edge_list(std::istream& is) {
  std::string header;
  require(static_cast<bool>(std::getline(is, header)), ErrorKind::Format, "missing header line");
  std::istringstream hs(header);
  std::string field;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  GenParams gp;
  std::string param;
  bool have_n = false;
  while (hs >> field) {
    const auto eq = field.find('=');
    require(eq != std::string::npos, ErrorKind::Format, "bad header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "n") {
      n = parse_u64(value);
      have_n = true;
    } else if (key == "seed") {
      seed = parse_u64(value);
    } else if (key == "mode") {
      require(value == "GNP" || value == "GNL", ErrorKind::Format, "unknown mode '" + value + "'");
      gp.mode = value == "GNP" ? GenMode::Gnp : GenMode::Gnl;
    } else if (key == "param") {
      param = value;
    } else {
      throw Error(ErrorKind::Format, "unknown header key '" + key + "'");
    }
  }
  require(have_n && n >= 1 && n <= UINT32_MAX, ErrorKind::Format, "header lacks a valid n");
  if (!param.empty()) {
    if (gp.mode == GenMode::Gnp)
      gp.p = parse_double(param);
    else
      gp.links = parse_u64(param);
  }
  std::vector<Edge> edges;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  while (is >> a >> b) {
    require(a < n && b < n, ErrorKind::Format, "edge endpoint out of range");
    edges.emplace_back(static_cast<node_t>(a), static_cast<node_t>(b));
  }
  require(is.eof(), ErrorKind::Format, "malformed edge line");
  return Network(static_cast<node_t>(n), edges, gp, seed);
}

}  // namespace erepi

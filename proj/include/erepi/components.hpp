#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "erepi/error.hpp"
#include "erepi/network.hpp"

namespace erepi {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), node_t{0});
  }

  node_t find(node_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(node_t a, node_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<node_t> parent_;
  std::vector<std::size_t> size_;
};

/// Partition of the nodes into maximal connected subgraphs.
///
/// Labels are canonical: components are numbered in order of their smallest
/// node, so any traversal order produces the same labelling.
struct ComponentDecomposition {
  std::vector<std::uint32_t> label;  // per node
  std::vector<std::size_t> sizes;    // per label
  std::uint32_t largest_label = 0;   // lowest label among the largest components

  std::size_t count() const { return sizes.size(); }                 // m
  std::size_t largest_size() const { return sizes[largest_label]; }  // N_G

  // S: number of distinct component sizes.
  std::size_t distinct_sizes() const {
    std::vector<std::size_t> s = sizes;
    std::sort(s.begin(), s.end());
    return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
  }

  std::vector<node_t> members(std::uint32_t which) const {
    std::vector<node_t> out;
    out.reserve(sizes.at(which));
    for (node_t i = 0; i < label.size(); ++i)
      if (label[i] == which) out.push_back(i);
    return out;
  }

  std::vector<node_t> largest_members() const { return members(largest_label); }
};

inline ComponentDecomposition components(const Network& net) {
  const node_t n = net.size();
  DisjointSets sets(n);
  net.for_each_edge([&](node_t i, node_t j) { sets.unite(i, j); });

  constexpr auto unset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> root_label(n, unset);
  ComponentDecomposition cd;
  cd.label.resize(n);
  for (node_t i = 0; i < n; ++i) {
    const node_t r = sets.find(i);
    if (root_label[r] == unset) {
      root_label[r] = static_cast<std::uint32_t>(cd.sizes.size());
      cd.sizes.push_back(0);
    }
    cd.label[i] = root_label[r];
    ++cd.sizes[root_label[r]];
  }
  cd.largest_label = static_cast<std::uint32_t>(
      std::max_element(cd.sizes.begin(), cd.sizes.end()) - cd.sizes.begin());
  return cd;
}

}  // namespace erepi

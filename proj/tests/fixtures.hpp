// Copyright 2026 The pbtsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <deque>
#include <random>
#include <vector>

#include "pbt/pbt.hpp"

namespace pbt::testing {

inline Credit cr(double x) { return Credit::from_micros(static_cast<std::int64_t>(x * 1e6 + (x >= 0 ? 0.5 : -0.5))); }
inline NodeId nd(std::uint32_t v) { return NodeId{v}; }

// Sets both directions of a pair.
inline void both(CreditGraph& g, std::uint32_t a, std::uint32_t b, double ab, double ba) {
  g.set_link(nd(a), nd(b), cr(ab));
  g.set_link(nd(b), nd(a), cr(ba));
}
inline void both(CreditGraph& g, std::uint32_t a, std::uint32_t b, double w) { both(g, a, b, w, w); }

// Random tree over n nodes: node i > 0 picks a uniform parent below it.
inline CreditGraph random_tree(std::size_t n, Rng& rng, double w = 10.0) {
  CreditGraph g(n);
  for (std::uint32_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::uint32_t> p(0, i - 1);
    both(g, p(rng), i, w);
  }
  return g;
}

// Random tree plus `extra` shortcut pairs, weights uniform in [lo, hi]
// per direction.
inline CreditGraph random_connected(std::size_t n, std::size_t extra, Rng& rng, double lo = 1.0, double hi = 20.0) {
  CreditGraph g(n);
  std::uniform_real_distribution<double> w(lo, hi);
  for (std::uint32_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::uint32_t> p(0, i - 1);
    both(g, p(rng), i, w(rng), w(rng));
  }
  std::uniform_int_distribution<std::uint32_t> any(0, static_cast<std::uint32_t>(n - 1));
  for (std::size_t k = 0; k < extra; ++k) {
    const std::uint32_t a = any(rng), b = any(rng);
    if (a != b) both(g, a, b, w(rng), w(rng));
  }
  return g;
}

// Hop distances from s over every live link (undirected).
inline std::vector<int> bfs_hops(const CreditGraph& g, NodeId s, bool bidirectional_only = false) {
  std::vector<int> d(g.node_count(), -1);
  std::deque<NodeId> q{s};
  d[s.index()] = 0;
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop_front();
    for (NodeId u : g.neighbors(v)) {
      if (d[u.index()] >= 0) continue;
      if (bidirectional_only && !g.is_bidirectional(v, u)) continue;
      d[u.index()] = d[v.index()] + 1;
      q.push_back(u);
    }
  }
  return d;
}

// Hop distance inside the tree given by parent pointers.
inline int tree_hops(const Embedding& e, NodeId a, NodeId b) {
  std::vector<NodeId> up_a{a}, up_b{b};
  while (up_a.back() != e.landmark()) up_a.push_back(*e.parent(up_a.back()));
  while (up_b.back() != e.landmark()) up_b.push_back(*e.parent(up_b.back()));
  while (up_a.size() > 1 && up_b.size() > 1 && up_a[up_a.size() - 2] == up_b[up_b.size() - 2]) {
    up_a.pop_back();
    up_b.pop_back();
  }
  return static_cast<int>(up_a.size() + up_b.size()) - 2;
}

inline Credit sum_net_balance(const CreditGraph& g) {
  Credit s;
  for (std::size_t v = 0; v < g.node_count(); ++v) s += g.net_balance(node(v));
  return s;
}

}  // namespace pbt::testing

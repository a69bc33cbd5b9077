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

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pbt/credit.hpp"
#include "pbt/errors.hpp"

namespace pbt {

using Rng = std::mt19937_64;

struct NodeId {
  std::uint32_t value = 0;

  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

constexpr NodeId node(std::size_t index) { return NodeId{static_cast<std::uint32_t>(index)}; }

// A directed link u -> v: u can transfer funds to v.
struct Link {
  NodeId from;
  NodeId to;
  friend constexpr bool operator==(Link, Link) = default;
};

struct LinkState {
  Credit weight;
  Credit reserved;

  // Guaranteed available credit: funds not promised to an outstanding probe.
  Credit available() const { return weight - reserved; }
  friend bool operator==(const LinkState&, const LinkState&) = default;
};

struct LinkDelta {
  NodeId u;
  NodeId v;
  Credit old_weight;
  Credit new_weight;
  friend bool operator==(const LinkDelta&, const LinkDelta&) = default;
};

enum class ReserveStatus { ok, insufficient };

// Directed credit graph over dense node ids 0..N-1.
//
// A directed link exists exactly while its weight is positive; setting a
// weight to zero removes it, so a node pair with zero funds in both
// directions never persists. neighbors() lists the pairs with at least one
// live direction in ascending id order.
class CreditGraph {
 public:
  CreditGraph() = default;
  explicit CreditGraph(std::size_t node_count) : neighbors_(node_count) {}

  std::size_t node_count() const { return neighbors_.size(); }
  bool contains(NodeId v) const { return v.index() < neighbors_.size(); }

  NodeId add_node() {
    neighbors_.emplace_back();
    return node(neighbors_.size() - 1);
  }

  LinkDelta set_link(NodeId u, NodeId v, Credit c) {
    check_pair(u, v);
    if (c.is_negative()) throw InvalidInput("negative link weight");
    const std::uint64_t k = key(u, v);
    auto it = links_.find(k);
    const Credit old = it == links_.end() ? Credit{} : it->second.weight;
    if (c.is_zero()) {
      if (it != links_.end()) {
        links_.erase(it);
        if (!links_.contains(key(v, u))) unlink_neighbors(u, v);
      }
    } else if (it == links_.end()) {
      if (!links_.contains(key(v, u))) link_neighbors(u, v);
      links_.emplace(k, LinkState{c, Credit{}});
    } else {
      it->second.weight = c;
      it->second.reserved = std::min(it->second.reserved, c);
    }
    return {u, v, old, c};
  }

  Credit weight(NodeId u, NodeId v) const {
    auto it = links_.find(key(u, v));
    return it == links_.end() ? Credit{} : it->second.weight;
  }
  Credit reserved(NodeId u, NodeId v) const {
    auto it = links_.find(key(u, v));
    return it == links_.end() ? Credit{} : it->second.reserved;
  }
  Credit available(NodeId u, NodeId v) const {
    auto it = links_.find(key(u, v));
    return it == links_.end() ? Credit{} : it->second.available();
  }
  bool has_link(NodeId u, NodeId v) const { return links_.contains(key(u, v)); }
  bool is_bidirectional(NodeId u, NodeId v) const { return has_link(u, v) && has_link(v, u); }

  ReserveStatus reserve(NodeId u, NodeId v, Credit c) {
    if (c.is_negative()) throw InvalidInput("negative reservation");
    if (c.is_zero()) return ReserveStatus::ok;
    auto it = links_.find(key(u, v));
    if (it == links_.end() || it->second.available() < c) return ReserveStatus::insufficient;
    it->second.reserved += c;
    return ReserveStatus::ok;
  }

  void release(NodeId u, NodeId v, Credit c) {
    if (c.is_zero()) return;
    auto it = links_.find(key(u, v));
    if (it == links_.end() || it->second.reserved < c || c.is_negative()) {
      throw InternalError("release of " + c.to_string() + " exceeds reservation on link " +
                          std::to_string(u.value) + "->" + std::to_string(v.value));
    }
    it->second.reserved -= c;
  }

  // Settles c along a path whose links all hold a reservation of at least c.
  // Returns the net weight change of every touched directed link, in order
  // of first touch; links whose weight ends where it started are omitted.
  std::vector<LinkDelta> commit_payment(std::span<const Link> path, Credit c) {
    if (c.is_zero() || path.empty()) return {};
    std::unordered_map<std::uint64_t, Credit> need;
    for (const Link& e : path) {
      check_pair(e.from, e.to);
      Credit& n = need[key(e.from, e.to)];
      n += c;
      if (reserved(e.from, e.to) < n) {
        throw InternalError("commit without reservation on link " + std::to_string(e.from.value) +
                            "->" + std::to_string(e.to.value));
      }
    }
    std::vector<Link> touched;
    std::vector<Credit> before;
    auto touch = [&](NodeId a, NodeId b) {
      for (const Link& t : touched) {
        if (t.from == a && t.to == b) return;
      }
      touched.push_back({a, b});
      before.push_back(weight(a, b));
    };
    for (const Link& e : path) {
      touch(e.from, e.to);
      touch(e.to, e.from);
      LinkState& fwd = links_.at(key(e.from, e.to));
      fwd.reserved -= c;
      const Credit reverse = weight(e.to, e.from);
      set_link(e.from, e.to, fwd.weight - c);
      set_link(e.to, e.from, reverse + c);
    }
    std::vector<LinkDelta> out;
    for (std::size_t i = 0; i < touched.size(); ++i) {
      Credit now = weight(touched[i].from, touched[i].to);
      if (now != before[i]) out.push_back({touched[i].from, touched[i].to, before[i], now});
    }
    return out;
  }

  // cnode(v): incoming funds minus outgoing funds.
  Credit net_balance(NodeId v) const {
    if (!contains(v)) throw NotFound("unknown node " + std::to_string(v.value));
    Credit total;
    for (NodeId u : neighbors_[v.index()]) {
      total += weight(u, v);
      total -= weight(v, u);
    }
    return total;
  }

  std::span<const NodeId> neighbors(NodeId v) const { return neighbors_.at(v.index()); }
  std::size_t degree(NodeId v) const { return neighbors_.at(v.index()).size(); }

  std::vector<NodeId> out_neighbors(NodeId v) const {
    std::vector<NodeId> out;
    for (NodeId u : neighbors(v)) {
      if (has_link(v, u)) out.push_back(u);
    }
    return out;
  }
  std::vector<NodeId> in_neighbors(NodeId v) const {
    std::vector<NodeId> out;
    for (NodeId u : neighbors(v)) {
      if (has_link(u, v)) out.push_back(u);
    }
    return out;
  }

  // Number of neighbors with positive funds in both directions.
  std::size_t bidirectional_degree(NodeId v) const {
    std::size_t n = 0;
    for (NodeId u : neighbors(v)) n += is_bidirectional(u, v) ? 1 : 0;
    return n;
  }

  // Unordered node pairs with at least one live direction.
  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (const auto& adj : neighbors_) twice += adj.size();
    return twice / 2;
  }
  std::size_t directed_link_count() const { return links_.size(); }

  Credit total_reserved() const {
    Credit total;
    for (const auto& [k, s] : links_) total += s.reserved;
    return total;
  }

  // Visits live directed links in ascending (from, to) order.
  template <typename F>
  void for_each_link(F&& f) const {
    for (std::size_t u = 0; u < neighbors_.size(); ++u) {
      for (NodeId v : neighbors_[u]) {
        auto it = links_.find(key(node(u), v));
        if (it != links_.end()) f(Link{node(u), v}, it->second);
      }
    }
  }

  friend bool operator==(const CreditGraph& a, const CreditGraph& b) {
    return a.neighbors_ == b.neighbors_ && a.links_ == b.links_;
  }

 private:
  static std::uint64_t key(NodeId u, NodeId v) {
    return (static_cast<std::uint64_t>(u.value) << 32) | v.value;
  }

  void check_pair(NodeId u, NodeId v) const {
    if (u == v) throw InvalidInput("self-link on node " + std::to_string(u.value));
    if (!contains(u) || !contains(v)) {
      throw NotFound("link " + std::to_string(u.value) + "->" + std::to_string(v.value) +
                     " references an unknown node");
    }
  }

  void link_neighbors(NodeId u, NodeId v) {
    auto insert = [](std::vector<NodeId>& adj, NodeId x) {
      adj.insert(std::lower_bound(adj.begin(), adj.end(), x), x);
    };
    insert(neighbors_[u.index()], v);
    insert(neighbors_[v.index()], u);
  }
  void unlink_neighbors(NodeId u, NodeId v) {
    auto erase = [](std::vector<NodeId>& adj, NodeId x) {
      adj.erase(std::lower_bound(adj.begin(), adj.end(), x));
    };
    erase(neighbors_[u.index()], v);
    erase(neighbors_[v.index()], u);
  }

  std::vector<std::vector<NodeId>> neighbors_;
  std::unordered_map<std::uint64_t, LinkState> links_;
};

inline std::vector<Link> links_of(std::span<const NodeId> nodes) {
  std::vector<Link> out;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) out.push_back({nodes[i], nodes[i + 1]});
  return out;
}

enum class LandmarkMode { highest_degree, random };

// Highest-degree mode ranks by bidirectional degree, ties by ascending id.
inline std::vector<NodeId> select_landmarks(const CreditGraph& g, std::size_t k, LandmarkMode mode,
                                            Rng& rng) {
  if (k > g.node_count()) {
    throw InvalidConfig("cannot select " + std::to_string(k) + " landmarks from " +
                        std::to_string(g.node_count()) + " nodes");
  }
  std::vector<NodeId> ids(g.node_count());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = node(i);
  if (mode == LandmarkMode::highest_degree) {
    std::vector<std::size_t> deg(ids.size());
    for (NodeId v : ids) deg[v.index()] = g.bidirectional_degree(v);
    std::stable_sort(ids.begin(), ids.end(),
                     [&](NodeId a, NodeId b) { return deg[a.index()] > deg[b.index()]; });
  } else {
    std::shuffle(ids.begin(), ids.end(), rng);
  }
  ids.resize(k);
  return ids;
}

// Weakly connected component label per node; labels are assigned in order
// of each component's smallest node id.
inline std::vector<std::size_t> weak_components(const CreditGraph& g) {
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(g.node_count(), unset);
  std::size_t next = 0;
  std::vector<NodeId> stack;
  for (std::size_t s = 0; s < g.node_count(); ++s) {
    if (label[s] != unset) continue;
    label[s] = next;
    stack.push_back(node(s));
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (NodeId u : g.neighbors(v)) {
        if (label[u.index()] == unset) {
          label[u.index()] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  return label;
}

// Node ids of the largest weak component; ties go to the component holding
// the smallest id.
inline std::vector<NodeId> giant_component_nodes(const CreditGraph& g) {
  std::vector<std::size_t> label = weak_components(g);
  if (label.empty()) return {};
  std::vector<std::size_t> size(*std::max_element(label.begin(), label.end()) + 1, 0);
  for (std::size_t l : label) ++size[l];
  const std::size_t best = static_cast<std::size_t>(
      std::max_element(size.begin(), size.end()) - size.begin());
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < label.size(); ++v) {
    if (label[v] == best) out.push_back(node(v));
  }
  return out;
}

struct Subgraph {
  CreditGraph graph;
  std::vector<NodeId> original;  // original id of each dense id
};

inline Subgraph giant_component(const CreditGraph& g) {
  Subgraph out;
  out.original = giant_component_nodes(g);
  out.graph = CreditGraph(out.original.size());
  std::vector<std::int64_t> remap(g.node_count(), -1);
  for (std::size_t i = 0; i < out.original.size(); ++i) {
    remap[out.original[i].index()] = static_cast<std::int64_t>(i);
  }
  g.for_each_link([&](Link e, const LinkState& s) {
    if (remap[e.from.index()] >= 0 && remap[e.to.index()] >= 0) {
      out.graph.set_link(node(static_cast<std::size_t>(remap[e.from.index()])),
                         node(static_cast<std::size_t>(remap[e.to.index()])), s.weight);
    }
  });
  return out;
}

}  // namespace pbt

template <>
struct std::hash<pbt::NodeId> {
  std::size_t operator()(pbt::NodeId v) const noexcept { return std::hash<std::uint32_t>{}(v.value); }
};

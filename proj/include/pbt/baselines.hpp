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
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pbt/embedding.hpp"
#include "pbt/graph.hpp"
#include "pbt/routing.hpp"

namespace pbt {

using TreePath = std::optional<std::vector<NodeId>>;

namespace detail {

inline std::vector<NodeId> chain_up(const Embedding& e, NodeId from, std::size_t steps) {
  std::vector<NodeId> out{from};
  for (std::size_t i = 0; i < steps; ++i) out.push_back(*e.parent(out.back()));
  return out;
}

inline std::vector<NodeId> join_at_top(std::vector<NodeId> up, const std::vector<NodeId>& down_rev) {
  for (auto it = down_rev.rbegin() + 1; it != down_rev.rend(); ++it) up.push_back(*it);
  return up;
}

}  // namespace detail

// Sender's parent chain up to the landmark, then the landmark's chain down
// to the receiver. Length is depth(src) + depth(dst).
inline std::vector<TreePath> landmark_paths(std::span<const Embedding> embeddings, NodeId src, NodeId dst) {
  std::vector<TreePath> out;
  for (const Embedding& e : embeddings) {
    if (!e.attached(src) || !e.attached(dst)) {
      out.emplace_back();
      continue;
    }
    out.emplace_back(detail::join_at_top(detail::chain_up(e, src, e.depth(src)),
                                         detail::chain_up(e, dst, e.depth(dst))));
  }
  return out;
}

// Unique tree path through the lowest common ancestor.
inline std::vector<TreePath> tree_only_paths(std::span<const Embedding> embeddings, NodeId src, NodeId dst) {
  std::vector<TreePath> out;
  for (const Embedding& e : embeddings) {
    if (!e.attached(src) || !e.attached(dst)) {
      out.emplace_back();
      continue;
    }
    const std::size_t cpl = common_prefix_length(e.coord(src), e.coord(dst));
    out.emplace_back(detail::join_at_top(detail::chain_up(e, src, e.depth(src) - cpl),
                                         detail::chain_up(e, dst, e.depth(dst) - cpl)));
  }
  return out;
}

// Minimum guaranteed available credit along a path; zero for a missing path.
inline Credit path_capacity(const CreditGraph& g, const TreePath& path) {
  if (!path || path->size() < 2) return Credit{};
  Credit z = Credit::max();
  for (const Link& e : links_of(*path)) z = std::min(z, g.available(e.from, e.to));
  return z;
}

// Assignment with per-path minima z_i: a random split of c, then repeated
// random re-assignment of every excess over z_i to paths that still have
// room, until no path exceeds its minimum. nullopt when sum z_i < c or the
// loop bound of 10 * paths iterations is hit.
inline std::optional<std::vector<Credit>> mpc_min_assign(std::span<const Credit> minima, Credit c, Rng& rng) {
  if (minima.empty()) return std::nullopt;
  Credit sum;
  for (Credit z : minima) sum += z;
  if (sum < c) return std::nullopt;
  std::vector<Credit> shares = split_value(c, minima.size(), rng).shares;
  for (std::size_t iter = 0; iter < 10 * minima.size(); ++iter) {
    Credit excess;
    for (std::size_t i = 0; i < shares.size(); ++i) {
      if (shares[i] > minima[i]) {
        excess += shares[i] - minima[i];
        shares[i] = minima[i];
      }
    }
    if (excess.is_zero()) return shares;
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < shares.size(); ++i) {
      if (shares[i] < minima[i]) open.push_back(i);
    }
    if (open.empty()) throw InternalError("credit re-assignment lost track of the excess");
    ShareVector extra = split_value(excess, open.size(), rng);
    for (std::size_t j = 0; j < open.size(); ++j) shares[open[j]] += extra.shares[j];
  }
  return std::nullopt;
}

inline std::optional<std::vector<Credit>> mpc_min_assign(const CreditGraph& g, std::span<const TreePath> paths,
                                                         Credit c, Rng& rng) {
  std::vector<Credit> minima;
  for (const TreePath& p : paths) minima.push_back(path_capacity(g, p));
  return mpc_min_assign(minima, c, rng);
}

struct MessageCost {
  std::uint64_t messages = 0;
  std::uint64_t hop_delay = 0;
};

// Simulated multi-party computation of the path minima. Sender and receiver
// each send one message to every landmark along the tree, every landmark
// messages every other landmark along its own tree, and each landmark
// returns its result to the sender. nullopt when a message cannot be
// delivered because an endpoint or landmark is missing from a tree.
inline std::optional<MessageCost> mpc_cost(std::span<const Embedding> embeddings, NodeId src, NodeId dst) {
  MessageCost cost;
  std::uint64_t to_landmarks = 0, between = 0, back = 0;
  for (const Embedding& e : embeddings) {
    if (!e.attached(src) || !e.attached(dst)) return std::nullopt;
    const std::uint64_t ds = e.depth(src), dd = e.depth(dst);
    cost.messages += ds + dd + ds;
    to_landmarks = std::max({to_landmarks, ds, dd});
    back = std::max(back, ds);
    for (const Embedding& other : embeddings) {
      if (&other == &e) continue;
      if (!e.attached(other.landmark())) return std::nullopt;
      const std::uint64_t hop = e.depth(other.landmark());
      cost.messages += hop;
      between = std::max(between, hop);
    }
  }
  cost.hop_delay = to_landmarks + between + back;
  return cost;
}

struct FlowResult {
  Credit value;
  bool feasible = false;           // value reached the requested amount
  std::vector<PaymentPath> paths;  // decomposition of the flow
  std::uint64_t messages = 0;
  std::uint64_t hop_delay = 0;
};

// Ford-Fulkerson over guaranteed available credit with shortest augmenting
// paths, stopping once `target` is reached. Each residual arc a search
// inspects costs one message; the searches run one after another and every
// message waits for the previous one, so the hop delay equals the message
// count. Pass Credit::max() as target for the full max-flow value.
inline FlowResult max_flow(const CreditGraph& g, NodeId src, NodeId dst, Credit target) {
  FlowResult out;
  if (src == dst || !g.contains(src) || !g.contains(dst)) return out;
  auto key = [](NodeId a, NodeId b) { return (static_cast<std::uint64_t>(a.value) << 32) | b.value; };
  std::unordered_map<std::uint64_t, std::int64_t> flow;  // antisymmetric
  auto f = [&](NodeId a, NodeId b) {
    auto it = flow.find(key(a, b));
    return it == flow.end() ? std::int64_t{0} : it->second;
  };
  auto residual = [&](NodeId a, NodeId b) { return g.available(a, b).micros() - f(a, b); };

  const std::size_t n = g.node_count();
  constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> pred(n, none);
  std::vector<std::size_t> seen_at(n, 0);
  std::size_t round = 0;
  while (out.value < target) {
    ++round;
    std::deque<NodeId> queue{src};
    seen_at[src.index()] = round;
    bool found = false;
    while (!queue.empty() && !found) {
      NodeId v = queue.front();
      queue.pop_front();
      for (NodeId u : g.neighbors(v)) {
        ++out.messages;
        if (seen_at[u.index()] == round || residual(v, u) <= 0) continue;
        seen_at[u.index()] = round;
        pred[u.index()] = v.value;
        if (u == dst) {
          found = true;
          break;
        }
        queue.push_back(u);
      }
    }
    if (!found) break;
    std::int64_t push = target.micros() - out.value.micros();
    for (NodeId v = dst; v != src; v = NodeId{pred[v.index()]}) {
      push = std::min(push, residual(NodeId{pred[v.index()]}, v));
    }
    for (NodeId v = dst; v != src; v = NodeId{pred[v.index()]}) {
      const NodeId p{pred[v.index()]};
      flow[key(p, v)] += push;
      flow[key(v, p)] -= push;
    }
    out.value += Credit::from_micros(push);
  }
  out.feasible = out.value >= target;
  out.hop_delay = out.messages;

  // Path decomposition of the positive part of the flow; circulations that
  // do not reach dst are dropped.
  Credit left = out.value;
  while (left.is_positive()) {
    ++round;
    std::vector<NodeId> stack{src};
    std::vector<std::size_t> cursor{0};
    seen_at[src.index()] = round;
    while (!stack.empty() && stack.back() != dst) {
      const NodeId v = stack.back();
      auto adj = g.neighbors(v);
      std::size_t& i = cursor.back();
      while (i < adj.size() && (seen_at[adj[i].index()] == round || f(v, adj[i]) <= 0)) ++i;
      if (i == adj.size()) {
        stack.pop_back();
        cursor.pop_back();
        continue;
      }
      seen_at[adj[i].index()] = round;
      stack.push_back(adj[i]);
      cursor.push_back(0);
    }
    if (stack.empty()) break;
    std::int64_t amount = left.micros();
    for (std::size_t i = 0; i + 1 < stack.size(); ++i) amount = std::min(amount, f(stack[i], stack[i + 1]));
    for (std::size_t i = 0; i + 1 < stack.size(); ++i) {
      flow[key(stack[i], stack[i + 1])] -= amount;
      flow[key(stack[i + 1], stack[i])] += amount;
    }
    out.paths.push_back({stack, Credit::from_micros(amount)});
    left -= Credit::from_micros(amount);
  }
  return out;
}

}  // namespace pbt

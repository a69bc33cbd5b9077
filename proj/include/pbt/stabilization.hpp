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
#include <limits>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "pbt/embedding.hpp"
#include "pbt/graph.hpp"

namespace pbt {

struct StabilizationReport {
  std::size_t tree_index = 0;
  std::optional<NodeId> reset_root;
  std::size_t nodes_reassigned = 0;
  std::uint64_t messages = 0;
};

inline std::uint64_t total_messages(std::span<const StabilizationReport> reports) {
  std::uint64_t m = 0;
  for (const auto& r : reports) m += r.messages;
  return m;
}

// Picks a parent for an unattached node n. Candidates are attached neighbors
// whose coordinate does not extend n's previous coordinate. Bidirectional
// neighbors are preferred over unidirectional ones; within the preferred
// class the shallowest candidates tie and one is drawn uniformly.
inline std::optional<NodeId> choose_parent(const CreditGraph& g, const Embedding& e, NodeId n, Rng& rng) {
  const std::optional<Coordinate>& prev = e.previous(n);
  std::vector<NodeId> best;
  bool best_bidirectional = false;
  std::size_t best_depth = std::numeric_limits<std::size_t>::max();
  for (NodeId m : g.neighbors(n)) {
    if (!e.attached(m)) continue;
    if (prev && is_prefix(*prev, e.coord(m))) continue;
    const bool bi = g.is_bidirectional(n, m);
    if (bi && !best_bidirectional) {
      best.clear();
      best_bidirectional = true;
      best_depth = std::numeric_limits<std::size_t>::max();
    } else if (!bi && best_bidirectional) {
      continue;
    }
    const std::size_t d = e.depth(m);
    if (d < best_depth) {
      best.clear();
      best_depth = d;
    }
    if (d == best_depth) best.push_back(m);
  }
  if (best.empty()) return std::nullopt;
  if (best.size() == 1) return best.front();
  std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
  return best[pick(rng)];
}

namespace detail {

inline void attach_and_announce(const CreditGraph& g, Embedding& e, NodeId n, NodeId parent, Rng& rng,
                                unsigned bits, StabilizationReport& r) {
  e.attach(n, parent, random_element(rng, bits));
  r.messages += g.degree(n);
  ++r.nodes_reassigned;
  // The announcement doubles as a parent invitation for unattached neighbors.
  for (NodeId m : g.neighbors(n)) e.add_waiting(m);
}

// Re-attempts every waiting node, shallowest previous depth first, until a
// full pass attaches nobody.
inline void settle_waiting(const CreditGraph& g, Embedding& e, Rng& rng, unsigned bits,
                           StabilizationReport& r) {
  constexpr std::size_t never = std::numeric_limits<std::size_t>::max();
  bool progress = true;
  while (progress && !e.waiting().empty()) {
    progress = false;
    std::vector<std::pair<std::size_t, NodeId>> pending;
    for (NodeId n : e.waiting()) {
      const auto& prev = e.previous(n);
      pending.emplace_back(prev ? prev->depth() : never, n);
    }
    std::sort(pending.begin(), pending.end());
    for (const auto& [depth, n] : pending) {
      if (e.attached(n)) continue;
      if (auto p = choose_parent(g, e, n, rng)) {
        attach_and_announce(g, e, n, *p, rng, bits, r);
        progress = true;
      }
    }
  }
}

inline bool unidirectional_parent_link(const CreditGraph& g, const Embedding& e, NodeId n) {
  auto p = e.parent(n);
  return p && !g.is_bidirectional(n, *p);
}

}  // namespace detail

// Repairs every embedding after w(u,v) changed from old_weight to
// new_weight; the graph must already hold the new weight. Returns one
// report per tree, in tree order.
inline std::vector<StabilizationReport> on_link_change(const CreditGraph& g, std::span<Embedding> embeddings,
                                                       NodeId u, NodeId v, Credit old_weight,
                                                       Credit new_weight, Rng& rng, unsigned bits = 128) {
  std::vector<StabilizationReport> reports;
  reports.reserve(embeddings.size());
  for (Embedding& e : embeddings) {
    StabilizationReport r;
    r.tree_index = e.tree_index();
    std::optional<NodeId> reset;
    if (old_weight.is_zero() && new_weight.is_positive()) {
      if (!e.attached(v) && e.attached(u)) reset = v;
      if (!e.attached(u) && e.attached(v)) reset = u;
      if (!reset && e.attached(u) && e.attached(v) && g.is_bidirectional(u, v)) {
        const bool a1 = detail::unidirectional_parent_link(g, e, u);
        const bool a2 = detail::unidirectional_parent_link(g, e, v);
        if (a1 && !a2) reset = u;
        if (a2 && !a1) reset = v;
      }
    }
    if (old_weight.is_positive() && new_weight.is_zero()) {
      if (e.parent(u) == v) reset = u;
      if (e.parent(v) == u) reset = v;
    }
    if (reset) {
      r.reset_root = reset;
      if (!e.attached(*reset)) {
        const NodeId other = *reset == u ? v : u;
        const auto& prev = e.previous(*reset);
        if (!prev || !is_prefix(*prev, e.coord(other))) {
          detail::attach_and_announce(g, e, *reset, other, rng, bits, r);
        } else {
          e.add_waiting(*reset);
        }
      } else {
        for (NodeId d : e.detach_subtree(*reset)) r.messages += g.degree(d);
      }
      detail::settle_waiting(g, e, rng, bits, r);
    }
    reports.push_back(r);
  }
  return reports;
}

// Applies on_link_change for each delta in order and returns the summed
// message count.
inline std::uint64_t on_link_changes(const CreditGraph& g, std::span<Embedding> embeddings,
                                     std::span<const LinkDelta> deltas, Rng& rng, unsigned bits = 128) {
  std::uint64_t messages = 0;
  for (const LinkDelta& d : deltas) {
    messages += total_messages(on_link_change(g, embeddings, d.u, d.v, d.old_weight, d.new_weight, rng, bits));
  }
  return messages;
}

struct Rebuild {
  std::vector<Embedding> embeddings;
  std::uint64_t messages = 0;
};

// Full reconstruction; every landmark floods each undirected edge once.
inline Rebuild periodic_rebuild(const CreditGraph& g, std::span<const NodeId> landmarks, Rng& rng,
                                unsigned bits = 128) {
  Rebuild out;
  out.embeddings = build_embeddings(g, landmarks, rng, bits);
  out.messages = static_cast<std::uint64_t>(landmarks.size()) * g.edge_count();
  return out;
}

}  // namespace pbt

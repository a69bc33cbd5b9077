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
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pbt/coordinate.hpp"
#include "pbt/graph.hpp"

namespace pbt {

// Spanning tree of one landmark together with its prefix coordinates.
//
// Nodes that lost their coordinate during a repair keep it as their
// previous coordinate until they re-attach; a node may not pick a parent
// whose coordinate extends its previous one, which rules out cycles.
class Embedding {
 public:
  Embedding() = default;
  Embedding(std::size_t tree_index, NodeId landmark, std::size_t node_count)
      : tree_index_(tree_index),
        landmark_(landmark),
        coord_(node_count),
        previous_(node_count),
        parent_(node_count),
        children_(node_count) {}

  std::size_t tree_index() const { return tree_index_; }
  NodeId landmark() const { return landmark_; }
  std::size_t node_count() const { return coord_.size(); }

  bool attached(NodeId n) const { return coord_.at(n.index()).has_value(); }
  const Coordinate& coord(NodeId n) const { return *coord_.at(n.index()); }
  std::size_t depth(NodeId n) const { return coord(n).depth(); }
  std::optional<NodeId> parent(NodeId n) const { return parent_.at(n.index()); }
  std::span<const NodeId> children(NodeId n) const { return children_.at(n.index()); }
  const std::optional<Coordinate>& previous(NodeId n) const { return previous_.at(n.index()); }

  std::size_t attached_count() const {
    return static_cast<std::size_t>(
        std::count_if(coord_.begin(), coord_.end(), [](const auto& c) { return c.has_value(); }));
  }

  void attach_landmark() {
    coord_.at(landmark_.index()) = Coordinate{};
    previous_[landmark_.index()].reset();
  }

  void attach(NodeId n, NodeId parent, Element e) {
    if (attached(n) || !attached(parent)) throw InternalError("invalid attach in tree");
    coord_[n.index()] = coord(parent).extended(e);
    parent_[n.index()] = parent;
    children_[parent.index()].push_back(n);
    previous_[n.index()].reset();
    waiting_.erase(n);
  }

  // Nodes of the subtree rooted at n, top-down (breadth-first).
  std::vector<NodeId> subtree(NodeId n) const {
    std::vector<NodeId> out{n};
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (NodeId c : children(out[i])) out.push_back(c);
    }
    return out;
  }

  // Drops the coordinates of n and all its descendants. The dropped nodes
  // remember their coordinate and join the waiting set.
  std::vector<NodeId> detach_subtree(NodeId n) {
    if (n == landmark_) throw InternalError("landmark cannot be detached");
    std::vector<NodeId> dropped = subtree(n);
    if (auto p = parent_[n.index()]) {
      auto& siblings = children_[p->index()];
      siblings.erase(std::find(siblings.begin(), siblings.end(), n));
    }
    for (NodeId d : dropped) {
      previous_[d.index()] = std::move(coord_[d.index()]);
      coord_[d.index()].reset();
      parent_[d.index()].reset();
      children_[d.index()].clear();
      waiting_.insert(d);
    }
    return dropped;
  }

  // Unattached nodes that still look for a parent.
  const std::set<NodeId>& waiting() const { return waiting_; }
  void add_waiting(NodeId n) {
    if (!attached(n)) waiting_.insert(n);
  }

  // Empty when the structure is a valid tree rooted at the landmark whose
  // coordinates extend their parents' by exactly one element.
  std::string validate() const {
    if (coord_.empty()) return {};
    if (!attached(landmark_) || !coord(landmark_).empty()) return "landmark coordinate not empty";
    for (std::size_t i = 0; i < coord_.size(); ++i) {
      const NodeId n = node(i);
      if (!attached(n)) {
        if (parent_[i] || !children_[i].empty()) return "unattached node with tree links";
        continue;
      }
      if (n == landmark_) {
        if (parent_[i]) return "landmark has a parent";
        continue;
      }
      if (!parent_[i]) return "attached node without parent";
      const NodeId p = *parent_[i];
      if (!attached(p)) return "parent not attached";
      const Coordinate& c = coord(n);
      if (c.depth() != depth(p) + 1 || !is_prefix(coord(p), c)) return "coordinate does not extend parent";
      const auto& sib = children_[p.index()];
      if (std::find(sib.begin(), sib.end(), n) == sib.end()) return "child index out of sync";
      std::size_t steps = 0;
      for (NodeId cur = n; cur != landmark_; cur = *parent_[cur.index()]) {
        if (++steps > coord_.size() || !parent_[cur.index()]) return "parent chain does not reach landmark";
      }
    }
    return {};
  }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::size_t tree_index_ = 0;
  NodeId landmark_;
  std::vector<std::optional<Coordinate>> coord_;
  std::vector<std::optional<Coordinate>> previous_;
  std::vector<std::optional<NodeId>> parent_;
  std::vector<std::vector<NodeId>> children_;
  std::set<NodeId> waiting_;
};

// Two-phase breadth-first construction, one tree per landmark. The first
// phase only follows links with positive funds in both directions; once its
// queue drains, every attached node is re-queued and any live link may be
// used. Neighbors are visited in ascending id order.
inline std::vector<Embedding> build_embeddings(const CreditGraph& g, std::span<const NodeId> landmarks,
                                               Rng& rng, unsigned bits = 128) {
  std::vector<Embedding> out;
  out.reserve(landmarks.size());
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    const NodeId l = landmarks[i];
    if (!g.contains(l)) throw InvalidConfig("landmark " + std::to_string(l.value) + " not in graph");
    Embedding e(i, l, g.node_count());
    e.attach_landmark();
    std::vector<NodeId> order{l};
    std::deque<NodeId> queue{l};
    bool bidirectional_only = true;
    while (!queue.empty()) {
      const NodeId cur = queue.front();
      queue.pop_front();
      for (NodeId n : g.neighbors(cur)) {
        if (e.attached(n)) continue;
        if (!bidirectional_only || g.is_bidirectional(cur, n)) {
          e.attach(n, cur, random_element(rng, bits));
          queue.push_back(n);
          order.push_back(n);
        }
      }
      if (queue.empty() && bidirectional_only) {
        bidirectional_only = false;
        queue.assign(order.begin(), order.end());
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace pbt

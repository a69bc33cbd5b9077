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

#include <optional>
#include <variant>
#include <vector>

#include "pbt/credit.hpp"
#include "pbt/graph.hpp"

namespace pbt {

// One line of a snapshot: directed funds u -> v, optionally with the credit
// limit the link was granted.
struct SnapshotLink {
  NodeId u;
  NodeId v;
  Credit weight;
  std::optional<Credit> limit;
  friend bool operator==(const SnapshotLink&, const SnapshotLink&) = default;
};

struct Snapshot {
  bool has_limit = false;
  std::vector<SnapshotLink> links;
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct Transaction {
  double time = 0.0;
  Credit value;
  NodeId src;
  NodeId dst;
  friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct LinkChange {
  double time = 0.0;
  NodeId u;
  NodeId v;
  Credit new_weight;
  friend bool operator==(const LinkChange&, const LinkChange&) = default;
};

struct PeriodicRebuild {
  double time = 0.0;
  friend bool operator==(const PeriodicRebuild&, const PeriodicRebuild&) = default;
};

using Event = std::variant<Transaction, LinkChange, PeriodicRebuild>;

inline double event_time(const Event& e) {
  return std::visit([](const auto& x) { return x.time; }, e);
}

// Builds the graph over node ids 0..node_count-1; zero-weight lines only
// contribute structure that the graph prunes.
inline CreditGraph to_graph(const Snapshot& s, std::size_t node_count) {
  CreditGraph g(node_count);
  for (const SnapshotLink& l : s.links) {
    if (l.u != l.v) g.set_link(l.u, l.v, l.weight);
  }
  return g;
}

inline Snapshot to_snapshot(const CreditGraph& g) {
  Snapshot s;
  g.for_each_link([&](Link e, const LinkState& st) { s.links.push_back({e.from, e.to, st.weight, std::nullopt}); });
  return s;
}

}  // namespace pbt

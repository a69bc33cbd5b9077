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
#include <cctype>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbt/baselines.hpp"
#include "pbt/routing.hpp"

namespace pbt {

enum class PathRule { landmark_centered, tree_only, greedy_embedding, max_flow };
enum class CreditRule { mpc_min, random_split };
enum class StabilizationRule { periodic, on_demand, none };

// One cell of the comparison grid. SW is (landmark_centered, mpc_min,
// periodic) and SM is (greedy_embedding, random_split, on_demand). max_flow
// ignores the other two axes and keeps no trees.
struct RoutingPolicy {
  PathRule path = PathRule::greedy_embedding;
  CreditRule credit = CreditRule::random_split;
  StabilizationRule stabilization = StabilizationRule::on_demand;

  bool uses_trees() const { return path != PathRule::max_flow; }

  std::string name() const {
    if (path == PathRule::max_flow) return "FF";
    if (path == PathRule::tree_only && credit == CreditRule::mpc_min &&
        stabilization == StabilizationRule::periodic) {
      return "TO-SW";
    }
    if (path == PathRule::tree_only && credit == CreditRule::random_split &&
        stabilization == StabilizationRule::on_demand) {
      return "TO-SM";
    }
    std::string out = path == PathRule::landmark_centered ? "LM" : path == PathRule::tree_only ? "TO" : "GE";
    out += credit == CreditRule::mpc_min ? "-MUL" : "-RAND";
    out += stabilization == StabilizationRule::periodic ? "-PER" : "-OND";
    return out;
  }

  // Accepts PATH-CREDIT-STAB triples (LM|TO|GE, MUL|RAND, PER|OND) and the
  // aliases SW, SM, TO-SW, TO-SM, FF, Ford-Fulkerson. Case-insensitive.
  static RoutingPolicy parse(std::string_view text) {
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::toupper(ch); });
    using P = PathRule;
    using C = CreditRule;
    using S = StabilizationRule;
    if (s == "FF" || s == "FORD-FULKERSON" || s == "MAXFLOW") return {P::max_flow, C::mpc_min, S::none};
    if (s == "SW") return {P::landmark_centered, C::mpc_min, S::periodic};
    if (s == "SM") return {P::greedy_embedding, C::random_split, S::on_demand};
    if (s == "TO-SW") return {P::tree_only, C::mpc_min, S::periodic};
    if (s == "TO-SM") return {P::tree_only, C::random_split, S::on_demand};
    auto d1 = s.find('-');
    auto d2 = d1 == std::string::npos ? std::string::npos : s.find('-', d1 + 1);
    if (d2 == std::string::npos || s.find('-', d2 + 1) != std::string::npos) {
      throw InvalidConfig("unknown policy '" + std::string(text) + "'");
    }
    const std::string a = s.substr(0, d1), b = s.substr(d1 + 1, d2 - d1 - 1), c = s.substr(d2 + 1);
    RoutingPolicy p;
    if (a == "LM") p.path = P::landmark_centered;
    else if (a == "TO") p.path = P::tree_only;
    else if (a == "GE") p.path = P::greedy_embedding;
    else throw InvalidConfig("unknown path rule in policy '" + std::string(text) + "'");
    if (b == "MUL") p.credit = C::mpc_min;
    else if (b == "RAND") p.credit = C::random_split;
    else throw InvalidConfig("unknown credit rule in policy '" + std::string(text) + "'");
    if (c == "PER") p.stabilization = S::periodic;
    else if (c == "OND") p.stabilization = S::on_demand;
    else throw InvalidConfig("unknown stabilization rule in policy '" + std::string(text) + "'");
    return p;
  }

  friend bool operator==(const RoutingPolicy&, const RoutingPolicy&) = default;
};

// The eight LM/GE x MUL/RAND x PER/OND cells, both tree-only variants and
// max-flow.
inline std::vector<RoutingPolicy> table_policies() {
  std::vector<RoutingPolicy> out;
  for (PathRule p : {PathRule::landmark_centered, PathRule::greedy_embedding}) {
    for (CreditRule c : {CreditRule::mpc_min, CreditRule::random_split}) {
      for (StabilizationRule s : {StabilizationRule::periodic, StabilizationRule::on_demand}) {
        out.push_back({p, c, s});
      }
    }
  }
  out.push_back(RoutingPolicy::parse("TO-SW"));
  out.push_back(RoutingPolicy::parse("TO-SM"));
  out.push_back(RoutingPolicy::parse("FF"));
  return out;
}

struct AttemptResult {
  bool success = false;
  std::vector<PaymentPath> paths;  // hold reservations when success
  std::uint64_t messages = 0;
  std::uint64_t hop_delay = 0;
};

namespace detail {

// Walks fixed paths, reserving each share link by link and stopping at the
// first link that cannot carry it.
inline AttemptResult probe_fixed_paths(CreditGraph& g, std::span<const TreePath> paths,
                                       std::span<const Credit> shares) {
  AttemptResult out;
  out.success = true;
  std::vector<PaymentPath> held;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (shares[i].is_zero()) continue;
    if (!paths[i]) {
      out.success = false;
      continue;
    }
    PaymentPath walked{{paths[i]->front()}, shares[i]};
    for (const Link& e : links_of(*paths[i])) {
      if (g.reserve(e.from, e.to, shares[i]) != ReserveStatus::ok) break;
      walked.nodes.push_back(e.to);
    }
    const std::uint64_t hops = walked.hops();
    out.messages += 2 * hops;
    out.hop_delay = std::max(out.hop_delay, 2 * hops);
    if (walked.nodes.size() != paths[i]->size()) out.success = false;
    held.push_back(std::move(walked));
  }
  if (out.success) {
    out.paths = std::move(held);
  } else {
    release_paths(g, held);
  }
  return out;
}

}  // namespace detail

// One routing attempt under the policy. `dest` carries the receiver's return
// addresses and is required for greedy_embedding. On success the returned
// paths hold reservations that the caller commits or releases.
inline AttemptResult attempt_once(const RoutingPolicy& policy, CreditGraph& g,
                                  std::span<const Embedding> embeddings, NodeId src, NodeId dst,
                                  const Destination* dest, Credit c, Rng& rng) {
  AttemptResult out;
  if (policy.path == PathRule::max_flow) {
    FlowResult flow = max_flow(g, src, dst, c);
    out.messages = flow.messages;
    out.hop_delay = flow.hop_delay;
    if (flow.feasible) {
      if (!reserve_paths(g, flow.paths)) throw InternalError("max-flow decomposition exceeds link credit");
      out.success = true;
      out.paths = std::move(flow.paths);
    }
    return out;
  }
  if (policy.path == PathRule::greedy_embedding && (!dest || dest->addresses.size() != embeddings.size())) {
    throw InvalidInput("greedy routing needs the receiver's return addresses");
  }

  if (policy.credit == CreditRule::random_split) {
    ShareVector shares = split_value(c, embeddings.size(), rng);
    if (policy.path == PathRule::greedy_embedding) {
      ProbeResult probe = route_probe(g, embeddings, src, *dest, shares, rng);
      out.messages = probe.messages;
      out.hop_delay = probe.hop_delay;
      out.success = probe.success;
      if (probe.success) out.paths = probe.paths();
      return out;
    }
    auto paths = policy.path == PathRule::landmark_centered ? landmark_paths(embeddings, src, dst)
                                                            : tree_only_paths(embeddings, src, dst);
    return detail::probe_fixed_paths(g, paths, shares.shares);
  }

  // mpc_min: discover one path per tree, compute the minima jointly, assign.
  std::vector<TreePath> paths;
  if (policy.path == PathRule::greedy_embedding) {
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
      if (!embeddings[i].attached(src) || !dest->addresses[i]) {
        paths.emplace_back();
        continue;
      }
      TreeRoute r = detail::greedy_walk(g, embeddings[i], src, dst, *dest->addresses[i], Credit::from_micros(1),
                                        false, rng);
      paths.push_back(r.reached ? TreePath(r.path.nodes) : TreePath());
      out.messages += 2 * r.path.hops();
      out.hop_delay = std::max<std::uint64_t>(out.hop_delay, 2 * r.path.hops());
    }
  } else {
    paths = policy.path == PathRule::landmark_centered ? landmark_paths(embeddings, src, dst)
                                                       : tree_only_paths(embeddings, src, dst);
    for (const TreePath& p : paths) {
      const std::uint64_t hops = p ? p->size() - 1 : 0;
      out.messages += 2 * hops;
      out.hop_delay = std::max(out.hop_delay, 2 * hops);
    }
  }
  auto cost = mpc_cost(embeddings, src, dst);
  if (!cost) return out;
  out.messages += cost->messages;
  out.hop_delay += cost->hop_delay;
  auto assigned = mpc_min_assign(g, paths, c, rng);
  if (!assigned) return out;
  std::vector<PaymentPath> chosen;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if ((*assigned)[i].is_positive()) chosen.push_back({*paths[i], (*assigned)[i]});
  }
  // Overlapping paths may still exceed a shared link jointly.
  if (!reserve_paths(g, chosen)) return out;
  out.success = true;
  out.paths = std::move(chosen);
  return out;
}

}  // namespace pbt

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
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "pbt/address.hpp"
#include "pbt/embedding.hpp"
#include "pbt/graph.hpp"

namespace pbt {

struct ShareVector {
  std::vector<Credit> shares;

  std::size_t size() const { return shares.size(); }
  Credit total() const {
    Credit t;
    for (Credit s : shares) t += s;
    return t;
  }
};

// Uniform draw from the discrete simplex: k-1 cut points over [0, c] in
// micro-units, sorted, consecutive differences.
inline ShareVector split_value(Credit c, std::size_t k, Rng& rng) {
  if (k == 0) throw InvalidConfig("cannot split a value into zero shares");
  if (c.is_negative()) throw InvalidInput("cannot split a negative value");
  std::vector<std::int64_t> cuts(k - 1);
  std::uniform_int_distribution<std::int64_t> draw(0, c.micros());
  for (auto& x : cuts) x = draw(rng);
  std::sort(cuts.begin(), cuts.end());
  ShareVector out;
  out.shares.reserve(k);
  std::int64_t prev = 0;
  for (std::int64_t x : cuts) {
    out.shares.push_back(Credit::from_micros(x - prev));
    prev = x;
  }
  out.shares.push_back(Credit::from_micros(c.micros() - prev));
  return out;
}

// A path together with the amount routed along it.
struct PaymentPath {
  std::vector<NodeId> nodes;
  Credit amount;

  std::size_t hops() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  std::vector<Link> links() const { return links_of(nodes); }
};

// Reserves every path's amount on each of its links, or nothing at all.
inline bool reserve_paths(CreditGraph& g, std::span<const PaymentPath> paths) {
  std::vector<std::pair<Link, Credit>> done;
  for (const PaymentPath& p : paths) {
    for (const Link& e : p.links()) {
      if (g.reserve(e.from, e.to, p.amount) != ReserveStatus::ok) {
        for (auto it = done.rbegin(); it != done.rend(); ++it) g.release(it->first.from, it->first.to, it->second);
        return false;
      }
      done.emplace_back(e, p.amount);
    }
  }
  return true;
}

inline void release_paths(CreditGraph& g, std::span<const PaymentPath> paths) {
  for (const PaymentPath& p : paths) {
    for (const Link& e : p.links()) g.release(e.from, e.to, p.amount);
  }
}

// Settles reserved paths and returns the net change of each touched
// directed link across the whole payment.
inline std::vector<LinkDelta> commit_paths(CreditGraph& g, std::span<const PaymentPath> paths) {
  std::vector<LinkDelta> merged;
  std::unordered_map<std::uint64_t, std::size_t> where;
  for (const PaymentPath& p : paths) {
    for (const LinkDelta& d : g.commit_payment(p.links(), p.amount)) {
      const std::uint64_t k = (static_cast<std::uint64_t>(d.u.value) << 32) | d.v.value;
      auto [it, fresh] = where.try_emplace(k, merged.size());
      if (fresh) {
        merged.push_back(d);
      } else {
        merged[it->second].new_weight = d.new_weight;
      }
    }
  }
  std::erase_if(merged, [](const LinkDelta& d) { return d.old_weight == d.new_weight; });
  return merged;
}

// Greedy forwarding step: among neighbors strictly closer to the address
// than current whose guaranteed available credit covers the share, the
// closest one; ties drawn uniformly.
inline std::optional<NodeId> next_hop(const CreditGraph& g, const Embedding& e, NodeId current,
                                      const ReturnAddress& addr, Credit share, Rng& rng) {
  if (!e.attached(current)) return std::nullopt;
  const std::size_t here = address_distance(e.coord(current), addr);
  std::size_t best_d = here;
  std::vector<NodeId> best;
  for (NodeId u : g.neighbors(current)) {
    if (!e.attached(u) || g.available(current, u) < share) continue;
    const std::size_t d = address_distance(e.coord(u), addr);
    if (d < best_d) {
      best.assign(1, u);
      best_d = d;
    } else if (d == best_d && d < here) {
      best.push_back(u);
    }
  }
  if (best.empty()) return std::nullopt;
  if (best.size() == 1) return best.front();
  std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
  return best[pick(rng)];
}

// Return addresses the receiver issued, one per tree. A tree in which the
// receiver has no coordinate has no address.
struct Destination {
  NodeId receiver;
  std::vector<std::optional<IssuedAddress>> addresses;
};

inline Destination issue_addresses(std::span<const Embedding> embeddings, NodeId receiver,
                                   std::size_t length, Rng& rng, unsigned bits = 128) {
  Destination d{receiver, {}};
  for (const Embedding& e : embeddings) {
    if (e.attached(receiver)) {
      d.addresses.push_back(gen_return_address(e.coord(receiver), length, rng, bits));
    } else {
      d.addresses.emplace_back();
    }
  }
  return d;
}

struct TreeRoute {
  PaymentPath path;     // starts at the sender; empty for zero shares
  bool reached = false;
};

struct ProbeResult {
  std::vector<TreeRoute> trees;
  bool success = false;
  std::uint64_t messages = 0;
  std::uint64_t hop_delay = 0;

  // Nonzero-share paths; after a successful probe they hold reservations.
  std::vector<PaymentPath> paths() const {
    std::vector<PaymentPath> out;
    for (const auto& t : trees) {
      if (t.path.amount.is_positive()) out.push_back(t.path);
    }
    return out;
  }
};

namespace detail {

// Walks greedily from src until the receiver recognizes the address, no
// candidate remains, or the hop budget runs out (a corrupted embedding).
inline TreeRoute greedy_walk(CreditGraph& g, const Embedding& e, NodeId src, NodeId receiver,
                             const IssuedAddress& issued, Credit share, bool reserve, Rng& rng) {
  TreeRoute route;
  route.path.amount = share;
  route.path.nodes.push_back(src);
  NodeId v = src;
  std::size_t steps = 0;
  while (true) {
    if (v == receiver && recognizes(e.coord(v), issued.padding, issued.address)) {
      route.reached = true;
      break;
    }
    if (++steps > g.node_count()) throw InternalError("hop budget exhausted during greedy routing");
    auto next = next_hop(g, e, v, issued.address, share, rng);
    if (!next) break;
    if (reserve && g.reserve(v, *next, share) != ReserveStatus::ok) {
      throw InternalError("next hop lacks the credit it was chosen for");
    }
    route.path.nodes.push_back(*next);
    v = *next;
  }
  return route;
}

}  // namespace detail

// One probe: each nonzero share is routed greedily in its tree, reserving
// the share on every traversed link. If any tree fails, every reservation
// the probe made is released. Each hop costs one probe message and one
// report message along the reverse path.
inline ProbeResult route_probe(CreditGraph& g, std::span<const Embedding> embeddings, NodeId src,
                               const Destination& dest, const ShareVector& shares, Rng& rng) {
  if (shares.size() != embeddings.size() || dest.addresses.size() != embeddings.size()) {
    throw InvalidInput("probe needs one share and one address per tree");
  }
  ProbeResult out;
  out.success = true;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const Credit share = shares.shares[i];
    if (share.is_zero()) {
      out.trees.push_back({{{}, share}, true});
      continue;
    }
    if (!embeddings[i].attached(src) || !dest.addresses[i]) {
      out.trees.push_back({{{src}, share}, false});
      out.success = false;
      continue;
    }
    TreeRoute r = detail::greedy_walk(g, embeddings[i], src, dest.receiver, *dest.addresses[i], share, true, rng);
    const std::uint64_t hops = r.path.hops();
    out.messages += 2 * hops;
    out.hop_delay = std::max(out.hop_delay, 2 * hops);
    out.success = out.success && r.reached;
    out.trees.push_back(std::move(r));
  }
  if (!out.success) {
    for (const TreeRoute& t : out.trees) {
      for (const Link& e : t.path.links()) g.release(e.from, e.to, t.path.amount);
    }
  }
  return out;
}

inline void abort_probe(CreditGraph& g, const ProbeResult& probe) {
  if (probe.success) release_paths(g, probe.paths());
}

inline std::vector<LinkDelta> commit_probe(CreditGraph& g, const ProbeResult& probe) {
  if (!probe.success) throw InternalError("commit of a failed probe");
  return commit_paths(g, probe.paths());
}

struct RouteOptions {
  std::size_t attempts = 1;
  std::size_t address_length = kDefaultAddressLength;
  bool address_delivery = true;  // |L| messages and one hop for handing addresses to the sender
  unsigned bits = 128;
};

struct TransactionOutcome {
  bool success = false;
  std::size_t attempts = 0;
  std::uint64_t messages = 0;
  std::uint64_t hop_delay = 0;
  std::vector<PaymentPath> paths;  // of the successful attempt
  std::vector<LinkDelta> deltas;   // weight changes caused by the settlement

  double mean_path_length() const {
    if (paths.empty()) return 0.0;
    std::size_t total = 0;
    for (const auto& p : paths) total += p.hops();
    return static_cast<double>(total) / static_cast<double>(paths.size());
  }
};

// Embedding-based payment with random splitting and immediate retries:
// the receiver issues one address per tree, then every attempt draws fresh
// shares and probes; the first successful probe is settled.
inline TransactionOutcome route_pay(CreditGraph& g, std::span<const Embedding> embeddings, NodeId src,
                                    NodeId dst, Credit c, const RouteOptions& opt, Rng& rng) {
  if (src == dst) throw InvalidInput("self-transaction");
  if (!c.is_positive()) throw InvalidInput("transaction value must be positive");
  TransactionOutcome out;
  const Destination dest = issue_addresses(embeddings, dst, opt.address_length, rng, opt.bits);
  const std::uint64_t address_delay = opt.address_delivery ? 1 : 0;
  if (opt.address_delivery) out.messages += embeddings.size();
  std::uint64_t last_delay = 0;
  for (std::size_t a = 0; a < std::max<std::size_t>(opt.attempts, 1); ++a) {
    ++out.attempts;
    ShareVector shares = split_value(c, embeddings.size(), rng);
    ProbeResult probe = route_probe(g, embeddings, src, dest, shares, rng);
    out.messages += probe.messages;
    last_delay = probe.hop_delay;
    if (probe.success) {
      out.success = true;
      out.paths = probe.paths();
      out.deltas = commit_probe(g, probe);
      break;
    }
  }
  out.hop_delay = address_delay + last_delay;
  return out;
}

}  // namespace pbt

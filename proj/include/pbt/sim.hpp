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
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "pbt/policy.hpp"
#include "pbt/records.hpp"
#include "pbt/stabilization.hpp"

namespace pbt {

// In static mode `epoch` counts transactions; in dynamic mode both `epoch`
// and `retry_interval` are multiples of the mean inter-transaction time.
struct SimParams {
  std::size_t trees = 3;
  std::size_t attempts = 2;
  double retry_interval = 2.0;
  double epoch = 1000.0;
  LandmarkMode landmarks = LandmarkMode::highest_degree;
  std::uint64_t seed = 1;
  std::size_t address_length = kDefaultAddressLength;
  bool address_delivery = true;
  unsigned bits = 128;
  bool lockstep_oracle = false;  // record max-flow feasibility before each deciding attempt

  void validate(bool dynamic) const {
    if (trees == 0) throw InvalidConfig("at least one tree is required");
    if (attempts == 0) throw InvalidConfig("at least one attempt is required");
    if (!(epoch > 0.0) || !std::isfinite(epoch)) throw InvalidConfig("epoch must be positive");
    if (!dynamic && epoch != std::floor(epoch)) throw InvalidConfig("static epoch must be a whole transaction count");
    if (!(retry_interval >= 0.0) || !std::isfinite(retry_interval)) {
      throw InvalidConfig("retry interval must be nonnegative");
    }
    if (bits == 0 || bits > 128) throw InvalidConfig("coordinate bits must be in 1..128");
    if (address_length == 0) throw InvalidConfig("address length must be positive");
  }
};

struct TransactionRecord {
  std::size_t index = 0;
  double time = 0.0;
  NodeId src;
  NodeId dst;
  Credit value;
  bool success = false;
  std::size_t attempts = 0;
  std::uint64_t hop_delay = 0;
  std::uint64_t messages = 0;
  double path_length = 0.0;  // mean hops over the settled paths, 0 on failure
  std::uint64_t stabilization = 0;
  std::optional<bool> oracle_feasible;
  std::size_t epoch = 0;

  friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

struct EpochRecord {
  std::size_t index = 0;
  std::size_t transactions = 0;
  std::size_t successes = 0;
  std::uint64_t stabilization = 0;

  double success_ratio() const {
    return transactions == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(transactions);
  }
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct RunMetrics {
  std::vector<TransactionRecord> transactions;
  std::vector<EpochRecord> epochs;

  double success_ratio() const {
    if (transactions.empty()) return 0.0;
    return static_cast<double>(successes()) / static_cast<double>(transactions.size());
  }
  std::size_t successes() const {
    return static_cast<std::size_t>(
        std::count_if(transactions.begin(), transactions.end(), [](const auto& t) { return t.success; }));
  }
  double mean_delay() const {
    return mean([](const TransactionRecord& t) { return static_cast<double>(t.hop_delay); }, false);
  }
  double mean_messages() const {
    return mean([](const TransactionRecord& t) { return static_cast<double>(t.messages); }, false);
  }
  // Over successful transactions only.
  double mean_path_length() const {
    return mean([](const TransactionRecord& t) { return t.path_length; }, true);
  }
  double mean_stabilization() const {
    if (epochs.empty()) return 0.0;
    double s = 0.0;
    for (const auto& e : epochs) s += static_cast<double>(e.stabilization);
    return s / static_cast<double>(epochs.size());
  }
  double median_stabilization() const {
    if (epochs.empty()) return 0.0;
    std::vector<std::uint64_t> v;
    for (const auto& e : epochs) v.push_back(e.stabilization);
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? static_cast<double>(v[n / 2]) : (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2])) / 2.0;
  }

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;

 private:
  template <typename F>
  double mean(F f, bool successes_only) const {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& t : transactions) {
      if (successes_only && !t.success) continue;
      s += f(t);
      ++n;
    }
    return n == 0 ? 0.0 : s / static_cast<double>(n);
  }
};

// Called with the graph holding the successful attempt's reservations,
// right before settlement.
using CommitObserver = std::function<void(const CreditGraph&, const Transaction&, std::span<const PaymentPath>)>;

class Simulation {
 public:
  Simulation(CreditGraph g, RoutingPolicy policy, SimParams params)
      : graph_(std::move(g)), policy_(policy), params_(params), rng_(params.seed) {}

  const CreditGraph& graph() const { return graph_; }
  std::span<const Embedding> embeddings() const { return embeddings_; }
  std::span<const NodeId> landmarks() const { return landmarks_; }
  void set_observer(CommitObserver f) { observer_ = std::move(f); }

  RunMetrics run_static(std::span<const Transaction> transactions) {
    params_.validate(false);
    if (transactions.empty()) throw InvalidInput("static mode needs at least one transaction");
    init_trees();
    std::vector<bool> in_giant(graph_.node_count(), false);
    for (NodeId v : giant_component_nodes(graph_)) in_giant[v.index()] = true;
    const auto epoch_len = static_cast<std::size_t>(params_.epoch);

    RunMetrics m;
    m.epochs.resize((transactions.size() + epoch_len - 1) / epoch_len);
    for (std::size_t i = 0; i < m.epochs.size(); ++i) m.epochs[i].index = i;
    std::vector<Embedding> pristine = embeddings_;

    for (std::size_t i = 0; i < transactions.size(); ++i) {
      const Transaction& tx = transactions[i];
      check_transaction(tx);
      EpochRecord& ep = m.epochs[i / epoch_len];
      if (periodic() && i % epoch_len == 0) {
        if (i > 0) {
          embeddings_ = build_embeddings(graph_, landmarks_, rng_, params_.bits);
          pristine = embeddings_;
        }
        ep.stabilization += rebuild_cost();
      }
      TransactionRecord rec = start_record(i, tx, i / epoch_len);
      if (in_giant[tx.src.index()] && in_giant[tx.dst.index()]) {
        std::vector<LinkDelta> deltas;
        std::optional<Destination> dest;
        for (std::size_t a = 0; a < params_.attempts && !rec.success; ++a) {
          if (a == 0) dest = issue(tx.dst, rec);
          attempt(tx, dest ? &*dest : nullptr, rec, deltas);
        }
        bool dirty = false;
        if (on_demand() && !deltas.empty()) {
          for (const LinkDelta& d : deltas) {
            for (const auto& r : on_link_change(graph_, embeddings_, d.u, d.v, d.old_weight, d.new_weight, rng_,
                                                params_.bits)) {
              rec.stabilization += r.messages;
              dirty = dirty || r.reset_root.has_value();
            }
          }
        }
        for (auto it = deltas.rbegin(); it != deltas.rend(); ++it) graph_.set_link(it->u, it->v, it->old_weight);
        if (dirty) embeddings_ = pristine;
      }
      finish_record(m, rec);
    }
    return m;
  }

  RunMetrics run_dynamic(std::span<const Event> events) {
    params_.validate(true);
    std::vector<std::size_t> tx_events;
    for (std::size_t i = 0; i < events.size(); ++i) {
      if (i > 0 && event_time(events[i]) < event_time(events[i - 1])) {
        throw InvalidInput("events are not sorted by time");
      }
      if (!std::isfinite(event_time(events[i])) || event_time(events[i]) < 0.0) {
        throw InvalidInput("event time must be finite and nonnegative");
      }
      if (std::holds_alternative<Transaction>(events[i])) tx_events.push_back(i);
    }
    RunMetrics m;
    if (events.empty()) return m;
    init_trees();

    const double t0 = event_time(events.front());
    const double t_end = event_time(events.back());
    double mean_gap = 1.0;
    if (tx_events.size() >= 2) {
      const double span = event_time(events[tx_events.back()]) - event_time(events[tx_events.front()]);
      if (span > 0.0) mean_gap = span / static_cast<double>(tx_events.size() - 1);
    }
    const double epoch_len = params_.epoch * mean_gap;
    const double retry_window = params_.retry_interval * mean_gap;
    auto epoch_of = [&](double t) { return static_cast<std::size_t>(std::floor((t - t0) / epoch_len)); };
    const std::size_t n_epochs = epoch_of(t_end) + 1;
    m.epochs.resize(n_epochs);
    for (std::size_t i = 0; i < n_epochs; ++i) m.epochs[i].index = i;

    struct Pending {
      double time;
      std::uint64_t seq;
      std::size_t event;  // index into events, or npos for a scheduled rebuild
      bool operator>(const Pending& o) const { return time != o.time ? time > o.time : seq > o.seq; }
    };
    constexpr std::size_t rebuild = static_cast<std::size_t>(-1);
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
    std::uint64_t seq = 0;
    for (std::size_t i = 0; i < events.size(); ++i) queue.push({event_time(events[i]), seq++, i});
    if (periodic()) {
      m.epochs[0].stabilization += rebuild_cost();
      for (std::size_t k = 1; k < n_epochs; ++k) queue.push({t0 + static_cast<double>(k) * epoch_len, seq++, rebuild});
    }

    std::vector<TransactionRecord> records(tx_events.size());
    std::vector<std::size_t> tx_slot(events.size(), 0);
    for (std::size_t k = 0; k < tx_events.size(); ++k) {
      const auto& tx = std::get<Transaction>(events[tx_events[k]]);
      check_transaction(tx);
      tx_slot[tx_events[k]] = k;
      records[k] = start_record(k, tx, epoch_of(tx.time));
    }

    while (!queue.empty()) {
      const Pending p = queue.top();
      queue.pop();
      const std::size_t now_epoch = std::min(epoch_of(p.time), n_epochs - 1);
      if (p.event == rebuild || std::holds_alternative<PeriodicRebuild>(events[p.event])) {
        if (periodic()) {
          embeddings_ = build_embeddings(graph_, landmarks_, rng_, params_.bits);
          m.epochs[now_epoch].stabilization += rebuild_cost();
        }
        continue;
      }
      if (const auto* ch = std::get_if<LinkChange>(&events[p.event])) {
        apply_change(*ch, m.epochs[now_epoch]);
        continue;
      }
      const auto& tx = std::get<Transaction>(events[p.event]);
      TransactionRecord& rec = records[tx_slot[p.event]];
      std::optional<Destination> dest = issue(tx.dst, rec);
      std::vector<LinkDelta> deltas;
      attempt(tx, dest ? &*dest : nullptr, rec, deltas);
      if (rec.success) {
        if (on_demand()) {
          const std::uint64_t s = on_link_changes(graph_, embeddings_, deltas, rng_, params_.bits);
          rec.stabilization += s;
          m.epochs[now_epoch].stabilization += s;
        }
      } else if (rec.attempts < params_.attempts) {
        std::uniform_real_distribution<double> wait(0.0, retry_window);
        queue.push({p.time + wait(rng_), seq++, p.event});
      }
    }
    for (TransactionRecord& rec : records) {
      EpochRecord& ep = m.epochs[rec.epoch];
      ++ep.transactions;
      if (rec.success) ++ep.successes;
      m.transactions.push_back(std::move(rec));
    }
    return m;
  }

 private:
  bool periodic() const { return policy_.uses_trees() && policy_.stabilization == StabilizationRule::periodic; }
  bool on_demand() const { return policy_.uses_trees() && policy_.stabilization == StabilizationRule::on_demand; }
  std::uint64_t rebuild_cost() const {
    return static_cast<std::uint64_t>(landmarks_.size()) * graph_.edge_count();
  }

  void init_trees() {
    landmarks_.clear();
    embeddings_.clear();
    if (!policy_.uses_trees()) return;
    if (params_.trees > graph_.node_count()) throw InvalidConfig("more trees than nodes");
    landmarks_ = select_landmarks(graph_, params_.trees, params_.landmarks, rng_);
    embeddings_ = build_embeddings(graph_, landmarks_, rng_, params_.bits);
  }

  void check_transaction(const Transaction& tx) const {
    if (!graph_.contains(tx.src) || !graph_.contains(tx.dst)) throw InvalidInput("transaction names an unknown node");
    if (tx.src == tx.dst) throw InvalidInput("self-transaction");
    if (!tx.value.is_positive()) throw InvalidInput("transaction value must be positive");
  }

  static TransactionRecord start_record(std::size_t index, const Transaction& tx, std::size_t epoch) {
    TransactionRecord rec;
    rec.index = index;
    rec.time = tx.time;
    rec.src = tx.src;
    rec.dst = tx.dst;
    rec.value = tx.value;
    rec.epoch = epoch;
    return rec;
  }

  static void finish_record(RunMetrics& m, TransactionRecord rec) {
    EpochRecord& ep = m.epochs[rec.epoch];
    ++ep.transactions;
    if (rec.success) ++ep.successes;
    ep.stabilization += rec.stabilization;
    m.transactions.push_back(std::move(rec));
  }

  // Receiver-side address issuance for greedy routing; charges delivery.
  std::optional<Destination> issue(NodeId dst, TransactionRecord& rec) {
    if (policy_.path != PathRule::greedy_embedding) return std::nullopt;
    if (params_.address_delivery) rec.messages += embeddings_.size();
    return issue_addresses(embeddings_, dst, params_.address_length, rng_, params_.bits);
  }

  void attempt(const Transaction& tx, const Destination* dest, TransactionRecord& rec, std::vector<LinkDelta>& deltas) {
    if (params_.lockstep_oracle) rec.oracle_feasible = max_flow(graph_, tx.src, tx.dst, tx.value).feasible;
    ++rec.attempts;
    AttemptResult r = attempt_once(policy_, graph_, embeddings_, tx.src, tx.dst, dest, tx.value, rng_);
    rec.messages += r.messages;
    const std::uint64_t address_delay = dest && params_.address_delivery ? 1 : 0;
    rec.hop_delay = address_delay + r.hop_delay;
    if (!r.success) return;
    if (observer_) observer_(graph_, tx, r.paths);
    deltas = commit_paths(graph_, r.paths);
    rec.success = true;
    std::size_t hops = 0;
    for (const PaymentPath& p : r.paths) hops += p.hops();
    rec.path_length = r.paths.empty() ? 0.0 : static_cast<double>(hops) / static_cast<double>(r.paths.size());
  }

  void apply_change(const LinkChange& ch, EpochRecord& ep) {
    if (!graph_.contains(ch.u) || !graph_.contains(ch.v) || ch.u == ch.v) {
      throw InvalidInput("link change names an invalid pair");
    }
    const LinkDelta d = graph_.set_link(ch.u, ch.v, ch.new_weight);
    if (on_demand() && d.old_weight != d.new_weight) {
      ep.stabilization +=
          total_messages(on_link_change(graph_, embeddings_, d.u, d.v, d.old_weight, d.new_weight, rng_, params_.bits));
    }
  }

  CreditGraph graph_;
  RoutingPolicy policy_;
  SimParams params_;
  Rng rng_;
  std::vector<NodeId> landmarks_;
  std::vector<Embedding> embeddings_;
  CommitObserver observer_;
};

inline RunMetrics run_static(const CreditGraph& g0, std::span<const Transaction> transactions,
                             const RoutingPolicy& policy, const SimParams& params) {
  Simulation sim(g0, policy, params);
  return sim.run_static(transactions);
}

inline RunMetrics run_dynamic(const CreditGraph& g0, std::span<const Event> events, const RoutingPolicy& policy,
                              const SimParams& params) {
  Simulation sim(g0, policy, params);
  return sim.run_dynamic(events);
}

// Stable merge by time; at equal times link changes precede transactions.
inline std::vector<Event> merge_events(std::span<const Transaction> transactions,
                                       std::span<const LinkChange> changes) {
  std::vector<Event> out;
  out.reserve(transactions.size() + changes.size());
  std::size_t i = 0, j = 0;
  while (i < transactions.size() || j < changes.size()) {
    if (j < changes.size() && (i == transactions.size() || changes[j].time <= transactions[i].time)) {
      out.emplace_back(changes[j++]);
    } else {
      out.emplace_back(transactions[i++]);
    }
  }
  return out;
}

// Per-epoch success ratio of `policy` divided by that of the max-flow twin;
// empty where the twin had no success.
inline std::vector<std::optional<double>> relative_success(const RunMetrics& policy, const RunMetrics& max_flow_twin) {
  std::vector<std::optional<double>> out(policy.epochs.size());
  for (std::size_t i = 0; i < out.size() && i < max_flow_twin.epochs.size(); ++i) {
    const double base = max_flow_twin.epochs[i].success_ratio();
    if (base > 0.0) out[i] = policy.epochs[i].success_ratio() / base;
  }
  return out;
}

}  // namespace pbt

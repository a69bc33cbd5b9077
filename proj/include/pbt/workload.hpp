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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pbt/errors.hpp"
#include "pbt/records.hpp"

namespace pbt {

// ---------------------------------------------------------------- text IO

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline NodeId parse_node(std::string_view s, std::size_t line) {
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
    throw ParseError(line, "malformed node id '" + std::string(s) + "'");
  }
  return NodeId{v};
}

inline double parse_time(std::string_view s, std::size_t line) {
  double t = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), t);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty() || !std::isfinite(t) || t < 0.0) {
    throw ParseError(line, "malformed timestamp '" + std::string(s) + "'");
  }
  return t;
}

inline Credit parse_credit(std::string_view s, std::size_t line) {
  try {
    return Credit::parse(s);
  } catch (const InvalidInput& e) {
    throw ParseError(line, e.what());
  }
}

inline std::string format_time(double t) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, t);
  if (ec != std::errc{}) throw InternalError("cannot format timestamp");
  return std::string(buf, p);
}

// Feeds each nonblank data line with its 1-based line number; checks the
// header against the accepted alternatives and returns the matching one.
template <typename F>
std::size_t for_each_record(std::istream& in, std::span<const std::string_view> headers, F&& f) {
  std::string line;
  std::size_t number = 0;
  std::size_t which = headers.size();
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (which == headers.size()) {
      for (std::size_t i = 0; i < headers.size(); ++i) {
        if (line == headers[i]) which = i;
      }
      if (which == headers.size()) throw ParseError(number, "unexpected header '" + line + "'");
      continue;
    }
    if (line.empty()) continue;
    f(split_fields(line), number, which);
  }
  if (which == headers.size()) throw ParseError(number + 1, "missing header");
  return which;
}

inline void expect_fields(std::span<const std::string_view> fields, std::size_t n, std::size_t line) {
  if (fields.size() != n) {
    throw ParseError(line, "expected " + std::to_string(n) + " fields, got " + std::to_string(fields.size()));
  }
}

}  // namespace detail

inline Snapshot parse_snapshot(std::istream& in) {
  static constexpr std::string_view headers[] = {"u,v,weight", "u,v,weight,limit"};
  Snapshot s;
  const std::size_t which = detail::for_each_record(in, headers, [&](auto fields, std::size_t line, std::size_t h) {
    detail::expect_fields(fields, h == 0 ? 3 : 4, line);
    SnapshotLink l{detail::parse_node(fields[0], line), detail::parse_node(fields[1], line),
                   detail::parse_credit(fields[2], line), std::nullopt};
    if (h == 1) l.limit = detail::parse_credit(fields[3], line);
    s.links.push_back(l);
  });
  s.has_limit = which == 1;
  return s;
}

inline std::vector<Transaction> parse_transactions(std::istream& in) {
  static constexpr std::string_view headers[] = {"time,value,src,dst"};
  std::vector<Transaction> out;
  double last = 0.0;
  detail::for_each_record(in, headers, [&](auto fields, std::size_t line, std::size_t) {
    detail::expect_fields(fields, 4, line);
    Transaction t{detail::parse_time(fields[0], line), detail::parse_credit(fields[1], line),
                  detail::parse_node(fields[2], line), detail::parse_node(fields[3], line)};
    if (!out.empty() && t.time < last) throw ParseError(line, "timestamps decrease");
    last = t.time;
    out.push_back(t);
  });
  return out;
}

inline std::vector<LinkChange> parse_link_changes(std::istream& in) {
  static constexpr std::string_view headers[] = {"time,u,v,new_weight"};
  std::vector<LinkChange> out;
  double last = 0.0;
  detail::for_each_record(in, headers, [&](auto fields, std::size_t line, std::size_t) {
    detail::expect_fields(fields, 4, line);
    LinkChange c{detail::parse_time(fields[0], line), detail::parse_node(fields[1], line),
                 detail::parse_node(fields[2], line), detail::parse_credit(fields[3], line)};
    if (!out.empty() && c.time < last) throw ParseError(line, "timestamps decrease");
    last = c.time;
    out.push_back(c);
  });
  return out;
}

inline std::string serialize(const Snapshot& s) {
  std::string out = s.has_limit ? "u,v,weight,limit\n" : "u,v,weight\n";
  for (const SnapshotLink& l : s.links) {
    out += std::to_string(l.u.value) + ',' + std::to_string(l.v.value) + ',' + l.weight.to_string();
    if (s.has_limit) out += ',' + (l.limit ? l.limit->to_string() : l.weight.to_string());
    out += '\n';
  }
  return out;
}

inline std::string serialize(std::span<const Transaction> txs) {
  std::string out = "time,value,src,dst\n";
  for (const Transaction& t : txs) {
    out += detail::format_time(t.time) + ',' + t.value.to_string() + ',' + std::to_string(t.src.value) + ',' +
           std::to_string(t.dst.value) + '\n';
  }
  return out;
}

inline std::string serialize(std::span<const LinkChange> changes) {
  std::string out = "time,u,v,new_weight\n";
  for (const LinkChange& c : changes) {
    out += detail::format_time(c.time) + ',' + std::to_string(c.u.value) + ',' + std::to_string(c.v.value) + ',' +
           c.new_weight.to_string() + '\n';
  }
  return out;
}

template <typename Parse>
auto parse_text(std::string_view text, Parse parse) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes to a sibling temporary and renames it over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw InvalidInput("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------- preprocessing

struct Workload {
  Snapshot snapshot;
  std::vector<Transaction> transactions;
  std::vector<LinkChange> link_changes;

  std::size_t node_count() const {
    std::uint32_t hi = 0;
    bool any = false;
    auto see = [&](NodeId v) {
      hi = std::max(hi, v.value);
      any = true;
    };
    for (const auto& l : snapshot.links) see(l.u), see(l.v);
    for (const auto& t : transactions) see(t.src), see(t.dst);
    for (const auto& c : link_changes) see(c.u), see(c.v);
    return any ? std::size_t{hi} + 1 : 0;
  }
  friend bool operator==(const Workload&, const Workload&) = default;
};

struct PreprocessReport {
  std::size_t invalid_credit = 0;
  std::size_t self_links = 0;
  std::size_t duplicate_links = 0;
  std::size_t self_transactions = 0;
  std::size_t self_link_changes = 0;
  std::size_t nodes_outside_giant = 0;
  std::size_t links_outside_giant = 0;
  std::size_t transactions_outside_giant = 0;
  std::size_t link_changes_outside_giant = 0;
  std::size_t links_zeroed = 0;
  std::size_t links_added = 0;
  std::size_t nodes = 0;
  std::size_t links = 0;  // undirected pairs
  std::size_t directed_links = 0;
  std::size_t transactions = 0;
  std::size_t link_changes = 0;

  std::string to_text() const {
    std::string out;
    auto kv = [&](const char* k, std::size_t v) { out += std::string(k) + '=' + std::to_string(v) + '\n'; };
    kv("invalid_credit", invalid_credit);
    kv("self_links", self_links);
    kv("duplicate_links", duplicate_links);
    kv("self_transactions", self_transactions);
    kv("self_link_changes", self_link_changes);
    kv("nodes_outside_giant", nodes_outside_giant);
    kv("links_outside_giant", links_outside_giant);
    kv("transactions_outside_giant", transactions_outside_giant);
    kv("link_changes_outside_giant", link_changes_outside_giant);
    kv("links_zeroed", links_zeroed);
    kv("links_added", links_added);
    kv("nodes", nodes);
    kv("links", links);
    kv("directed_links", directed_links);
    kv("transactions", transactions);
    kv("link_changes", link_changes);
    return out;
  }
};

struct PreprocessResult {
  Workload workload;                    // dense ids 0..nodes-1
  std::vector<std::uint32_t> original;  // dense id -> input id
  PreprocessReport report;
};

namespace detail {

inline std::uint64_t pair_key(NodeId u, NodeId v) { return std::uint64_t{u.value} << 32 | v.value; }

// Pairs of ids joined by any snapshot line or link change, as a
// component labeling over the compacted id set.
class IdUnionFind {
 public:
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  std::size_t add() {
    parent_.push_back(parent_.size());
    return parent_.size() - 1;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a), b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

// Cleans a raw workload in order: invalid credit and self-links, self
// transactions, restriction to the giant component, and the initial state
// where every link that a later change touches starts at zero. Surviving
// nodes are relabeled densely in ascending input id.
inline PreprocessResult preprocess(const Workload& raw) {
  PreprocessResult res;
  PreprocessReport& rep = res.report;

  std::map<std::uint64_t, SnapshotLink> links;
  for (const SnapshotLink& l : raw.snapshot.links) {
    if (l.u == l.v) {
      ++rep.self_links;
      continue;
    }
    if (l.weight.is_negative() || (l.limit && l.weight > *l.limit)) {
      ++rep.invalid_credit;
      continue;
    }
    auto [it, fresh] = links.insert_or_assign(detail::pair_key(l.u, l.v), l);
    if (!fresh) ++rep.duplicate_links;
  }
  std::vector<Transaction> txs;
  for (const Transaction& t : raw.transactions) {
    if (t.src == t.dst) {
      ++rep.self_transactions;
    } else {
      txs.push_back(t);
    }
  }
  std::vector<LinkChange> changes;
  for (const LinkChange& c : raw.link_changes) {
    if (c.u == c.v) {
      ++rep.self_link_changes;
    } else {
      changes.push_back(c);
    }
  }

  // Giant component over everything that names a pair.
  std::map<std::uint32_t, std::size_t> slot;
  detail::IdUnionFind uf;
  auto id = [&](NodeId v) {
    auto [it, fresh] = slot.try_emplace(v.value, 0);
    if (fresh) it->second = uf.add();
    return it->second;
  };
  for (const auto& [k, l] : links) uf.unite(id(l.u), id(l.v));
  for (const LinkChange& c : changes) uf.unite(id(c.u), id(c.v));
  for (const Transaction& t : txs) id(t.src), id(t.dst);
  std::map<std::size_t, std::size_t> size;
  for (const auto& [v, s] : slot) ++size[uf.find(s)];
  std::size_t giant = 0, best = 0;
  for (const auto& [root, n] : size) {  // ascending root: ties keep the smallest id
    if (n > best) best = n, giant = root;
  }
  std::vector<std::uint32_t>& original = res.original;
  for (const auto& [v, s] : slot) {
    if (uf.find(s) == giant) {
      original.push_back(v);
    } else {
      ++rep.nodes_outside_giant;
    }
  }
  std::map<std::uint32_t, std::uint32_t> dense;
  for (std::size_t i = 0; i < original.size(); ++i) dense[original[i]] = static_cast<std::uint32_t>(i);
  auto keep = [&](NodeId v) { return dense.contains(v.value); };
  auto relabel = [&](NodeId v) { return NodeId{dense.at(v.value)}; };

  std::map<std::uint64_t, SnapshotLink> kept;
  for (const auto& [k, l] : links) {
    if (!keep(l.u) || !keep(l.v)) {
      ++rep.links_outside_giant;
      continue;
    }
    SnapshotLink r = l;
    r.u = relabel(l.u);
    r.v = relabel(l.v);
    kept.emplace(detail::pair_key(r.u, r.v), r);
  }
  for (const Transaction& t : txs) {
    if (!keep(t.src) || !keep(t.dst)) {
      ++rep.transactions_outside_giant;
      continue;
    }
    res.workload.transactions.push_back({t.time, t.value, relabel(t.src), relabel(t.dst)});
  }
  for (const LinkChange& c : changes) {
    if (!keep(c.u) || !keep(c.v)) {
      ++rep.link_changes_outside_giant;
      continue;
    }
    res.workload.link_changes.push_back({c.time, relabel(c.u), relabel(c.v), c.new_weight});
  }

  // Initial state: links that change later start at zero.
  for (const LinkChange& c : res.workload.link_changes) {
    auto it = kept.find(detail::pair_key(c.u, c.v));
    if (it == kept.end()) {
      SnapshotLink z{c.u, c.v, Credit{}, std::nullopt};
      if (raw.snapshot.has_limit) z.limit = Credit{};
      kept.emplace(detail::pair_key(c.u, c.v), z);
      ++rep.links_added;
    } else if (!it->second.weight.is_zero()) {
      it->second.weight = Credit{};
      ++rep.links_zeroed;
    }
  }

  res.workload.snapshot.has_limit = raw.snapshot.has_limit;
  std::set<std::uint64_t> undirected;
  for (const auto& [k, l] : kept) {
    res.workload.snapshot.links.push_back(l);
    undirected.insert(detail::pair_key(std::min(l.u, l.v), std::max(l.u, l.v)));
  }
  rep.nodes = original.size();
  rep.links = undirected.size();
  rep.directed_links = kept.size();
  rep.transactions = res.workload.transactions.size();
  rep.link_changes = res.workload.link_changes.size();
  return res;
}

inline CreditGraph to_graph(const PreprocessResult& r) { return to_graph(r.workload.snapshot, r.original.size()); }

// ------------------------------------------------------------- synthesis

enum class TopologyModel { scale_free, small_world };

struct SyntheticParams {
  std::size_t nodes = 1000;
  TopologyModel model = TopologyModel::scale_free;
  std::size_t attach = 3;        // scale-free: links per arriving node
  std::size_t ring_degree = 4;   // small-world: ring neighbors per node
  double shortcut_prob = 0.1;    // small-world: shortcut per ring link
  double weight_min = 1.0;
  double weight_max = 1000.0;
  double unidirectional_fraction = 0.0;  // pairs that get funds in one direction only
  std::size_t transactions = 10000;
  double value_min = 1.0;
  double value_max = 100.0;
  double mean_interarrival = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (nodes < 2) throw InvalidConfig("a synthetic graph needs at least two nodes");
    if (attach == 0) throw InvalidConfig("attach must be positive");
    if (ring_degree < 2 || ring_degree % 2) throw InvalidConfig("ring degree must be even and at least 2");
    if (!(shortcut_prob >= 0.0 && shortcut_prob <= 1.0)) throw InvalidConfig("shortcut probability outside [0,1]");
    if (!(unidirectional_fraction >= 0.0 && unidirectional_fraction <= 1.0)) {
      throw InvalidConfig("unidirectional fraction outside [0,1]");
    }
    if (!(weight_min > 0.0 && weight_max >= weight_min && std::isfinite(weight_max))) {
      throw InvalidConfig("weight range must satisfy 0 < min <= max");
    }
    if (!(value_min > 0.0 && value_max >= value_min && std::isfinite(value_max))) {
      throw InvalidConfig("value range must satisfy 0 < min <= max");
    }
    if (!(mean_interarrival > 0.0 && std::isfinite(mean_interarrival))) {
      throw InvalidConfig("mean inter-arrival time must be positive");
    }
  }
};

namespace detail {

inline Credit log_uniform_credit(double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  const double x = lo == hi ? lo : std::exp(u(rng));
  const auto micros = static_cast<std::int64_t>(std::llround(x * static_cast<double>(Credit::kScale)));
  return Credit::from_micros(std::max<std::int64_t>(micros, 1));
}

inline std::vector<std::pair<std::uint32_t, std::uint32_t>> scale_free_pairs(std::size_t n, std::size_t m, Rng& rng) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::vector<std::uint32_t> ends;  // each node once per incident link
  const std::size_t core = std::min(n, m + 1);
  for (std::uint32_t a = 0; a < core; ++a) {
    for (std::uint32_t b = a + 1; b < core; ++b) {
      pairs.insert({a, b});
      ends.push_back(a);
      ends.push_back(b);
    }
  }
  for (std::uint32_t v = static_cast<std::uint32_t>(core); v < n; ++v) {
    std::set<std::uint32_t> targets;
    std::uniform_int_distribution<std::size_t> pick(0, ends.size() - 1);
    while (targets.size() < std::min<std::size_t>(m, v)) targets.insert(ends[pick(rng)]);
    for (std::uint32_t t : targets) {
      pairs.insert({t, v});
      ends.push_back(t);
      ends.push_back(v);
    }
  }
  return {pairs.begin(), pairs.end()};
}

inline std::vector<std::pair<std::uint32_t, std::uint32_t>> small_world_pairs(std::size_t n, std::size_t k, double p,
                                                                              Rng& rng) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  auto add = [&](std::size_t a, std::size_t b) {
    if (a == b) return false;
    return pairs.insert({static_cast<std::uint32_t>(std::min(a, b)), static_cast<std::uint32_t>(std::max(a, b))})
        .second;
  };
  std::size_t ring_links = 0;
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t j = 1; j <= k / 2; ++j) ring_links += add(v, (v + j) % n) ? 1 : 0;
  }
  std::bernoulli_distribution coin(p);
  std::uniform_int_distribution<std::size_t> any(0, n - 1);
  const std::size_t max_pairs = n * (n - 1) / 2;
  for (std::size_t i = 0; i < ring_links && pairs.size() < max_pairs; ++i) {
    if (!coin(rng)) continue;
    while (!add(any(rng), any(rng))) {
    }
  }
  return {pairs.begin(), pairs.end()};
}

}  // namespace detail

// Deterministic under params.seed. Each undirected pair becomes two links
// with independently drawn log-uniform weights; a unidirectional pair keeps
// one of them. Transactions pick endpoints proportional to degree.
inline Workload generate_synthetic(const SyntheticParams& params) {
  params.validate();
  Rng rng(params.seed);
  auto pairs = params.model == TopologyModel::scale_free
                   ? detail::scale_free_pairs(params.nodes, params.attach, rng)
                   : detail::small_world_pairs(params.nodes, params.ring_degree, params.shortcut_prob, rng);
  Workload w;
  std::vector<double> degree(params.nodes, 0.0);
  std::bernoulli_distribution one_way(params.unidirectional_fraction);
  std::bernoulli_distribution coin(0.5);
  for (const auto& [a, b] : pairs) {
    Credit ab = detail::log_uniform_credit(params.weight_min, params.weight_max, rng);
    Credit ba = detail::log_uniform_credit(params.weight_min, params.weight_max, rng);
    if (one_way(rng)) (coin(rng) ? ab : ba) = Credit{};
    if (ab.is_positive()) w.snapshot.links.push_back({NodeId{a}, NodeId{b}, ab, std::nullopt});
    if (ba.is_positive()) w.snapshot.links.push_back({NodeId{b}, NodeId{a}, ba, std::nullopt});
    degree[a] += 1.0;
    degree[b] += 1.0;
  }
  std::sort(w.snapshot.links.begin(), w.snapshot.links.end(),
            [](const SnapshotLink& x, const SnapshotLink& y) { return std::pair(x.u, x.v) < std::pair(y.u, y.v); });

  std::discrete_distribution<std::uint32_t> endpoint(degree.begin(), degree.end());
  std::exponential_distribution<double> gap(1.0 / params.mean_interarrival);
  double t = 0.0;
  for (std::size_t i = 0; i < params.transactions; ++i) {
    if (i > 0) t += gap(rng);
    const std::uint32_t s = endpoint(rng);
    std::uint32_t d = endpoint(rng);
    while (d == s) d = endpoint(rng);
    w.transactions.push_back({t, detail::log_uniform_credit(params.value_min, params.value_max, rng), NodeId{s},
                              NodeId{d}});
  }
  return w;
}

}  // namespace pbt

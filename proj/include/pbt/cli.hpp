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

#include <sodium.h>

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pbt/sim.hpp"
#include "pbt/workload.hpp"

namespace pbt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 3;

namespace detail {

inline std::string fixed(double x, int precision = 6) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, precision);
  if (ec != std::errc{}) throw InternalError("cannot format number");
  return std::string(buf, p);
}

inline std::string hex(std::span<const unsigned char> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 15];
  }
  return out;
}

class Fingerprint {
 public:
  Fingerprint() {
    if (sodium_init() < 0) throw InternalError("libsodium failed to initialize");
    crypto_generichash_init(&state_, nullptr, 0, crypto_generichash_BYTES);
  }
  void add(std::string_view tag, std::string_view data) {
    const std::string head = std::string(tag) + ':' + std::to_string(data.size()) + ':';
    update(head);
    update(data);
  }
  std::string finish() {
    unsigned char out[crypto_generichash_BYTES];
    crypto_generichash_final(&state_, out, sizeof out);
    return hex(out);
  }

 private:
  void update(std::string_view s) {
    crypto_generichash_update(&state_, reinterpret_cast<const unsigned char*>(s.data()), s.size());
  }
  crypto_generichash_state state_;
};

// "3" or "1..7".
inline std::vector<std::size_t> parse_tree_range(const std::string& s) {
  auto num = [&](std::string_view t) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size() || t.empty() || v == 0) {
      throw InvalidConfig("bad tree count '" + s + "'");
    }
    return v;
  };
  const auto dots = s.find("..");
  if (dots == std::string::npos) return {num(s)};
  const std::size_t a = num(std::string_view(s).substr(0, dots)), b = num(std::string_view(s).substr(dots + 2));
  if (a > b) throw InvalidConfig("empty tree range '" + s + "'");
  std::vector<std::size_t> out;
  for (std::size_t k = a; k <= b; ++k) out.push_back(k);
  return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Stat {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single run
};

inline Stat summarize(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double q = 0.0;
    for (double x : xs) q += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(q / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct RunOptions {
  std::string mode = "static";
  std::string policies = "GE-RAND-OND";
  std::string trees = "3";
  std::size_t attempts = 2;
  double tl = 2.0;
  double epoch = 1000.0;
  std::string landmarks = "degree";
  std::size_t runs = 1;
  std::uint64_t seed = 1;
  std::string snapshot;
  std::string transactions;
  std::string link_changes;
  std::size_t tx_per_run = 0;
  bool feasible_only = false;
  bool lockstep = false;
  bool relative = false;
  bool address_delivery = true;
  std::size_t address_length = kDefaultAddressLength;
  unsigned bits = 128;
  std::string out;
};

inline std::string config_text(const RunOptions& o) {
  std::string s;
  auto kv = [&](const char* k, const std::string& v) { s += std::string("# config ") + k + '=' + v + '\n'; };
  kv("mode", o.mode);
  kv("policy", o.policies);
  kv("trees", o.trees);
  kv("attempts", std::to_string(o.attempts));
  kv("tl", fixed(o.tl));
  kv("epoch", fixed(o.epoch));
  kv("landmarks", o.landmarks);
  kv("runs", std::to_string(o.runs));
  kv("seed", std::to_string(o.seed));
  kv("tx-per-run", std::to_string(o.tx_per_run));
  kv("feasible-only", o.feasible_only ? "true" : "false");
  kv("lockstep", o.lockstep ? "true" : "false");
  kv("relative", o.relative ? "true" : "false");
  kv("address-delivery", o.address_delivery ? "true" : "false");
  kv("address-length", std::to_string(o.address_length));
  kv("bits", std::to_string(o.bits));
  return s;
}

inline void cmd_run(const RunOptions& o, std::ostream& log) {
  const bool dynamic = o.mode == "dynamic";
  if (!dynamic && o.mode != "static") throw InvalidConfig("mode must be static or dynamic");
  if (o.runs == 0) throw InvalidConfig("runs must be positive");
  if (dynamic && (o.tx_per_run || o.feasible_only)) {
    throw InvalidConfig("--tx-per-run and --feasible-only apply to static mode only");
  }
  if (!dynamic && (o.relative || !o.link_changes.empty())) {
    throw InvalidConfig("--relative and --link-changes apply to dynamic mode only");
  }
  LandmarkMode lm;
  if (o.landmarks == "degree") lm = LandmarkMode::highest_degree;
  else if (o.landmarks == "random") lm = LandmarkMode::random;
  else throw InvalidConfig("landmarks must be degree or random");
  std::vector<RoutingPolicy> policies;
  for (const std::string& p : split_list(o.policies)) policies.push_back(RoutingPolicy::parse(p));
  if (policies.empty()) throw InvalidConfig("no policy given");
  const std::vector<std::size_t> tree_counts = parse_tree_range(o.trees);

  const std::string snap_text = read_file(o.snapshot);
  const std::string tx_text = read_file(o.transactions);
  const std::string ch_text = o.link_changes.empty() ? std::string() : read_file(o.link_changes);
  Workload w;
  w.snapshot = parse_text(snap_text, [](std::istream& in) { return parse_snapshot(in); });
  w.transactions = parse_text(tx_text, [](std::istream& in) { return parse_transactions(in); });
  if (!ch_text.empty()) w.link_changes = parse_text(ch_text, [](std::istream& in) { return parse_link_changes(in); });
  const CreditGraph g0 = to_graph(w.snapshot, w.node_count());

  Fingerprint fp;
  fp.add("snapshot", snap_text);
  fp.add("transactions", tx_text);
  fp.add("link_changes", ch_text);
  fp.add("mode", o.mode);
  fp.add("seed", std::to_string(o.seed));
  fp.add("runs", std::to_string(o.runs));
  fp.add("tx-per-run", std::to_string(o.tx_per_run));
  fp.add("feasible-only", o.feasible_only ? "1" : "0");
  const std::string fingerprint = fp.finish();

  std::vector<Transaction> pool = w.transactions;
  if (o.feasible_only) {
    std::erase_if(pool, [&](const Transaction& t) {
      return t.src == t.dst || !max_flow(g0, t.src, t.dst, t.value).feasible;
    });
    log << "feasible pool: " << pool.size() << " of " << w.transactions.size() << " transactions\n";
  }
  const std::vector<Event> events = dynamic ? merge_events(w.transactions, w.link_changes) : std::vector<Event>{};

  std::string tx_csv =
      "policy,trees,run,index,time,src,dst,value,success,attempts,delay_hops,messages,path_len,stab_messages";
  tx_csv += o.lockstep ? ",oracle_feasible\n" : "\n";
  std::string ep_csv = "policy,trees,run,epoch,transactions,successes,success_ratio,stab_messages";
  ep_csv += o.relative ? ",relative_success\n" : "\n";
  std::string summary = "# fingerprint=" + fingerprint + "\n# dispersion=sample-stddev\n" + config_text(o);
  summary +=
      "policy,success_ratio,delay_hops,tx_messages,path_len,stab_messages,success_ratio_sd,delay_hops_sd,"
      "tx_messages_sd,path_len_sd,stab_messages_sd,trees,attempts,runs\n";

  for (const RoutingPolicy& policy : policies) {
    for (std::size_t trees : policy.uses_trees() ? tree_counts : std::vector<std::size_t>{tree_counts.front()}) {
      std::vector<double> sr, delay, msgs, plen, stab;
      for (std::size_t r = 0; r < o.runs; ++r) {
        SimParams p;
        p.trees = trees;
        p.attempts = o.attempts;
        p.retry_interval = o.tl;
        p.epoch = o.epoch;
        p.landmarks = lm;
        p.seed = o.seed + r;
        p.address_length = o.address_length;
        p.address_delivery = o.address_delivery;
        p.bits = o.bits;
        p.lockstep_oracle = o.lockstep;
        RunMetrics m;
        std::vector<std::optional<double>> rel;
        if (dynamic) {
          m = run_dynamic(g0, events, policy, p);
          if (o.relative) rel = relative_success(m, run_dynamic(g0, events, RoutingPolicy::parse("FF"), p));
        } else {
          std::vector<Transaction> txs;
          if (o.tx_per_run == 0) {
            txs = pool;
          } else {
            if (pool.empty()) throw InvalidInput("transaction pool is empty");
            Rng pick_rng(p.seed);
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            for (std::size_t i = 0; i < o.tx_per_run; ++i) txs.push_back(pool[pick(pick_rng)]);
          }
          m = run_static(g0, txs, policy, p);
        }
        const std::string prefix = policy.name() + ',' + std::to_string(trees) + ',' + std::to_string(r) + ',';
        for (const TransactionRecord& t : m.transactions) {
          tx_csv += prefix + std::to_string(t.index) + ',' + pbt::detail::format_time(t.time) + ',' +
                    std::to_string(t.src.value) + ',' + std::to_string(t.dst.value) + ',' + t.value.to_string() +
                    ',' + (t.success ? "1" : "0") + ',' + std::to_string(t.attempts) + ',' +
                    std::to_string(t.hop_delay) + ',' + std::to_string(t.messages) + ',' + fixed(t.path_length) +
                    ',' + std::to_string(t.stabilization);
          if (o.lockstep) tx_csv += std::string(",") + (t.oracle_feasible.value_or(false) ? "1" : "0");
          tx_csv += '\n';
        }
        for (const EpochRecord& e : m.epochs) {
          ep_csv += prefix + std::to_string(e.index) + ',' + std::to_string(e.transactions) + ',' +
                    std::to_string(e.successes) + ',' + fixed(e.success_ratio()) + ',' +
                    std::to_string(e.stabilization);
          if (o.relative) ep_csv += ',' + (rel[e.index] ? fixed(*rel[e.index]) : std::string());
          ep_csv += '\n';
        }
        sr.push_back(m.success_ratio());
        delay.push_back(m.mean_delay());
        msgs.push_back(m.mean_messages());
        plen.push_back(m.mean_path_length());
        stab.push_back(m.mean_stabilization());
      }
      const Stat a = summarize(sr), b = summarize(delay), c = summarize(msgs), d = summarize(plen),
                 e = summarize(stab);
      summary += policy.name() + ',' + fixed(a.mean) + ',' + fixed(b.mean) + ',' + fixed(c.mean) + ',' +
                 fixed(d.mean) + ',' + fixed(e.mean) + ',' + fixed(a.sd) + ',' + fixed(b.sd) + ',' + fixed(c.sd) +
                 ',' + fixed(d.sd) + ',' + fixed(e.sd) + ',' + std::to_string(policy.uses_trees() ? trees : 0) +
                 ',' + std::to_string(o.attempts) + ',' + std::to_string(o.runs) + '\n';
      log << policy.name() << " trees=" << trees << " success=" << fixed(a.mean, 4) << '\n';
    }
  }
  const std::filesystem::path out(o.out);
  std::filesystem::create_directories(out);
  write_file_atomic(out / "transactions.csv", tx_csv);
  write_file_atomic(out / "epochs.csv", ep_csv);
  write_file_atomic(out / "summary.csv", summary);
}

struct SummaryFile {
  std::string fingerprint;
  std::vector<std::vector<std::string>> rows;
};

inline SummaryFile read_summary(const std::string& path) {
  std::istringstream in(read_file(path));
  SummaryFile s;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# fingerprint=", 0) == 0) {
      s.fingerprint = line.substr(14);
    } else if (line.empty() || line[0] == '#') {
      continue;
    } else if (!header) {
      if (line.rfind("policy,success_ratio,", 0) != 0) throw InvalidInput(path + ": not a summary file");
      header = true;
    } else {
      std::vector<std::string> f = split_list(line);
      if (f.size() != 14) throw InvalidInput(path + ": malformed summary row");
      s.rows.push_back(std::move(f));
    }
  }
  if (s.fingerprint.empty()) throw InvalidInput(path + ": summary lacks a fingerprint");
  return s;
}

inline void cmd_compare(const std::vector<std::string>& paths, std::ostream& out) {
  if (paths.size() < 2) throw InvalidConfig("compare needs at least two summaries");
  std::vector<SummaryFile> files;
  for (const auto& p : paths) files.push_back(read_summary(p));
  for (const auto& f : files) {
    if (f.fingerprint != files.front().fingerprint) {
      throw InvalidConfig("summaries describe different workloads (fingerprint mismatch)");
    }
  }
  const char* names[] = {"success", "delay", "messages", "path_len", "stab"};
  out << std::left << std::setw(14) << "policy" << std::setw(6) << "trees";
  for (const char* n : names) out << std::setw(26) << n;
  out << '\n';
  for (const auto& f : files) {
    for (const auto& r : f.rows) {
      out << std::setw(14) << r[0] << std::setw(6) << r[11];
      for (int i = 0; i < 5; ++i) out << std::setw(26) << (r[1 + i] + " +- " + r[6 + i]);
      out << '\n';
    }
  }
}

// `run --config FILE` splices the file's key=value lines in as flags right
// after the subcommand, so anything given on the command line wins.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  if (args.size() < 2 || args[1] != "run") return args;
  for (std::size_t i = 2; i < args.size(); ++i) {
    std::string path;
    std::size_t used = 0;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1], used = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9), used = 1;
    } else {
      continue;
    }
    std::vector<std::string> flags;
    std::istringstream in(read_file(path));
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto b = line.find_first_not_of(" \t\r"), e = line.find_last_not_of(" \t\r");
      if (b == std::string::npos) continue;
      line = line.substr(b, e - b + 1);
      const auto eq = line.find('=');
      if (eq == std::string::npos || eq == 0) throw ParseError(n, path + ": expected key=value");
      std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      key.erase(key.find_last_not_of(" \t") + 1);
      value.erase(0, value.find_first_not_of(" \t"));
      if (key == "config") throw ParseError(n, path + ": nested config");
      flags.push_back("--" + key + "=" + value);
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + used));
    args.insert(args.begin() + 2, flags.begin(), flags.end());
    break;
  }
  return args;
}

}  // namespace detail

// Entry point shared by the pbtsim binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator for path-based payment routing in credit networks"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  detail::RunOptions ro;
  CLI::App* run = app.add_subcommand("run", "Run policies on a workload");
  std::string config_file;
  run->add_option("--config", config_file, "key=value file; keys are the long flag names");
  run->add_option("--mode", ro.mode, "static or dynamic")->capture_default_str();
  run->add_option("--policy", ro.policies, "Comma-separated policies, e.g. GE-RAND-OND,SW,FF")->capture_default_str();
  run->add_option("--trees", ro.trees, "Tree count N or range A..B")->capture_default_str();
  run->add_option("--attempts", ro.attempts, "Attempts per transaction")->capture_default_str();
  run->add_option("--tl", ro.tl, "Retry window in mean inter-transaction times (dynamic)")->capture_default_str();
  run->add_option("--epoch", ro.epoch, "Epoch length")->capture_default_str();
  run->add_option("--landmarks", ro.landmarks, "degree or random")->capture_default_str();
  run->add_option("--runs", ro.runs, "Runs; run r uses seed+r")->capture_default_str();
  run->add_option("--seed", ro.seed, "Base seed")->capture_default_str();
  run->add_option("--snapshot", ro.snapshot, "Snapshot CSV")->required();
  run->add_option("--transactions", ro.transactions, "Transaction CSV")->required();
  run->add_option("--link-changes", ro.link_changes, "Link change CSV (dynamic)");
  run->add_option("--tx-per-run", ro.tx_per_run, "Sample this many transactions per run (static, 0 = all)");
  run->add_flag("--feasible-only", ro.feasible_only, "Keep only max-flow feasible transactions (static)");
  run->add_flag("--lockstep", ro.lockstep, "Record max-flow feasibility before each deciding attempt");
  run->add_flag("--relative", ro.relative, "Add success relative to a max-flow twin run (dynamic)");
  run->add_flag("--address-delivery,!--no-address-delivery", ro.address_delivery,
                "Charge one message per tree and one hop for address delivery");
  run->add_option("--address-length", ro.address_length, "Return address length")->capture_default_str();
  run->add_option("--bits", ro.bits, "Bits per coordinate element")->capture_default_str();
  run->add_option("--out", ro.out, "Output directory")->required();

  std::vector<std::string> summaries;
  CLI::App* compare = app.add_subcommand("compare", "Compare summaries of one workload");
  compare->add_option("summaries", summaries, "summary.csv files")->required();

  SyntheticParams sp;
  std::string model = "scale-free";
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("generate", "Generate a synthetic workload");
  gen->add_option("--nodes", sp.nodes)->capture_default_str();
  gen->add_option("--model", model, "scale-free or small-world")->capture_default_str();
  gen->add_option("--attach", sp.attach)->capture_default_str();
  gen->add_option("--ring-degree", sp.ring_degree)->capture_default_str();
  gen->add_option("--shortcut-prob", sp.shortcut_prob)->capture_default_str();
  gen->add_option("--weight-min", sp.weight_min)->capture_default_str();
  gen->add_option("--weight-max", sp.weight_max)->capture_default_str();
  gen->add_option("--unidirectional", sp.unidirectional_fraction)->capture_default_str();
  gen->add_option("--tx-count", sp.transactions)->capture_default_str();
  gen->add_option("--value-min", sp.value_min)->capture_default_str();
  gen->add_option("--value-max", sp.value_max)->capture_default_str();
  gen->add_option("--interarrival", sp.mean_interarrival)->capture_default_str();
  gen->add_option("--seed", sp.seed)->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->required();

  std::string pre_snap, pre_tx, pre_ch, pre_out;
  CLI::App* pre = app.add_subcommand("preprocess", "Clean a raw workload");
  pre->add_option("--snapshot", pre_snap)->required();
  pre->add_option("--transactions", pre_tx)->required();
  pre->add_option("--link-changes", pre_ch);
  pre->add_option("--out", pre_out, "Output directory")->required();

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = detail::expand_config(std::move(args));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::vector<const char*> expanded;
  for (const auto& a : args) expanded.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(expanded.size()), expanded.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help(argc > 1 ? argv[1] : "");
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (run->parsed()) {
      detail::cmd_run(ro, err);
    } else if (compare->parsed()) {
      detail::cmd_compare(summaries, out);
    } else if (gen->parsed()) {
      if (model == "scale-free") sp.model = TopologyModel::scale_free;
      else if (model == "small-world") sp.model = TopologyModel::small_world;
      else throw InvalidConfig("model must be scale-free or small-world");
      const Workload w = generate_synthetic(sp);
      std::filesystem::create_directories(gen_out);
      write_file_atomic(std::filesystem::path(gen_out) / "snapshot.csv", serialize(w.snapshot));
      write_file_atomic(std::filesystem::path(gen_out) / "transactions.csv", serialize(w.transactions));
    } else if (pre->parsed()) {
      Workload raw;
      raw.snapshot = parse_text(read_file(pre_snap), [](std::istream& in) { return parse_snapshot(in); });
      raw.transactions = parse_text(read_file(pre_tx), [](std::istream& in) { return parse_transactions(in); });
      if (!pre_ch.empty()) {
        raw.link_changes = parse_text(read_file(pre_ch), [](std::istream& in) { return parse_link_changes(in); });
      }
      const PreprocessResult r = preprocess(raw);
      const std::filesystem::path dir(pre_out);
      std::filesystem::create_directories(dir);
      write_file_atomic(dir / "snapshot.csv", serialize(r.workload.snapshot));
      write_file_atomic(dir / "transactions.csv", serialize(r.workload.transactions));
      write_file_atomic(dir / "link_changes.csv", serialize(r.workload.link_changes));
      std::string ids = "id,original\n";
      for (std::size_t i = 0; i < r.original.size(); ++i) {
        ids += std::to_string(i) + ',' + std::to_string(r.original[i]) + '\n';
      }
      write_file_atomic(dir / "nodes.csv", ids);
      write_file_atomic(dir / "report.txt", r.report.to_text());
      out << r.report.to_text();
    }
  } catch (const InternalError& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace pbt::cli

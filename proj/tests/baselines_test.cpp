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

#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace {

using namespace pbt;
using pbt::testing::both;
using pbt::testing::cr;
using pbt::testing::nd;

std::vector<Embedding> trees(const CreditGraph& g, std::vector<std::uint32_t> landmarks, std::uint64_t seed = 1) {
  Rng rng(seed);
  std::vector<NodeId> l;
  for (auto x : landmarks) l.push_back(nd(x));
  return build_embeddings(g, l, rng);
}

std::vector<NodeId> ids(std::initializer_list<std::uint32_t> xs) {
  std::vector<NodeId> v;
  for (auto x : xs) v.push_back(nd(x));
  return v;
}

// 0 is the landmark; 1, 2 its children; 3, 4 under 1; 5 under 3.
CreditGraph sample_tree() {
  CreditGraph g(6);
  both(g, 0, 1, 9);
  both(g, 0, 2, 9);
  both(g, 1, 3, 9);
  both(g, 1, 4, 9);
  both(g, 3, 5, 9);
  return g;
}

TEST(LandmarkPaths, Examples) {
  const CreditGraph g = sample_tree();
  auto e = trees(g, {0});
  EXPECT_EQ(*landmark_paths(e, nd(1), nd(2))[0], ids({1, 0, 2}));
  EXPECT_EQ(*landmark_paths(e, nd(0), nd(5))[0], ids({0, 1, 3, 5}));
  EXPECT_EQ(*landmark_paths(e, nd(5), nd(0))[0], ids({5, 3, 1, 0}));
  // Deep siblings still pass the landmark.
  auto p = *landmark_paths(e, nd(5), nd(4))[0];
  EXPECT_EQ(p, ids({5, 3, 1, 0, 1, 4}));
  EXPECT_EQ(p.size() - 1, e[0].depth(nd(5)) + e[0].depth(nd(4)));
}

TEST(TreeOnlyPaths, Examples) {
  const CreditGraph g = sample_tree();
  auto e = trees(g, {0});
  EXPECT_EQ(*tree_only_paths(e, nd(3), nd(4))[0], ids({3, 1, 4}));
  EXPECT_EQ(*tree_only_paths(e, nd(5), nd(1))[0], ids({5, 3, 1}));
  EXPECT_EQ(*tree_only_paths(e, nd(1), nd(5))[0], ids({1, 3, 5}));
}

TEST(TreePaths, UnattachedEndpointFailsThatTree) {
  CreditGraph g(4);
  both(g, 0, 1, 1);
  both(g, 2, 3, 1);
  auto e = trees(g, {0, 2});
  auto lm = landmark_paths(e, nd(0), nd(1));
  EXPECT_TRUE(lm[0]);
  EXPECT_FALSE(lm[1]);
  EXPECT_FALSE(tree_only_paths(e, nd(0), nd(1))[1]);
  EXPECT_EQ(path_capacity(g, lm[1]), Credit{});
}

TEST(TreePaths, LengthIdentitiesAndOrdering) {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    CreditGraph g = pbt::testing::random_connected(30, 25, rng);
    auto lm = select_landmarks(g, 3, LandmarkMode::random, rng);
    auto e = build_embeddings(g, lm, rng);
    const NodeId s = nd(rng() % 30), t = nd(rng() % 30);
    if (s == t) continue;
    auto L = landmark_paths(e, s, t);
    auto T = tree_only_paths(e, s, t);
    Destination d = issue_addresses(e, t, 16, rng);
    for (std::size_t i = 0; i < e.size(); ++i) {
      ASSERT_EQ(T[i]->size() - 1, coord_distance(e[i].coord(s), e[i].coord(t)));
      ASSERT_EQ(L[i]->size() - 1, e[i].depth(s) + e[i].depth(t));
      ASSERT_EQ(T[i]->front(), s);
      ASSERT_EQ(T[i]->back(), t);
      for (const Link& k : links_of(*T[i])) {
        ASSERT_TRUE(e[i].parent(k.from) == k.to || e[i].parent(k.to) == k.from);
      }
      TreeRoute r = pbt::detail::greedy_walk(g, e[i], s, t, *d.addresses[i], Credit{}, false, rng);
      ASSERT_TRUE(r.reached);
      ASSERT_LE(r.path.hops(), T[i]->size() - 1);
      ASSERT_LE(T[i]->size(), L[i]->size());
    }
  }
}

TEST(MpcMinAssign, Examples) {
  Rng rng(1);
  const Credit one[] = {cr(10)};
  EXPECT_EQ(*mpc_min_assign(one, cr(7), rng), std::vector<Credit>{cr(7)});
  const Credit z33[] = {cr(3), cr(3)};
  EXPECT_FALSE(mpc_min_assign(z33, cr(7), rng));
  const Credit z51[] = {cr(5), cr(1)};
  for (int seed = 0; seed < 2000; ++seed) {
    Rng r(seed);
    auto out = mpc_min_assign(z51, cr(6), r);
    ASSERT_TRUE(out);
    ASSERT_EQ(*out, (std::vector<Credit>{cr(5), cr(1)}));
  }
  EXPECT_FALSE(mpc_min_assign(std::span<const Credit>{}, cr(1), rng));
}

TEST(MpcMinAssign, FeasibleInstancesRespectMinima) {
  Rng rng(2);
  int timeouts = 0;
  for (int i = 0; i < 20000; ++i) {
    const std::size_t k = 1 + rng() % 5;
    std::vector<Credit> z(k);
    Credit sum;
    for (auto& x : z) sum += x = Credit::from_micros(static_cast<std::int64_t>(rng() % 10'000'000));
    if (sum.is_zero()) continue;
    const Credit c = Credit::from_micros(1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(sum.micros())));
    auto out = mpc_min_assign(z, c, rng);
    if (!out) {
      ++timeouts;
      continue;
    }
    Credit total;
    for (std::size_t j = 0; j < k; ++j) {
      ASSERT_LE((*out)[j], z[j]);
      ASSERT_FALSE((*out)[j].is_negative());
      total += (*out)[j];
    }
    ASSERT_EQ(total, c);
  }
  EXPECT_LT(timeouts, 200);
}

TEST(MpcCost, HandCounted) {
  // Trees rooted at 0 and 1 on the sample tree.
  const CreditGraph g = sample_tree();
  auto e = trees(g, {0, 1});
  // Depths: tree 0: 5 -> 3, 4 -> 2, landmark 1 -> 1.
  //         tree 1: 5 -> 2, 4 -> 1, landmark 0 -> 1.
  auto c = mpc_cost(e, nd(5), nd(4));
  ASSERT_TRUE(c);
  EXPECT_EQ(c->messages, (3 + 2 + 3 + 1) + (2 + 1 + 2 + 1));
  EXPECT_EQ(c->hop_delay, 3 + 1 + 3);
}

TEST(MpcCost, UndeliverableWhenLandmarksSplit) {
  CreditGraph g(4);
  both(g, 0, 1, 1);
  both(g, 2, 3, 1);
  auto e = trees(g, {0, 2});
  EXPECT_FALSE(mpc_cost(e, nd(0), nd(1)));
}

TEST(MaxFlow, SingleLink) {
  CreditGraph g(2);
  g.set_link(nd(0), nd(1), cr(5));
  EXPECT_TRUE(max_flow(g, nd(0), nd(1), cr(5)).feasible);
  EXPECT_TRUE(max_flow(g, nd(0), nd(1), cr(2)).feasible);
  EXPECT_FALSE(max_flow(g, nd(0), nd(1), cr(5.000001)).feasible);
  EXPECT_FALSE(max_flow(g, nd(1), nd(0), cr(1)).feasible);
  EXPECT_FALSE(max_flow(g, nd(0), nd(0), cr(1)).feasible);
}

TEST(MaxFlow, Diamond) {
  CreditGraph g(4);
  g.set_link(nd(0), nd(1), cr(3));
  g.set_link(nd(1), nd(3), cr(3));
  g.set_link(nd(0), nd(2), cr(4));
  g.set_link(nd(2), nd(3), cr(4));
  FlowResult f = max_flow(g, nd(0), nd(3), Credit::max());
  EXPECT_EQ(f.value, cr(7));
  EXPECT_EQ(f.paths.size(), 2u);
  EXPECT_EQ(f.messages, f.hop_delay);
  EXPECT_GT(f.messages, 0u);
  FlowResult capped = max_flow(g, nd(0), nd(3), cr(2));
  EXPECT_EQ(capped.value, cr(2));
  EXPECT_TRUE(capped.feasible);
}

TEST(MaxFlow, UsesAvailableCreditOnly) {
  CreditGraph g(2);
  g.set_link(nd(0), nd(1), cr(5));
  g.reserve(nd(0), nd(1), cr(4));
  EXPECT_EQ(max_flow(g, nd(0), nd(1), Credit::max()).value, cr(1));
}

// Independent oracle: minimum s-t cut by enumerating every vertex subset.
Credit min_cut(const CreditGraph& g, NodeId s, NodeId t) {
  const std::size_t n = g.node_count();
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> s.value & 1) || (mask >> t.value & 1)) continue;
    std::int64_t cut = 0;
    g.for_each_link([&](Link e, const LinkState& st) {
      if ((mask >> e.from.value & 1) && !(mask >> e.to.value & 1)) cut += st.available().micros();
    });
    best = std::min(best, cut);
  }
  return Credit::from_micros(best);
}

TEST(MaxFlow, EqualsMinCutOnRandomSmallGraphs) {
  Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 9;
    CreditGraph g(n);
    const std::size_t m = rng() % (n * 3);
    for (std::size_t k = 0; k < m; ++k) {
      const NodeId a = nd(rng() % n), b = nd(rng() % n);
      if (a != b) g.set_link(a, b, Credit::from_micros(static_cast<std::int64_t>(rng() % 9'000'000)));
    }
    const NodeId s = nd(0), t = nd(static_cast<std::uint32_t>(n - 1));
    FlowResult f = max_flow(g, s, t, Credit::max());
    ASSERT_EQ(f.value, min_cut(g, s, t));
    // Decomposition carries the whole value without exceeding any link.
    Credit total;
    std::map<std::pair<std::uint32_t, std::uint32_t>, Credit> use;
    for (const auto& p : f.paths) {
      ASSERT_EQ(p.nodes.front(), s);
      ASSERT_EQ(p.nodes.back(), t);
      total += p.amount;
      for (const Link& e : p.links()) use[{e.from.value, e.to.value}] += p.amount;
    }
    ASSERT_EQ(total, f.value);
    for (auto& [k, u] : use) ASSERT_LE(u, g.available(nd(k.first), nd(k.second)));
  }
}

}  // namespace

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

Coordinate co(std::initializer_list<std::uint64_t> xs) {
  std::vector<Element> v;
  for (auto x : xs) v.push_back({0, x});
  return Coordinate(v);
}

TEST(Coordinate, DistanceExamples) {
  EXPECT_EQ(coord_distance(co({}), co({})), 0u);
  EXPECT_EQ(coord_distance(co({1}), co({1, 2})), 1u);
  EXPECT_EQ(coord_distance(co({1, 2}), co({1, 3})), 2u);
  EXPECT_EQ(coord_distance(co({1, 2, 3}), co({4})), 4u);
}

TEST(Coordinate, DistanceIsSymmetricAndZeroOnlyOnEqual) {
  Rng rng(1);
  std::uniform_int_distribution<int> len(0, 5), val(0, 2);
  for (int i = 0; i < 5000; ++i) {
    std::vector<Element> a(len(rng)), b(len(rng));
    for (auto& x : a) x = {0, static_cast<std::uint64_t>(val(rng))};
    for (auto& x : b) x = {0, static_cast<std::uint64_t>(val(rng))};
    const Coordinate ca(a), cb(b);
    EXPECT_EQ(coord_distance(ca, cb), coord_distance(cb, ca));
    EXPECT_EQ(coord_distance(ca, cb) == 0, ca == cb);
  }
}

TEST(Coordinate, PrefixRelation) {
  EXPECT_TRUE(is_prefix(co({}), co({7})));
  EXPECT_TRUE(is_prefix(co({7}), co({7})));
  EXPECT_FALSE(is_prefix(co({7, 1}), co({7, 2})));
  EXPECT_FALSE(is_prefix(co({7, 1}), co({7})));
  EXPECT_EQ(common_prefix_length(co({1, 2, 3}), co({1, 2, 4, 5})), 2u);
}

TEST(Coordinate, ExtendedAppendsOneElement) {
  const Coordinate c = co({1, 2});
  const Coordinate d = c.extended({9, 9});
  EXPECT_EQ(d.depth(), 3u);
  EXPECT_TRUE(is_prefix(c, d));
  EXPECT_EQ(d[2], (Element{9, 9}));
  EXPECT_EQ(c.depth(), 2u);
}

TEST(Coordinate, RandomElementRespectsBitWidth) {
  Rng rng(4);
  for (unsigned bits : {1u, 8u, 63u, 64u, 65u, 100u}) {
    for (int i = 0; i < 200; ++i) {
      const Element e = random_element(rng, bits);
      if (bits <= 64) {
        EXPECT_EQ(e.hi, 0u);
        if (bits < 64) { EXPECT_LT(e.lo, std::uint64_t{1} << bits); }
      } else {
        EXPECT_LT(e.hi, std::uint64_t{1} << (bits - 64));
      }
    }
  }
  bool high_bit = false;
  for (int i = 0; i < 64 && !high_bit; ++i) high_bit = random_element(rng, 128).hi >> 63;
  EXPECT_TRUE(high_bit);
}

}  // namespace

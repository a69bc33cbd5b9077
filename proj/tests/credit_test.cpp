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

#include <random>
#include <sstream>

#include "fixtures.hpp"

namespace {

using pbt::Credit;
using pbt::InvalidInput;

TEST(Credit, ParsesDecimalForms) {
  EXPECT_EQ(Credit::parse("10").micros(), 10'000'000);
  EXPECT_EQ(Credit::parse("1.5").micros(), 1'500'000);
  EXPECT_EQ(Credit::parse("0.000001").micros(), 1);
  EXPECT_EQ(Credit::parse("-2.25").micros(), -2'250'000);
  EXPECT_EQ(Credit::parse("007.100").micros(), 7'100'000);
}

TEST(Credit, RejectsMalformed) {
  for (const char* bad : {"", "-", "1.", ".5", "1.1234567", "abc", "1e3", "+1", "--1", "1.-5", "1,5", " 1",
                          "99999999999999999999"}) {
    EXPECT_THROW(Credit::parse(bad), InvalidInput) << bad;
  }
}

TEST(Credit, CanonicalFormTrimsZeros) {
  EXPECT_EQ(Credit::parse("3.500000").to_string(), "3.5");
  EXPECT_EQ(Credit::units(4).to_string(), "4");
  EXPECT_EQ(Credit::from_micros(-1).to_string(), "-0.000001");
  EXPECT_EQ(Credit{}.to_string(), "0");
  std::ostringstream os;
  os << Credit::from_micros(2'000'010);
  EXPECT_EQ(os.str(), "2.00001");
}

TEST(Credit, RoundTripsRandomValues) {
  pbt::Rng rng(7);
  std::uniform_int_distribution<std::int64_t> d(-1'000'000'000'000, 1'000'000'000'000);
  for (int i = 0; i < 20000; ++i) {
    const Credit c = Credit::from_micros(d(rng));
    EXPECT_EQ(Credit::parse(c.to_string()), c);
  }
}

TEST(Credit, ArithmeticIsExact) {
  Credit s;
  for (int i = 0; i < 10; ++i) s += Credit::parse("0.1");
  EXPECT_EQ(s, Credit::units(1));
  EXPECT_EQ(Credit::units(3) - Credit::units(5), -Credit::units(2));
  EXPECT_LT(Credit::units(1), Credit::parse("1.000001"));
  EXPECT_TRUE(Credit{}.is_zero());
  EXPECT_TRUE((-Credit::units(1)).is_negative());
  EXPECT_DOUBLE_EQ(Credit::parse("2.5").to_double(), 2.5);
}

}  // namespace

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
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include "pbt/errors.hpp"

namespace pbt {

// Fixed-point amount with six fractional decimal digits, stored as a
// signed count of micro-units. Link weights are never negative; signed
// values only arise from net balances and differences.
class Credit {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Credit() = default;

  static constexpr Credit from_micros(std::int64_t micros) {
    Credit c;
    c.micros_ = micros;
    return c;
  }
  static constexpr Credit units(std::int64_t whole) {
    return from_micros(whole * kScale);
  }
  static constexpr Credit max() {
    return from_micros(std::numeric_limits<std::int64_t>::max());
  }

  constexpr std::int64_t micros() const { return micros_; }
  constexpr bool is_zero() const { return micros_ == 0; }
  constexpr bool is_positive() const { return micros_ > 0; }
  constexpr bool is_negative() const { return micros_ < 0; }
  double to_double() const { return static_cast<double>(micros_) / kScale; }

  constexpr Credit& operator+=(Credit o) {
    micros_ += o.micros_;
    return *this;
  }
  constexpr Credit& operator-=(Credit o) {
    micros_ -= o.micros_;
    return *this;
  }
  friend constexpr Credit operator+(Credit a, Credit b) { return a += b; }
  friend constexpr Credit operator-(Credit a, Credit b) { return a -= b; }
  friend constexpr Credit operator-(Credit a) { return from_micros(-a.micros_); }
  friend constexpr auto operator<=>(Credit, Credit) = default;

  // Canonical decimal form: no trailing fractional zeros, no '.' for
  // whole amounts. parse(to_string(c)) == c for every c.
  std::string to_string() const {
    std::uint64_t mag = micros_ < 0 ? 0 - static_cast<std::uint64_t>(micros_)
                                    : static_cast<std::uint64_t>(micros_);
    std::string out = micros_ < 0 ? "-" : "";
    out += std::to_string(mag / kScale);
    std::uint64_t frac = mag % kScale;
    if (frac != 0) {
      std::string digits = std::to_string(frac);
      digits.insert(0, 6 - digits.size(), '0');
      while (digits.back() == '0') digits.pop_back();
      out += '.';
      out += digits;
    }
    return out;
  }

  // Accepts [-]digits[.digits] with at most six fractional digits.
  static Credit parse(std::string_view text) {
    auto fail = [&] {
      return InvalidInput("malformed credit value '" + std::string(text) + "'");
    };
    bool negative = false;
    std::string_view s = text;
    if (!s.empty() && s.front() == '-') {
      negative = true;
      s.remove_prefix(1);
    }
    auto dot = s.find('.');
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    auto digits = [](std::string_view d) {
      return std::all_of(d.begin(), d.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
    };
    if (whole.empty() || frac.size() > 6 || (dot != std::string_view::npos && frac.empty()) ||
        !digits(whole) || !digits(frac)) {
      throw fail();
    }
    std::int64_t w = 0;
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
    if (ec != std::errc{} || p != whole.data() + whole.size() ||
        w > std::numeric_limits<std::int64_t>::max() / kScale - 1) {
      throw fail();
    }
    std::int64_t f = 0;
    if (!frac.empty()) {
      auto [q, ec2] = std::from_chars(frac.data(), frac.data() + frac.size(), f);
      if (ec2 != std::errc{} || q != frac.data() + frac.size()) throw fail();
      for (std::size_t i = frac.size(); i < 6; ++i) f *= 10;
    }
    std::int64_t micros = w * kScale + f;
    return from_micros(negative ? -micros : micros);
  }

 private:
  std::int64_t micros_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, Credit c) { return os << c.to_string(); }

}  // namespace pbt

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
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pbt/graph.hpp"

namespace pbt {

// One b-bit coordinate element, b <= 128.
struct Element {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  friend constexpr auto operator<=>(const Element&, const Element&) = default;
};

inline Element random_element(Rng& rng, unsigned bits = 128) {
  Element e{rng(), rng()};
  if (bits < 128) {
    if (bits <= 64) {
      e.hi = 0;
      e.lo = bits == 64 ? e.lo : (e.lo & ((std::uint64_t{1} << bits) - 1));
    } else {
      e.hi &= (std::uint64_t{1} << (bits - 64)) - 1;
    }
  }
  return e;
}

// Prefix-embedding coordinate. The landmark holds the empty coordinate and
// a child extends its parent's coordinate by one random element.
class Coordinate {
 public:
  Coordinate() = default;
  explicit Coordinate(std::vector<Element> elements) : elements_(std::move(elements)) {}

  std::size_t depth() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  std::span<const Element> elements() const { return elements_; }
  const Element& operator[](std::size_t i) const { return elements_[i]; }

  Coordinate extended(Element e) const {
    Coordinate c = *this;
    c.elements_.push_back(e);
    return c;
  }

  friend bool operator==(const Coordinate&, const Coordinate&) = default;

 private:
  std::vector<Element> elements_;
};

inline std::size_t common_prefix_length(const Coordinate& a, const Coordinate& b) {
  auto [ia, ib] = std::mismatch(a.elements().begin(), a.elements().end(), b.elements().begin(),
                                b.elements().end());
  return static_cast<std::size_t>(ia - a.elements().begin());
}

// Tree distance between the nodes holding a and b.
inline std::size_t coord_distance(const Coordinate& a, const Coordinate& b) {
  return a.depth() + b.depth() - 2 * common_prefix_length(a, b);
}

// Non-strict: a coordinate is a prefix of itself.
inline bool is_prefix(const Coordinate& a, const Coordinate& b) {
  return a.depth() <= b.depth() && common_prefix_length(a, b) == a.depth();
}

}  // namespace pbt

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

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "pbt/coordinate.hpp"
#include "pbt/errors.hpp"

namespace pbt {

inline constexpr std::size_t kDefaultAddressLength = 16;

using Digest = std::array<unsigned char, crypto_shorthash_siphashx24_BYTES>;
using AddressKey = std::array<unsigned char, crypto_shorthash_siphashx24_KEYBYTES>;

inline Digest keyed_hash(const AddressKey& key, const Element& e) {
  std::array<unsigned char, 16> in;
  std::memcpy(in.data(), &e.hi, 8);
  std::memcpy(in.data() + 8, &e.lo, 8);
  Digest out;
  crypto_shorthash_siphashx24(out.data(), in.data(), in.size(), key.data());
  return out;
}

// Anonymous return address: a coordinate padded to a fixed length, each
// element replaced by its keyed hash. The key travels with the address.
struct ReturnAddress {
  std::vector<Digest> hashed;
  AddressKey key{};

  std::size_t length() const { return hashed.size(); }
  friend bool operator==(const ReturnAddress&, const ReturnAddress&) = default;
};

// What the receiver keeps after issuing an address: the padding elements
// let it recognize the address as its own.
struct IssuedAddress {
  ReturnAddress address;
  std::vector<Element> padding;
};

class CoordinateTooDeep : public InvalidConfig {
 public:
  CoordinateTooDeep(std::size_t depth, std::size_t length)
      : InvalidConfig("coordinate depth " + std::to_string(depth) +
                      " exceeds return address length " + std::to_string(length)) {}
};

inline IssuedAddress gen_return_address(const Coordinate& c, std::size_t length, Rng& rng,
                                        unsigned bits = 128) {
  if (c.depth() > length) throw CoordinateTooDeep(c.depth(), length);
  IssuedAddress out;
  for (std::size_t i = 0; i < out.address.key.size(); i += 8) {
    std::uint64_t r = rng();
    std::memcpy(out.address.key.data() + i, &r, 8);
  }
  out.address.hashed.reserve(length);
  for (const Element& e : c.elements()) out.address.hashed.push_back(keyed_hash(out.address.key, e));
  while (out.address.hashed.size() < length) {
    Element pad = random_element(rng, bits);
    out.padding.push_back(pad);
    out.address.hashed.push_back(keyed_hash(out.address.key, pad));
  }
  return out;
}

// Longest prefix of c whose keyed hashes match the address element-wise.
inline std::size_t hashed_prefix_length(const Coordinate& c, const ReturnAddress& addr) {
  const std::size_t n = std::min(c.depth(), addr.length());
  std::size_t i = 0;
  while (i < n && keyed_hash(addr.key, c[i]) == addr.hashed[i]) ++i;
  return i;
}

// Tree distance to the receiver shifted by (length - receiver depth).
inline std::size_t address_distance(const Coordinate& c, const ReturnAddress& addr) {
  return c.depth() + addr.length() - 2 * hashed_prefix_length(c, addr);
}

// True when own coordinate padded with own padding hashes to addr exactly.
inline bool recognizes(const Coordinate& own, std::span<const Element> padding,
                       const ReturnAddress& addr) {
  if (own.depth() + padding.size() != addr.length()) return false;
  if (hashed_prefix_length(own, addr) != own.depth()) return false;
  for (std::size_t i = 0; i < padding.size(); ++i) {
    if (keyed_hash(addr.key, padding[i]) != addr.hashed[own.depth() + i]) return false;
  }
  return true;
}

}  // namespace pbt

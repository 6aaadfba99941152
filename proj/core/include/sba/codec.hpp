// Copyright 2026 The SBA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sba/bytes.hpp"

namespace sba {

/// Fixed-width byte value with a tag type, so client ids, nonces, seed blocks
/// and digests cannot be mixed up at call sites.
template <std::size_t N, typename Tag>
class FixedBytes {
 public:
  static constexpr std::size_t kSize = N;

  FixedBytes() = default;

  /// Throws std::invalid_argument unless exactly N bytes are supplied.
  static FixedBytes from_bytes(std::span<const std::uint8_t> raw) {
    if (raw.size() != N) {
      throw std::invalid_argument("expected " + std::to_string(N) +
                                  " bytes, got " + std::to_string(raw.size()));
    }
    FixedBytes out;
    std::copy(raw.begin(), raw.end(), out.data_.begin());
    return out;
  }

  static std::optional<FixedBytes> from_hex(std::string_view hex) {
    auto raw = sba::from_hex(hex);
    if (!raw || raw->size() != N) return std::nullopt;
    return from_bytes(*raw);
  }

  static FixedBytes random() { return from_bytes(random_bytes(N)); }

  const std::array<std::uint8_t, N>& array() const { return data_; }
  std::span<const std::uint8_t> bytes() const { return data_; }
  std::uint8_t operator[](std::size_t i) const { return data_[i]; }

  std::string hex() const { return to_hex(data_); }

  bool is_zero() const {
    for (auto b : data_) {
      if (b != 0) return false;
    }
    return true;
  }

  friend bool operator==(const FixedBytes&, const FixedBytes&) = default;
  friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;

 private:
  std::array<std::uint8_t, N> data_{};
};

using ClientId = FixedBytes<16, struct ClientIdTag>;
using RandomNonce = FixedBytes<16, struct RandomNonceTag>;
using SeedBlock = FixedBytes<16, struct SeedBlockTag>;
using Digest = FixedBytes<32, struct DigestTag>;

/// Seed block derivation: out[i] = nonce[i] ^ id[i]. The same XOR recovers
/// either input from the other two values.
SeedBlock derive_seed(const RandomNonce& nonce, const ClientId& id);

/// Inverse of derive_seed in its first argument.
RandomNonce recover_nonce(const SeedBlock& seed, const ClientId& id);

/// XOR with the seed repeated cyclically: out[i] = data[i] ^ seed[i % 16].
/// Length preserving; applying it twice with the same seed is the identity.
Bytes xor_tile(std::span<const std::uint8_t> data, const SeedBlock& seed);

/// Same transform as xor_tile (XOR is self-inverse); named so decode sites
/// read as recovery.
Bytes recover_bytes(std::span<const std::uint8_t> encoded,
                    const SeedBlock& seed);

}  // namespace sba

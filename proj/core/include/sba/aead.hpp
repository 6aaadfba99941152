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
#include <span>
#include <string_view>

#include "sba/bytes.hpp"

namespace sba {

/// Optional at-rest encryption stage (AES-256-GCM). When enabled, content is
/// encrypted before it is stored or seed-encoded, so neither store ever holds
/// plaintext. Encoded layout: 12-byte nonce || ciphertext || 16-byte tag.
class Aead {
 public:
  /// Key is 32 bytes, hex-encoded in the config file.
  static Aead from_key_hex(std::string_view key_hex);

  Bytes encode(std::span<const std::uint8_t> plaintext) const;

  /// Throws integrity_violation when authentication fails.
  Bytes decode(std::span<const std::uint8_t> sealed) const;

 private:
  std::array<std::uint8_t, 32> key_{};
};

}  // namespace sba

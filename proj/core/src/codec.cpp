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

#include "sba/codec.hpp"

namespace sba {

SeedBlock derive_seed(const RandomNonce& nonce, const ClientId& id) {
  std::array<std::uint8_t, SeedBlock::kSize> out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = nonce[i] ^ id[i];
  }
  return SeedBlock::from_bytes(out);
}

RandomNonce recover_nonce(const SeedBlock& seed, const ClientId& id) {
  std::array<std::uint8_t, RandomNonce::kSize> out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = seed[i] ^ id[i];
  }
  return RandomNonce::from_bytes(out);
}

Bytes xor_tile(std::span<const std::uint8_t> data, const SeedBlock& seed) {
  Bytes out(data.size());
  const auto& key = seed.array();
  std::size_t k = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = data[i] ^ key[k];
    if (++k == key.size()) k = 0;
  }
  return out;
}

Bytes recover_bytes(std::span<const std::uint8_t> encoded,
                    const SeedBlock& seed) {
  return xor_tile(encoded, seed);
}

}  // namespace sba

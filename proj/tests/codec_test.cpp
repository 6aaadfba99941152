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

#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "sba/codec.hpp"
#include "sba/digest.hpp"
#include "test_util.hpp"

using namespace sba;
using namespace sba::test;

namespace {

RandomNonce nonce_of(const std::array<std::uint8_t, 16>& raw) {
  return RandomNonce::from_bytes(raw);
}

ClientId id_of(const std::array<std::uint8_t, 16>& raw) {
  return ClientId::from_bytes(raw);
}

}  // namespace

TEST_CASE("derive_seed: zero nonce is the XOR identity") {
  std::array<std::uint8_t, 16> zeros{};
  std::array<std::uint8_t, 16> cid_raw{};
  for (std::size_t i = 0; i < cid_raw.size(); ++i) {
    cid_raw[i] = static_cast<std::uint8_t>(i * 7 + 3);
  }
  SeedBlock seed = derive_seed(nonce_of(zeros), id_of(cid_raw));
  CHECK(seed.array() == cid_raw);
}

TEST_CASE("derive_seed: equal inputs annihilate") {
  std::array<std::uint8_t, 16> raw{};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<std::uint8_t>(0xa0 + i);
  }
  SeedBlock seed = derive_seed(nonce_of(raw), id_of(raw));
  CHECK(seed.is_zero());
}

TEST_CASE("derive_seed matches the independent XOR oracle") {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 1000; ++i) {
    std::array<std::uint8_t, 16> a{}, b{};
    for (auto& x : a) x = static_cast<std::uint8_t>(rng());
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    SeedBlock seed = derive_seed(nonce_of(a), id_of(b));
    CHECK(seed.array() == xor16_oracle(a, b));
  }
}

TEST_CASE("seed algebra: nonce is recoverable from seed and client id") {
  std::mt19937_64 rng(102);
  for (int i = 0; i < 1000; ++i) {
    std::array<std::uint8_t, 16> a{}, b{};
    for (auto& x : a) x = static_cast<std::uint8_t>(rng());
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    RandomNonce nonce = nonce_of(a);
    ClientId cid = id_of(b);
    SeedBlock seed = derive_seed(nonce, cid);
    CHECK(recover_nonce(seed, cid) == nonce);
  }
}

TEST_CASE("fixed-width types reject wrong lengths") {
  Bytes fifteen(15, 0x11);
  Bytes seventeen(17, 0x22);
  CHECK_THROWS_AS(ClientId::from_bytes(fifteen), std::invalid_argument);
  CHECK_THROWS_AS(SeedBlock::from_bytes(seventeen), std::invalid_argument);
  CHECK_THROWS_AS(Digest::from_bytes(fifteen), std::invalid_argument);
  CHECK_FALSE(ClientId::from_hex("abcd").has_value());
  CHECK_FALSE(ClientId::from_hex("zz").has_value());
}

TEST_CASE("xor_tile: empty input stays empty") {
  SeedBlock seed = SeedBlock::random();
  CHECK(xor_tile({}, seed).empty());
  CHECK(recover_bytes({}, seed).empty());
}

TEST_CASE("xor_tile: zeros reveal the repeated key stream") {
  // Format fact, and the reason tiled XOR is not confidentiality.
  SeedBlock seed = SeedBlock::random();
  Bytes zeros(32, 0x00);
  Bytes out = xor_tile(zeros, seed);
  REQUIRE(out.size() == 32);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i] == seed[i % 16]);
  }
}

TEST_CASE("xor_tile matches the tiled oracle on random data") {
  std::mt19937_64 rng(103);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = rng() % 5000;
    Bytes data = random_test_bytes(rng, n);
    std::array<std::uint8_t, 16> key{};
    for (auto& x : key) x = static_cast<std::uint8_t>(rng());
    SeedBlock seed = SeedBlock::from_bytes(key);

    Bytes got = xor_tile(data, seed);
    CHECK(got == tiled_xor_oracle(data, key));
    CHECK(got.size() == data.size());
    CHECK(recover_bytes(got, seed) == data);
  }
}

TEST_CASE("involution holds across tiling boundaries") {
  std::mt19937_64 rng(104);
  SeedBlock seed = SeedBlock::random();
  for (std::size_t n : {0u, 1u, 15u, 16u, 17u, 31u, 32u, 33u, 4096u}) {
    Bytes data = random_test_bytes(rng, n);
    CHECK(xor_tile(xor_tile(data, seed), seed) == data);
  }
}

TEST_CASE("compute_digest matches published vectors") {
  CHECK(compute_digest(std::string_view("")).hex() ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(compute_digest(std::string_view("abc")).hex() ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("compute_digest is deterministic on a large buffer") {
  std::mt19937_64 rng(105);
  Bytes buffer = random_test_bytes(rng, 1 << 20);
  CHECK(compute_digest(buffer) == compute_digest(buffer));
}

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

#include <benchmark/benchmark.h>

#include <random>

#include "sba/blob.hpp"
#include "sba/codec.hpp"
#include "sba/digest.hpp"

namespace {

sba::Bytes make_data(std::size_t n) {
  std::mt19937_64 rng(42);
  sba::Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

void BM_XorTile(benchmark::State& state) {
  const sba::Bytes data = make_data(static_cast<std::size_t>(state.range(0)));
  const sba::SeedBlock seed = sba::SeedBlock::random();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sba::xor_tile(data, seed));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          state.range(0));
}
BENCHMARK(BM_XorTile)->Range(1 << 10, 1 << 24);

void BM_DeriveSeed(benchmark::State& state) {
  const sba::RandomNonce nonce = sba::RandomNonce::random();
  const sba::ClientId id = sba::ClientId::random();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sba::derive_seed(nonce, id));
  }
}
BENCHMARK(BM_DeriveSeed);

void BM_ComputeDigest(benchmark::State& state) {
  const sba::Bytes data = make_data(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sba::compute_digest(data));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          state.range(0));
}
BENCHMARK(BM_ComputeDigest)->Range(1 << 10, 1 << 24);

void BM_BlobRoundTrip(benchmark::State& state) {
  sba::BackupBlob blob;
  blob.client_id = sba::ClientId::random();
  blob.file_id = "bench.bin";
  blob.payload = make_data(static_cast<std::size_t>(state.range(0)));
  blob.original_length = blob.payload.size();
  blob.original_digest = sba::compute_digest(blob.payload);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sba::parse_blob(sba::serialize_blob(blob)));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          state.range(0));
}
BENCHMARK(BM_BlobRoundTrip)->Range(1 << 10, 1 << 20);

}  // namespace

BENCHMARK_MAIN();

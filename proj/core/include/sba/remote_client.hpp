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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sba/bytes.hpp"
#include "sba/codec.hpp"

namespace sba {

struct BlobSummary {
  std::string file_id;
  std::uint64_t original_length = 0;
  Digest original_digest;
};

/// HTTP client the main service uses to talk to the remote backup service.
/// Authenticates with the shared server-to-server secret. Transport failures
/// surface as remote_unreachable; remote error bodies keep their code.
class RemoteClient {
 public:
  RemoteClient(std::string base_url, std::string shared_secret);
  ~RemoteClient();
  RemoteClient(const RemoteClient&) = delete;
  RemoteClient& operator=(const RemoteClient&) = delete;

  void put_seed(const ClientId& id, const SeedBlock& seed);
  SeedBlock get_seed(const ClientId& id);
  void put_blob(const ClientId& id, const std::string& file_id,
                std::span<const std::uint8_t> blob_bytes);
  Bytes get_blob(const ClientId& id, const std::string& file_id);
  std::vector<BlobSummary> list_blobs(const ClientId& id);
  bool health();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sba

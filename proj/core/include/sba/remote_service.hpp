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

#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "sba/codec.hpp"
#include "sba/remote_client.hpp"
#include "sba/store.hpp"

namespace sba {

struct RemoteConfig {
  std::string listen_address = "127.0.0.1:9421";
  std::string data_dir;
  std::string shared_secret;

  static RemoteConfig from_json_file(const std::filesystem::path& path);
  std::string to_json() const;
};

/// Splits "host:port". Throws on a malformed address.
std::pair<std::string, int> parse_listen_address(const std::string& address);

/// The remote backup service: a durable store for seed blocks and backup
/// blobs. Deliberately dumb — it stores and returns bytes verbatim and never
/// decodes a payload.
class RemoteService {
 public:
  explicit RemoteService(const RemoteConfig& config);
  ~RemoteService();
  RemoteService(const RemoteService&) = delete;
  RemoteService& operator=(const RemoteService&) = delete;

  /// Idempotent for an identical seed; a different seed for a registered
  /// client is refused with integrity_violation, since changing it would
  /// silently corrupt every existing backup.
  void store_seed(const ClientId& id, const SeedBlock& seed);
  SeedBlock get_seed(const ClientId& id);

  void store_blob(const ClientId& id, const std::string& file_id,
                  std::span<const std::uint8_t> blob_bytes);
  Bytes get_blob(const ClientId& id, const std::string& file_id);

  /// Sorted by file id.
  std::vector<BlobSummary> list_blobs(const ClientId& id);

  Store& store() { return *store_; }
  const RemoteConfig& config() const { return config_; }

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port.
  int listen_background(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocking serve on the configured listen_address.
  void run();
  void stop();

 private:
  struct Http;

  RemoteConfig config_;
  std::unique_ptr<Store> store_;
  std::mutex seeds_mu_;
  std::unique_ptr<Http> http_;
};

}  // namespace sba

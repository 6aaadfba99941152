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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sba/aead.hpp"
#include "sba/codec.hpp"
#include "sba/remote_client.hpp"
#include "sba/store.hpp"

namespace sba {

struct MainConfig {
  std::string listen_address = "127.0.0.1:9420";
  std::string data_dir;
  std::string remote_url;
  std::string remote_shared_secret;
  std::string admin_secret;
  std::string encryption_hook = "none";  // "none" or "aead"
  std::string aead_key_hex;              // required when hook is "aead"

  static MainConfig from_json_file(const std::filesystem::path& path);
  std::string to_json() const;
};

struct RegisterResult {
  ClientId client_id;
  std::string token_hex;  // returned exactly once; only its digest persists
};

struct RecoverOutcome {
  ClientId client_id;
  std::string file_id;
  bool restored = false;
  std::optional<ErrorCode> error;
  std::string message;
};

struct RecoverAllReport {
  std::vector<RecoverOutcome> files;
  std::size_t attempted = 0;
  std::size_t restored = 0;
  std::size_t failed = 0;
};

/// The main storage service. Holds the primary copy of every file, mirrors a
/// seed-encoded blob of each write to the remote service before
/// acknowledging (write-through), and restores lost or corrupted files from
/// those blobs.
class MainService {
 public:
  explicit MainService(const MainConfig& config);
  ~MainService();
  MainService(const MainService&) = delete;
  MainService& operator=(const MainService&) = delete;

  /// Generates a client id, nonce and bearer token; stores the seed block at
  /// the remote (acknowledged before anything persists locally), then the
  /// client record. All-or-nothing: a failed remote push registers nothing.
  RegisterResult register_client();

  /// Write-through put: the encoded blob must reach the remote before the
  /// local write commits. On remote failure the local store is untouched.
  FileRecord put_file(const ClientId& id, const std::string& file_id,
                      std::span<const std::uint8_t> body);

  std::pair<Bytes, FileRecord> get_file(const ClientId& id,
                                        const std::string& file_id);

  /// Removes the local copy, keeping a tombstone record. The remote blob is
  /// retained, so the file can be recovered.
  void delete_file(const ClientId& id, const std::string& file_id);

  /// Fetches the blob, decodes it with the client's seed, verifies the
  /// decoded content against the digest stored inside the blob, and puts the
  /// content back. Requires the record to be missing/corrupt unless force.
  FileRecord recover_file(const ClientId& id, const std::string& file_id,
                          bool force = false);

  /// fsck, then recover every missing/corrupt record. Per-file failures are
  /// reported, never aborting the sweep.
  RecoverAllReport recover_all(
      const std::optional<ClientId>& scope = std::nullopt);

  FsckReport verify(const std::optional<ClientId>& scope = std::nullopt,
                    const std::string& actor = "admin");

  /// The seed is never stored on this side: derived from the local nonce on
  /// demand, or fetched from the remote when the nonce is lost.
  SeedBlock seed_for(const ClientId& id);

  Store& store() { return *store_; }
  RemoteClient& remote() { return *remote_; }
  const MainConfig& config() const { return config_; }
  bool remote_healthy() { return remote_->health(); }

  int listen_background(const std::string& host = "127.0.0.1", int port = 0);
  void run();
  void stop();

 private:
  struct Http;

  std::shared_ptr<std::mutex> file_lock(const ClientId& id,
                                        const std::string& file_id);
  Bytes encode_at_rest(std::span<const std::uint8_t> body) const;
  Bytes decode_at_rest(std::span<const std::uint8_t> stored) const;

  MainConfig config_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<RemoteClient> remote_;
  std::optional<Aead> aead_;

  std::mutex lock_map_mu_;
  std::map<std::pair<std::string, std::string>, std::shared_ptr<std::mutex>>
      file_locks_;

  std::unique_ptr<Http> http_;
};

}  // namespace sba

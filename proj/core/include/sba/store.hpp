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
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sba/bytes.hpp"
#include "sba/codec.hpp"
#include "sba/errors.hpp"

namespace sba {

enum class StoreRole { main, remote };
enum class FileStatus { present, missing, corrupt };
enum class AuditAction { register_client, put, get, remove, recover, verify };
enum class AuditOutcome { ok, denied, error };

std::string_view to_string(StoreRole role);
std::string_view to_string(FileStatus status);
std::string_view to_string(AuditAction action);
std::string_view to_string(AuditOutcome outcome);
std::optional<StoreRole> store_role_from_string(std::string_view s);
std::optional<FileStatus> file_status_from_string(std::string_view s);
std::optional<AuditAction> audit_action_from_string(std::string_view s);
std::optional<AuditOutcome> audit_outcome_from_string(std::string_view s);

/// One registered client. A main-role store keeps the registration nonce and
/// the token digest; a remote-role store keeps the seed block instead.
struct ClientRecord {
  ClientId client_id;
  std::optional<RandomNonce> nonce;
  std::optional<SeedBlock> seed;
  std::optional<Digest> token_hash;
  std::string registered_at;
};

struct FileRecord {
  ClientId client_id;
  std::string file_id;
  std::uint64_t length = 0;
  Digest digest;
  std::string updated_at;
  FileStatus status = FileStatus::present;
};

/// Append-only audit record. `subject` is stored percent-escaped so the
/// tab-separated log line stays parseable for any file id.
struct AuditEntry {
  std::uint64_t seq = 0;
  std::string timestamp;
  std::string actor;  // client id hex, "admin", or "-" when unauthenticated
  AuditAction action = AuditAction::get;
  std::string subject;
  AuditOutcome outcome = AuditOutcome::ok;
};

struct FsckEntry {
  ClientId client_id;
  std::string file_id;
  FileStatus status = FileStatus::present;
};

struct FsckReport {
  std::vector<FsckEntry> entries;
  std::size_t present = 0;
  std::size_t missing = 0;
  std::size_t corrupt = 0;

  bool all_present() const { return missing == 0 && corrupt == 0; }
};

class Store;

/// Handle for a written-but-uncommitted object. The temp file is removed on
/// destruction unless the put was committed.
class StagedPut {
 public:
  StagedPut(StagedPut&& other) noexcept;
  StagedPut& operator=(StagedPut&&) = delete;
  StagedPut(const StagedPut&) = delete;
  ~StagedPut();

  const ClientId& client_id() const { return client_id_; }
  const std::string& file_id() const { return file_id_; }
  std::uint64_t length() const { return length_; }
  const Digest& digest() const { return digest_; }

 private:
  friend class Store;
  StagedPut() = default;

  std::filesystem::path temp_path_;
  ClientId client_id_;
  std::string file_id_;
  std::uint64_t length_ = 0;
  Digest digest_;
  bool live_ = false;
};

/// Durable store for one server role: manifest.json, a blobs/ tree and an
/// append-only audit.log under one root directory.
///
/// Thread contract: manifest mutations serialize on an internal writer lock,
/// audit appends serialize separately, object reads of distinct keys run
/// concurrently, and blob content I/O never happens under the manifest lock.
class Store {
 public:
  /// Opens (creating if needed) the store. Refuses a directory holding a
  /// manifest of a different role. Removes stale temp files and blob files
  /// that no manifest record references.
  static std::unique_ptr<Store> open(const std::filesystem::path& root,
                                     StoreRole role);

  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  StoreRole role() const { return role_; }
  const std::filesystem::path& root() const { return root_; }

  // Clients.
  void add_client(const ClientRecord& record);
  void update_client(const ClientRecord& record);
  void remove_client(const ClientId& id);
  std::optional<ClientRecord> find_client(const ClientId& id) const;
  std::vector<ClientRecord> clients() const;

  // Objects. put_object stages and commits in one call; the split form is
  // for callers that must interleave other work (the mirroring pipeline).
  FileRecord put_object(const ClientId& id, const std::string& file_id,
                        std::span<const std::uint8_t> bytes,
                        const Digest& digest);
  StagedPut stage_put(const ClientId& id, const std::string& file_id,
                      std::span<const std::uint8_t> bytes,
                      const Digest& digest);
  FileRecord commit_put(StagedPut&& staged);
  void abort_put(StagedPut&& staged) noexcept;

  /// Returns content and the (re-verified) record. A digest mismatch marks
  /// the record corrupt and raises integrity_violation; a missing blob file
  /// raises not_found.
  std::pair<Bytes, FileRecord> get_object(const ClientId& id,
                                          const std::string& file_id);

  /// Removes the blob but keeps the record as a tombstone (status missing),
  /// so recovery knows what was lost.
  void delete_object(const ClientId& id, const std::string& file_id);

  std::optional<FileRecord> find_file(const ClientId& id,
                                      const std::string& file_id) const;
  std::vector<FileRecord> files() const;
  std::vector<FileRecord> files_for(const ClientId& id) const;

  // Audit.
  std::uint64_t append_audit(const std::string& actor, AuditAction action,
                             const std::string& subject_raw,
                             AuditOutcome outcome);
  std::vector<AuditEntry> read_audit() const;

  /// Re-verifies every record (optionally one client's) against disk and
  /// updates statuses. Never modifies blob content.
  FsckReport fsck(const std::optional<ClientId>& scope = std::nullopt);

  std::filesystem::path blob_path(const ClientId& id,
                                  const std::string& file_id) const;
  std::filesystem::path manifest_path() const;
  std::filesystem::path audit_path() const;

 private:
  Store(std::filesystem::path root, StoreRole role);

  using FileKey = std::pair<std::string, std::string>;  // (cid hex, file id)

  void load_manifest();
  void save_manifest_locked();
  void cleanup_stray_files();
  void init_audit();
  std::shared_ptr<std::mutex> key_lock(const FileKey& key) const;

  std::filesystem::path root_;
  StoreRole role_;

  mutable std::mutex manifest_mu_;
  std::map<std::string, ClientRecord> clients_;
  std::map<FileKey, FileRecord> files_;

  mutable std::mutex audit_mu_;
  int audit_fd_ = -1;
  std::uint64_t next_seq_ = 1;

  mutable std::mutex key_map_mu_;
  mutable std::map<FileKey, std::shared_ptr<std::mutex>> key_locks_;
};

}  // namespace sba

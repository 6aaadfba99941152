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

#include "sba/store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sba/clock.hpp"
#include "sba/digest.hpp"
#include "sba/fault.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sba {

std::string_view to_string(StoreRole role) {
  return role == StoreRole::main ? "main" : "remote";
}

std::string_view to_string(FileStatus status) {
  switch (status) {
    case FileStatus::present: return "present";
    case FileStatus::missing: return "missing";
    case FileStatus::corrupt: return "corrupt";
  }
  return "corrupt";
}

std::string_view to_string(AuditAction action) {
  switch (action) {
    case AuditAction::register_client: return "register";
    case AuditAction::put: return "put";
    case AuditAction::get: return "get";
    case AuditAction::remove: return "delete";
    case AuditAction::recover: return "recover";
    case AuditAction::verify: return "verify";
  }
  return "get";
}

std::string_view to_string(AuditOutcome outcome) {
  switch (outcome) {
    case AuditOutcome::ok: return "ok";
    case AuditOutcome::denied: return "denied";
    case AuditOutcome::error: return "error";
  }
  return "error";
}

std::optional<StoreRole> store_role_from_string(std::string_view s) {
  if (s == "main") return StoreRole::main;
  if (s == "remote") return StoreRole::remote;
  return std::nullopt;
}

std::optional<FileStatus> file_status_from_string(std::string_view s) {
  if (s == "present") return FileStatus::present;
  if (s == "missing") return FileStatus::missing;
  if (s == "corrupt") return FileStatus::corrupt;
  return std::nullopt;
}

std::optional<AuditAction> audit_action_from_string(std::string_view s) {
  if (s == "register") return AuditAction::register_client;
  if (s == "put") return AuditAction::put;
  if (s == "get") return AuditAction::get;
  if (s == "delete") return AuditAction::remove;
  if (s == "recover") return AuditAction::recover;
  if (s == "verify") return AuditAction::verify;
  return std::nullopt;
}

std::optional<AuditOutcome> audit_outcome_from_string(std::string_view s) {
  if (s == "ok") return AuditOutcome::ok;
  if (s == "denied") return AuditOutcome::denied;
  if (s == "error") return AuditOutcome::error;
  return std::nullopt;
}

namespace {

std::atomic<std::uint64_t> g_temp_counter{0};

[[noreturn]] void throw_io(const std::string& what) {
  throw Error(ErrorCode::internal, what + ": " + std::strerror(errno));
}

struct FdGuard {
  int fd = -1;
  ~FdGuard() {
    if (fd >= 0) ::close(fd);
  }
};

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
  std::size_t off = 0;
  while (off < n) {
    ssize_t w = ::write(fd, data + off, n - off);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw_io("write failed");
    }
    off += static_cast<std::size_t>(w);
  }
}

void fsync_or_throw(int fd) {
  if (::fsync(fd) != 0) throw_io("fsync failed");
}

void fsync_dir(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

/// Reads the whole file; returns false if it does not exist.
bool read_file_bytes(const fs::path& path, Bytes& out) {
  FdGuard fd{::open(path.c_str(), O_RDONLY)};
  if (fd.fd < 0) {
    if (errno == ENOENT) return false;
    throw_io("open failed for " + path.string());
  }
  struct stat st{};
  if (::fstat(fd.fd, &st) != 0) throw_io("stat failed");
  out.clear();
  out.resize(static_cast<std::size_t>(st.st_size));
  std::size_t off = 0;
  while (off < out.size()) {
    ssize_t r = ::read(fd.fd, out.data() + off, out.size() - off);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw_io("read failed");
    }
    if (r == 0) break;
    off += static_cast<std::size_t>(r);
  }
  out.resize(off);
  return true;
}

std::string unique_temp_name(const char* prefix) {
  return std::string(prefix) + std::to_string(::getpid()) + "." +
         std::to_string(g_temp_counter.fetch_add(1));
}

constexpr char kManifestName[] = "manifest.json";
constexpr char kManifestTempPrefix[] = "manifest.json.tmp.";
constexpr char kBlobTempPrefix[] = ".tmp.";
constexpr char kAuditName[] = "audit.log";

json client_to_json(const ClientRecord& rec) {
  json j;
  j["client_id"] = rec.client_id.hex();
  j["registered_at"] = rec.registered_at;
  if (rec.nonce) j["nonce"] = rec.nonce->hex();
  if (rec.seed) j["seed"] = rec.seed->hex();
  if (rec.token_hash) j["token_hash"] = rec.token_hash->hex();
  return j;
}

json file_to_json(const FileRecord& rec) {
  json j;
  j["client_id"] = rec.client_id.hex();
  j["file_id"] = rec.file_id;
  j["length"] = rec.length;
  j["digest"] = rec.digest.hex();
  j["updated_at"] = rec.updated_at;
  j["status"] = std::string(to_string(rec.status));
  return j;
}

[[noreturn]] void bad_manifest(const std::string& why) {
  throw Error(ErrorCode::internal, "manifest invalid: " + why);
}

}  // namespace

StagedPut::StagedPut(StagedPut&& other) noexcept
    : temp_path_(std::move(other.temp_path_)),
      client_id_(other.client_id_),
      file_id_(std::move(other.file_id_)),
      length_(other.length_),
      digest_(other.digest_),
      live_(other.live_) {
  other.live_ = false;
}

StagedPut::~StagedPut() {
  if (live_) {
    std::error_code ec;
    fs::remove(temp_path_, ec);
  }
}

Store::Store(fs::path root, StoreRole role)
    : root_(std::move(root)), role_(role) {}

Store::~Store() {
  if (audit_fd_ >= 0) ::close(audit_fd_);
}

std::unique_ptr<Store> Store::open(const fs::path& root, StoreRole role) {
  std::unique_ptr<Store> store(new Store(root, role));
  std::error_code ec;
  fs::create_directories(root / "blobs", ec);
  if (ec) {
    throw Error(ErrorCode::internal,
                "cannot create store directories under " + root.string());
  }
  store->load_manifest();
  if (!fs::exists(store->manifest_path())) {
    // Stamp the directory with its role right away, so a later open with
    // the other role is refused even before any data lands.
    std::lock_guard lock(store->manifest_mu_);
    store->save_manifest_locked();
  }
  store->cleanup_stray_files();
  store->init_audit();
  return store;
}

std::filesystem::path Store::manifest_path() const {
  return root_ / kManifestName;
}

std::filesystem::path Store::audit_path() const { return root_ / kAuditName; }

std::filesystem::path Store::blob_path(const ClientId& id,
                                       const std::string& file_id) const {
  return root_ / "blobs" / id.hex() / escape_component(file_id);
}

void Store::load_manifest() {
  Bytes raw;
  if (!read_file_bytes(manifest_path(), raw)) return;  // fresh store

  json j;
  try {
    j = json::parse(raw.begin(), raw.end());
  } catch (const json::exception& e) {
    bad_manifest(e.what());
  }
  if (!j.is_object() || j.value("format_version", 0) != 1) {
    bad_manifest("unsupported format_version");
  }
  auto stored_role = store_role_from_string(j.value("role", ""));
  if (!stored_role) bad_manifest("unknown role");
  if (*stored_role != role_) {
    throw Error(ErrorCode::internal,
                root_.string() + " already holds a " +
                    std::string(to_string(*stored_role)) +
                    "-role store; refusing to open it as " +
                    std::string(to_string(role_)));
  }

  for (const auto& c : j.value("clients", json::array())) {
    ClientRecord rec;
    auto id = ClientId::from_hex(c.value("client_id", ""));
    if (!id) bad_manifest("bad client_id");
    rec.client_id = *id;
    rec.registered_at = c.value("registered_at", "");
    if (c.contains("nonce")) {
      auto nonce = RandomNonce::from_hex(c["nonce"].get<std::string>());
      if (!nonce) bad_manifest("bad nonce");
      rec.nonce = *nonce;
    }
    if (c.contains("seed")) {
      auto seed = SeedBlock::from_hex(c["seed"].get<std::string>());
      if (!seed) bad_manifest("bad seed");
      rec.seed = *seed;
    }
    if (c.contains("token_hash")) {
      auto hash = Digest::from_hex(c["token_hash"].get<std::string>());
      if (!hash) bad_manifest("bad token_hash");
      rec.token_hash = *hash;
    }
    if (!clients_.emplace(rec.client_id.hex(), rec).second) {
      bad_manifest("duplicate client " + rec.client_id.hex());
    }
  }

  for (const auto& f : j.value("files", json::array())) {
    FileRecord rec;
    auto id = ClientId::from_hex(f.value("client_id", ""));
    if (!id) bad_manifest("bad file client_id");
    rec.client_id = *id;
    rec.file_id = f.value("file_id", "");
    if (rec.file_id.empty()) bad_manifest("empty file_id");
    rec.length = f.value("length", std::uint64_t{0});
    auto digest = Digest::from_hex(f.value("digest", ""));
    if (!digest) bad_manifest("bad file digest");
    rec.digest = *digest;
    rec.updated_at = f.value("updated_at", "");
    auto status = file_status_from_string(f.value("status", ""));
    if (!status) bad_manifest("bad file status");
    rec.status = *status;
    if (clients_.find(rec.client_id.hex()) == clients_.end()) {
      bad_manifest("file record references unknown client " +
                   rec.client_id.hex());
    }
    FileKey key{rec.client_id.hex(), rec.file_id};
    if (!files_.emplace(key, rec).second) {
      bad_manifest("duplicate file record " + rec.file_id);
    }
  }
}

void Store::save_manifest_locked() {
  json j;
  j["format_version"] = 1;
  j["role"] = std::string(to_string(role_));
  json clients = json::array();
  for (const auto& [hex, rec] : clients_) clients.push_back(client_to_json(rec));
  json files = json::array();
  for (const auto& [key, rec] : files_) files.push_back(file_to_json(rec));
  j["clients"] = std::move(clients);
  j["files"] = std::move(files);
  std::string text = j.dump(2);
  text.push_back('\n');

  fs::path temp = root_ / unique_temp_name(kManifestTempPrefix);
  {
    FdGuard fd{::open(temp.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644)};
    if (fd.fd < 0) throw_io("cannot create manifest temp");
    try {
      write_all(fd.fd, reinterpret_cast<const std::uint8_t*>(text.data()),
                text.size());
      fsync_or_throw(fd.fd);
    } catch (const CrashPointHit&) {
      throw;
    } catch (...) {
      std::error_code ec;
      fs::remove(temp, ec);
      throw;
    }
  }
  fault_point("storage.manifest.after_temp_write");
  if (::rename(temp.c_str(), manifest_path().c_str()) != 0) {
    std::error_code ec;
    fs::remove(temp, ec);
    throw_io("manifest rename failed");
  }
  fault_point("storage.manifest.after_rename");
  fsync_dir(root_);
}

void Store::cleanup_stray_files() {
  std::error_code ec;

  for (const auto& entry : fs::directory_iterator(root_, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(kManifestTempPrefix, 0) == 0) fs::remove(entry.path(), ec);
  }

  fs::path blobs = root_ / "blobs";
  for (const auto& dir : fs::directory_iterator(blobs, ec)) {
    const std::string cid_hex = dir.path().filename().string();
    const bool known_client = clients_.find(cid_hex) != clients_.end();
    if (!dir.is_directory()) {
      fs::remove(dir.path(), ec);
      continue;
    }
    if (!known_client) {
      fs::remove_all(dir.path(), ec);
      continue;
    }
    for (const auto& blob : fs::directory_iterator(dir.path(), ec)) {
      const std::string name = blob.path().filename().string();
      if (name.rfind(kBlobTempPrefix, 0) == 0) {
        fs::remove(blob.path(), ec);
        continue;
      }
      auto file_id = unescape_component(name);
      if (!file_id ||
          files_.find(FileKey{cid_hex, *file_id}) == files_.end()) {
        fs::remove(blob.path(), ec);
      }
    }
  }
}

void Store::init_audit() {
  // Recover the next sequence number from whatever is already on disk.
  std::ifstream in(audit_path());
  std::string line;
  std::uint64_t max_seq = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    errno = 0;
    char* end = nullptr;
    std::uint64_t seq = std::strtoull(line.c_str(), &end, 10);
    if (end != line.c_str() && errno == 0 && seq > max_seq) max_seq = seq;
  }
  in.close();
  next_seq_ = max_seq + 1;

  audit_fd_ = ::open(audit_path().c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (audit_fd_ < 0) throw_io("cannot open audit log");
}

std::shared_ptr<std::mutex> Store::key_lock(const FileKey& key) const {
  std::lock_guard lock(key_map_mu_);
  auto& slot = key_locks_[key];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

void Store::add_client(const ClientRecord& record) {
  if (role_ == StoreRole::main && !record.nonce) {
    throw std::invalid_argument("main-role client record requires a nonce");
  }
  if (role_ == StoreRole::remote && !record.seed) {
    throw std::invalid_argument("remote-role client record requires a seed");
  }
  std::lock_guard lock(manifest_mu_);
  auto [it, inserted] = clients_.emplace(record.client_id.hex(), record);
  if (!inserted) {
    throw Error(ErrorCode::integrity_violation,
                "client " + record.client_id.hex() + " already registered");
  }
  try {
    save_manifest_locked();
  } catch (...) {
    clients_.erase(record.client_id.hex());
    throw;
  }
}

void Store::update_client(const ClientRecord& record) {
  std::lock_guard lock(manifest_mu_);
  clients_[record.client_id.hex()] = record;
  save_manifest_locked();
}

void Store::remove_client(const ClientId& id) {
  {
    std::lock_guard lock(manifest_mu_);
    if (clients_.erase(id.hex()) == 0) {
      throw Error(ErrorCode::not_found, "unknown client " + id.hex());
    }
    for (auto it = files_.begin(); it != files_.end();) {
      if (it->first.first == id.hex()) {
        it = files_.erase(it);
      } else {
        ++it;
      }
    }
    save_manifest_locked();
  }
  std::error_code ec;
  fs::remove_all(root_ / "blobs" / id.hex(), ec);
}

std::optional<ClientRecord> Store::find_client(const ClientId& id) const {
  std::lock_guard lock(manifest_mu_);
  auto it = clients_.find(id.hex());
  if (it == clients_.end()) return std::nullopt;
  return it->second;
}

std::vector<ClientRecord> Store::clients() const {
  std::lock_guard lock(manifest_mu_);
  std::vector<ClientRecord> out;
  out.reserve(clients_.size());
  for (const auto& [hex, rec] : clients_) out.push_back(rec);
  return out;
}

StagedPut Store::stage_put(const ClientId& id, const std::string& file_id,
                           std::span<const std::uint8_t> bytes,
                           const Digest& digest) {
  {
    std::lock_guard lock(manifest_mu_);
    if (clients_.find(id.hex()) == clients_.end()) {
      throw Error(ErrorCode::not_registered, "unknown client " + id.hex());
    }
  }
  fs::path dir = root_ / "blobs" / id.hex();
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::path temp = dir / unique_temp_name(kBlobTempPrefix);

  {
    FdGuard fd{::open(temp.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644)};
    if (fd.fd < 0) throw_io("cannot create blob temp");
    try {
      const std::size_t half = bytes.size() / 2;
      write_all(fd.fd, bytes.data(), half);
      fault_point("storage.put.mid_temp_write");
      write_all(fd.fd, bytes.data() + half, bytes.size() - half);
      fsync_or_throw(fd.fd);
    } catch (const CrashPointHit&) {
      throw;  // a crash leaves the temp file behind; open() cleans it up
    } catch (...) {
      fs::remove(temp, ec);
      throw;
    }
  }
  fault_point("storage.put.after_temp_write");

  StagedPut staged;
  staged.temp_path_ = temp;
  staged.client_id_ = id;
  staged.file_id_ = file_id;
  staged.length_ = bytes.size();
  staged.digest_ = digest;
  staged.live_ = true;
  return staged;
}

FileRecord Store::commit_put(StagedPut&& staged) {
  FileKey key{staged.client_id_.hex(), staged.file_id_};
  auto lock_ptr = key_lock(key);
  std::lock_guard key_guard(*lock_ptr);

  fs::path final_path = blob_path(staged.client_id_, staged.file_id_);
  if (::rename(staged.temp_path_.c_str(), final_path.c_str()) != 0) {
    throw_io("blob rename failed");
  }
  staged.live_ = false;
  fault_point("storage.put.after_blob_rename");
  fsync_dir(final_path.parent_path());

  FileRecord rec;
  rec.client_id = staged.client_id_;
  rec.file_id = staged.file_id_;
  rec.length = staged.length_;
  rec.digest = staged.digest_;
  rec.updated_at = now_iso8601_utc();
  rec.status = FileStatus::present;
  {
    std::lock_guard lock(manifest_mu_);
    if (clients_.find(key.first) == clients_.end()) {
      throw Error(ErrorCode::not_registered, "client removed during put");
    }
    files_[key] = rec;
    save_manifest_locked();
  }
  return rec;
}

void Store::abort_put(StagedPut&& staged) noexcept {
  if (staged.live_) {
    std::error_code ec;
    fs::remove(staged.temp_path_, ec);
    staged.live_ = false;
  }
}

FileRecord Store::put_object(const ClientId& id, const std::string& file_id,
                             std::span<const std::uint8_t> bytes,
                             const Digest& digest) {
  StagedPut staged = stage_put(id, file_id, bytes, digest);
  return commit_put(std::move(staged));
}

std::pair<Bytes, FileRecord> Store::get_object(const ClientId& id,
                                               const std::string& file_id) {
  FileKey key{id.hex(), file_id};
  auto lock_ptr = key_lock(key);
  std::lock_guard key_guard(*lock_ptr);

  FileRecord rec;
  {
    std::lock_guard lock(manifest_mu_);
    auto it = files_.find(key);
    if (it == files_.end()) {
      throw Error(ErrorCode::not_found, "no record for " + file_id);
    }
    rec = it->second;
  }
  if (rec.status == FileStatus::missing) {
    throw Error(ErrorCode::not_found,
                file_id + " content is missing; recovery required");
  }

  Bytes bytes;
  if (!read_file_bytes(blob_path(id, file_id), bytes)) {
    std::lock_guard lock(manifest_mu_);
    auto it = files_.find(key);
    if (it != files_.end() && it->second.status != FileStatus::missing) {
      it->second.status = FileStatus::missing;
      save_manifest_locked();
    }
    throw Error(ErrorCode::not_found,
                file_id + " content is missing; recovery required");
  }

  const Digest actual = compute_digest(bytes);
  const bool intact = bytes.size() == rec.length && actual == rec.digest;
  if (!intact) {
    std::lock_guard lock(manifest_mu_);
    auto it = files_.find(key);
    if (it != files_.end() && it->second.status != FileStatus::corrupt) {
      it->second.status = FileStatus::corrupt;
      save_manifest_locked();
    }
    throw Error(ErrorCode::integrity_violation,
                file_id + " does not match its recorded digest");
  }
  if (rec.status != FileStatus::present) {
    std::lock_guard lock(manifest_mu_);
    auto it = files_.find(key);
    if (it != files_.end()) {
      it->second.status = FileStatus::present;
      save_manifest_locked();
      rec = it->second;
    }
  }
  return {std::move(bytes), rec};
}

void Store::delete_object(const ClientId& id, const std::string& file_id) {
  FileKey key{id.hex(), file_id};
  auto lock_ptr = key_lock(key);
  std::lock_guard key_guard(*lock_ptr);

  {
    std::lock_guard lock(manifest_mu_);
    auto it = files_.find(key);
    if (it == files_.end()) {
      throw Error(ErrorCode::not_found, "no record for " + file_id);
    }
    if (it->second.status == FileStatus::missing) {
      throw Error(ErrorCode::not_found, file_id + " is already deleted");
    }
  }
  std::error_code ec;
  fs::remove(blob_path(id, file_id), ec);
  {
    std::lock_guard lock(manifest_mu_);
    auto it = files_.find(key);
    if (it != files_.end()) {
      it->second.status = FileStatus::missing;
      it->second.updated_at = now_iso8601_utc();
      save_manifest_locked();
    }
  }
}

std::optional<FileRecord> Store::find_file(const ClientId& id,
                                           const std::string& file_id) const {
  std::lock_guard lock(manifest_mu_);
  auto it = files_.find(FileKey{id.hex(), file_id});
  if (it == files_.end()) return std::nullopt;
  return it->second;
}

std::vector<FileRecord> Store::files() const {
  std::lock_guard lock(manifest_mu_);
  std::vector<FileRecord> out;
  out.reserve(files_.size());
  for (const auto& [key, rec] : files_) out.push_back(rec);
  return out;
}

std::vector<FileRecord> Store::files_for(const ClientId& id) const {
  std::lock_guard lock(manifest_mu_);
  std::vector<FileRecord> out;
  for (const auto& [key, rec] : files_) {
    if (key.first == id.hex()) out.push_back(rec);
  }
  return out;
}

std::uint64_t Store::append_audit(const std::string& actor, AuditAction action,
                                  const std::string& subject_raw,
                                  AuditOutcome outcome) {
  const std::string subject =
      subject_raw == "-" ? "-" : escape_component(subject_raw);
  std::lock_guard lock(audit_mu_);
  const std::uint64_t seq = next_seq_++;
  std::ostringstream line;
  line << seq << '\t' << now_iso8601_utc() << '\t' << actor << '\t'
       << to_string(action) << '\t' << subject << '\t' << to_string(outcome)
       << '\n';
  const std::string text = line.str();
  write_all(audit_fd_, reinterpret_cast<const std::uint8_t*>(text.data()),
            text.size());
  fsync_or_throw(audit_fd_);
  return seq;
}

std::vector<AuditEntry> Store::read_audit() const {
  std::lock_guard lock(audit_mu_);
  std::vector<AuditEntry> out;
  std::ifstream in(audit_path());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string seq_s, ts, actor, action_s, subject, outcome_s;
    if (!std::getline(fields, seq_s, '\t') || !std::getline(fields, ts, '\t') ||
        !std::getline(fields, actor, '\t') ||
        !std::getline(fields, action_s, '\t') ||
        !std::getline(fields, subject, '\t') ||
        !std::getline(fields, outcome_s)) {
      continue;
    }
    auto action = audit_action_from_string(action_s);
    auto outcome = audit_outcome_from_string(outcome_s);
    if (!action || !outcome) continue;
    AuditEntry entry;
    entry.seq = std::strtoull(seq_s.c_str(), nullptr, 10);
    entry.timestamp = ts;
    entry.actor = actor;
    entry.action = *action;
    entry.subject = subject;
    entry.outcome = *outcome;
    out.push_back(std::move(entry));
  }
  return out;
}

FsckReport Store::fsck(const std::optional<ClientId>& scope) {
  std::vector<FileRecord> snapshot;
  {
    std::lock_guard lock(manifest_mu_);
    for (const auto& [key, rec] : files_) {
      if (scope && key.first != scope->hex()) continue;
      snapshot.push_back(rec);
    }
  }

  FsckReport report;
  for (const auto& snap : snapshot) {
    FileKey key{snap.client_id.hex(), snap.file_id};
    auto lock_ptr = key_lock(key);
    std::lock_guard key_guard(*lock_ptr);

    FileRecord rec;
    {
      std::lock_guard lock(manifest_mu_);
      auto it = files_.find(key);
      if (it == files_.end()) continue;  // deleted since the snapshot
      rec = it->second;
    }

    FileStatus verdict;
    Bytes bytes;
    if (!read_file_bytes(blob_path(rec.client_id, rec.file_id), bytes)) {
      verdict = FileStatus::missing;
    } else if (bytes.size() == rec.length &&
               compute_digest(bytes) == rec.digest) {
      verdict = FileStatus::present;
    } else {
      verdict = FileStatus::corrupt;
    }

    {
      std::lock_guard lock(manifest_mu_);
      auto it = files_.find(key);
      if (it == files_.end()) continue;
      if (it->second.status != verdict) {
        it->second.status = verdict;
        save_manifest_locked();
      }
    }
    report.entries.push_back({rec.client_id, rec.file_id, verdict});
    switch (verdict) {
      case FileStatus::present: ++report.present; break;
      case FileStatus::missing: ++report.missing; break;
      case FileStatus::corrupt: ++report.corrupt; break;
    }
  }
  return report;
}

}  // namespace sba

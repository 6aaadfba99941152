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

#include "sba/main_service.hpp"

#include <fstream>
#include <iostream>

#include <json.hpp>

#include "sba/blob.hpp"
#include "sba/clock.hpp"
#include "sba/digest.hpp"
#include "sba/fault.hpp"
#include "sba/protocol.hpp"
#include "sba/remote_service.hpp"  // parse_listen_address
#include "http_common.hpp"

using nlohmann::json;

namespace sba {

MainConfig MainConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::internal, "cannot read config " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::internal,
                "config " + path.string() + " is not valid JSON: " + e.what());
  }
  MainConfig config;
  config.listen_address = j.value("listen_address", config.listen_address);
  config.data_dir = j.value("data_dir", "");
  config.remote_url = j.value("remote_url", "");
  config.remote_shared_secret = j.value("remote_shared_secret", "");
  config.admin_secret = j.value("admin_secret", "");
  config.encryption_hook = j.value("encryption_hook", "none");
  config.aead_key_hex = j.value("aead_key_hex", "");
  for (const auto& [field, value] :
       std::initializer_list<std::pair<const char*, const std::string&>>{
           {"data_dir", config.data_dir},
           {"remote_url", config.remote_url},
           {"remote_shared_secret", config.remote_shared_secret},
           {"admin_secret", config.admin_secret}}) {
    if (value.empty()) {
      throw Error(ErrorCode::internal,
                  std::string("config is missing ") + field);
    }
  }
  if (config.encryption_hook != "none" && config.encryption_hook != "aead") {
    throw Error(ErrorCode::internal,
                "encryption_hook must be \"none\" or \"aead\"");
  }
  return config;
}

std::string MainConfig::to_json() const {
  json j;
  j["listen_address"] = listen_address;
  j["data_dir"] = data_dir;
  j["remote_url"] = remote_url;
  j["remote_shared_secret"] = remote_shared_secret;
  j["admin_secret"] = admin_secret;
  j["encryption_hook"] = encryption_hook;
  if (!aead_key_hex.empty()) j["aead_key_hex"] = aead_key_hex;
  return j.dump(2);
}

struct MainService::Http : detail::BackgroundServer {};

MainService::MainService(const MainConfig& config)
    : config_(config),
      store_(Store::open(config.data_dir, StoreRole::main)),
      remote_(std::make_unique<RemoteClient>(config.remote_url,
                                             config.remote_shared_secret)) {
  if (config_.encryption_hook == "aead") {
    aead_ = Aead::from_key_hex(config_.aead_key_hex);
  }
  if (!remote_->health()) {
    // Degraded start: reads keep working; registration and puts fail with
    // remote_unreachable until the remote comes back.
    std::cerr << "warning: remote " << config_.remote_url
              << " is unreachable; starting degraded (writes will fail)\n";
  }
}

MainService::~MainService() {
  if (http_) http_->stop();
}

std::shared_ptr<std::mutex> MainService::file_lock(const ClientId& id,
                                                   const std::string& file_id) {
  std::lock_guard lock(lock_map_mu_);
  auto& slot = file_locks_[{id.hex(), file_id}];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

Bytes MainService::encode_at_rest(std::span<const std::uint8_t> body) const {
  if (aead_) return aead_->encode(body);
  return Bytes(body.begin(), body.end());
}

Bytes MainService::decode_at_rest(std::span<const std::uint8_t> stored) const {
  if (aead_) return aead_->decode(stored);
  return Bytes(stored.begin(), stored.end());
}

SeedBlock MainService::seed_for(const ClientId& id) {
  auto client = store_->find_client(id);
  if (client && client->nonce) {
    return derive_seed(*client->nonce, id);
  }
  if (client) {
    // Nonce lost locally; the remote still holds the seed block.
    return remote_->get_seed(id);
  }
  throw Error(ErrorCode::not_registered, "unknown client " + id.hex());
}

RegisterResult MainService::register_client() {
  ClientId id = ClientId::random();
  while (store_->find_client(id)) id = ClientId::random();  // collision scan

  RandomNonce nonce = RandomNonce::random();
  SeedBlock seed = derive_seed(nonce, id);
  while (seed.is_zero()) {
    // An all-zero seed would mirror plaintext verbatim; draw again.
    nonce = RandomNonce::random();
    seed = derive_seed(nonce, id);
  }

  const std::string token_hex = protocol::new_token_hex();
  const Digest token_hash = protocol::token_hash_from_hex(token_hex);

  // Remote first: registration is all-or-nothing, so nothing persists
  // locally unless the seed is acknowledged.
  remote_->put_seed(id, seed);

  ClientRecord record;
  record.client_id = id;
  record.nonce = nonce;
  record.token_hash = token_hash;
  record.registered_at = now_iso8601_utc();
  store_->add_client(record);
  store_->append_audit("admin", AuditAction::register_client, "-",
                       AuditOutcome::ok);
  return {id, token_hex};
}

FileRecord MainService::put_file(const ClientId& id,
                                 const std::string& file_id,
                                 std::span<const std::uint8_t> body) {
  protocol::validate_file_id(file_id);
  auto lock_ptr = file_lock(id, file_id);
  std::lock_guard key_guard(*lock_ptr);

  const SeedBlock seed = seed_for(id);
  const Bytes stored = encode_at_rest(body);
  const Digest stored_digest = compute_digest(stored);

  StagedPut staged = store_->stage_put(id, file_id, stored, stored_digest);
  fault_point("main_cloud.put.before_remote_push");

  BackupBlob blob;
  blob.client_id = id;
  blob.file_id = file_id;
  blob.original_length = stored.size();
  blob.original_digest = stored_digest;
  blob.payload = xor_tile(stored, seed);
  remote_->put_blob(id, file_id, serialize_blob(blob));
  fault_point("main_cloud.put.after_remote_push");

  FileRecord record = store_->commit_put(std::move(staged));
  store_->append_audit(id.hex(), AuditAction::put, file_id, AuditOutcome::ok);
  fault_point("main_cloud.put.after_audit");
  return record;
}

std::pair<Bytes, FileRecord> MainService::get_file(const ClientId& id,
                                                   const std::string& file_id) {
  auto [stored, record] = store_->get_object(id, file_id);
  Bytes content = decode_at_rest(stored);
  store_->append_audit(id.hex(), AuditAction::get, file_id, AuditOutcome::ok);
  return {std::move(content), record};
}

void MainService::delete_file(const ClientId& id, const std::string& file_id) {
  store_->delete_object(id, file_id);
  store_->append_audit(id.hex(), AuditAction::remove, file_id,
                       AuditOutcome::ok);
}

FileRecord MainService::recover_file(const ClientId& id,
                                     const std::string& file_id, bool force) {
  auto lock_ptr = file_lock(id, file_id);
  std::lock_guard key_guard(*lock_ptr);

  auto record = store_->find_file(id, file_id);
  if (!record) {
    throw Error(ErrorCode::not_found,
                "no record of " + file_id + "; nothing to recover");
  }
  if (record->status == FileStatus::present && !force) {
    throw Error(ErrorCode::validation_failed,
                file_id + " is present and healthy; pass force to re-fetch");
  }

  const Bytes blob_bytes = remote_->get_blob(id, file_id);
  BackupBlob blob;
  try {
    blob = parse_blob(blob_bytes);
  } catch (const BlobParseError& e) {
    throw Error(ErrorCode::integrity_violation,
                std::string("backup blob is damaged: ") + e.what());
  }
  if (blob.client_id != id || blob.file_id != file_id) {
    throw Error(ErrorCode::integrity_violation,
                "backup blob header does not match the requested file");
  }

  const SeedBlock seed = seed_for(id);
  Bytes decoded = recover_bytes(blob.payload, seed);
  if (compute_digest(decoded) != blob.original_digest) {
    throw Error(ErrorCode::integrity_violation,
                "decoded backup does not match its original digest; "
                "the backup itself is damaged");
  }

  StagedPut staged =
      store_->stage_put(id, file_id, decoded, blob.original_digest);
  FileRecord restored = store_->commit_put(std::move(staged));
  store_->append_audit(id.hex(), AuditAction::recover, file_id,
                       AuditOutcome::ok);
  return restored;
}

RecoverAllReport MainService::recover_all(
    const std::optional<ClientId>& scope) {
  FsckReport fsck = verify(scope, "admin");
  RecoverAllReport report;
  for (const auto& entry : fsck.entries) {
    if (entry.status == FileStatus::present) continue;
    ++report.attempted;
    RecoverOutcome outcome;
    outcome.client_id = entry.client_id;
    outcome.file_id = entry.file_id;
    try {
      recover_file(entry.client_id, entry.file_id);
      outcome.restored = true;
      ++report.restored;
    } catch (const Error& e) {
      outcome.error = e.code();
      outcome.message = e.what();
      ++report.failed;
      store_->append_audit(entry.client_id.hex(), AuditAction::recover,
                           entry.file_id, AuditOutcome::error);
    }
    report.files.push_back(std::move(outcome));
  }
  return report;
}

FsckReport MainService::verify(const std::optional<ClientId>& scope,
                               const std::string& actor) {
  FsckReport report = store_->fsck(scope);
  store_->append_audit(actor, AuditAction::verify, "-", AuditOutcome::ok);
  return report;
}

namespace {

json record_json(const FileRecord& record) {
  json j;
  j["client_id"] = record.client_id.hex();
  j["file_id"] = record.file_id;
  j["length"] = record.length;
  j["digest"] = record.digest.hex();
  j["updated_at"] = record.updated_at;
  j["status"] = std::string(to_string(record.status));
  return j;
}

json recover_report_json(const RecoverAllReport& report) {
  json files = json::array();
  for (const auto& outcome : report.files) {
    json f;
    f["client_id"] = outcome.client_id.hex();
    f["file_id"] = outcome.file_id;
    f["outcome"] = outcome.restored ? "restored" : "failed";
    if (outcome.error) f["code"] = std::string(to_string(*outcome.error));
    if (!outcome.message.empty()) f["message"] = outcome.message;
    files.push_back(std::move(f));
  }
  json j;
  j["attempted"] = report.attempted;
  j["restored"] = report.restored;
  j["failed"] = report.failed;
  j["files"] = std::move(files);
  return j;
}

}  // namespace

int MainService::listen_background(const std::string& host, int port) {
  http_ = std::make_unique<Http>();
  detail::configure_server(http_->server);
  auto& server = http_->server;

  // Resolves the caller: a client bearer token or the admin secret.
  struct Caller {
    bool is_admin = false;
    std::optional<ClientId> client;
  };
  auto resolve_caller = [this](const httplib::Request& req) -> Caller {
    auto token = detail::request_bearer(req);
    if (!token) {
      throw Error(ErrorCode::unauthorized, "Authorization header required");
    }
    if (protocol::secret_matches(*token, config_.admin_secret)) {
      return {true, std::nullopt};
    }
    return {false, protocol::authenticate(*token, *store_)};
  };
  auto client_only = [resolve_caller](const httplib::Request& req) {
    Caller caller = resolve_caller(req);
    if (caller.is_admin || !caller.client) {
      throw Error(ErrorCode::unauthorized,
                  "a client bearer token is required here");
    }
    return *caller.client;
  };
  auto admin_only = [resolve_caller](const httplib::Request& req) {
    Caller caller = resolve_caller(req);
    if (!caller.is_admin) {
      throw Error(ErrorCode::unauthorized, "admin secret required");
    }
  };
  // Audit a request that never reached its operation.
  auto audit_failure = [this](AuditAction action, const std::string& subject,
                              const Error& e) {
    store_->append_audit("-", action,
                         subject.empty() ? "-" : subject,
                         e.code() == ErrorCode::unauthorized
                             ? AuditOutcome::denied
                             : AuditOutcome::error);
  };

  server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"status\":\"ok\",\"role\":\"main\"}",
                    "application/json");
  });

  server.Post("/v1/clients",
              [=, this](const httplib::Request& req, httplib::Response& res) {
                detail::guarded(res, [&] {
                  try {
                    admin_only(req);
                  } catch (const Error& e) {
                    audit_failure(AuditAction::register_client, "-", e);
                    throw;
                  }
                  RegisterResult result = register_client();
                  json j;
                  j["client_id"] = result.client_id.hex();
                  j["token"] = result.token_hex;
                  res.status = 201;
                  res.set_content(j.dump(), "application/json");
                });
              });

  server.Put("/v1/files/:file_id",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               const std::string file_id = req.path_params.at("file_id");
               detail::guarded(res, [&] {
                 ClientId id;
                 try {
                   id = client_only(req);
                 } catch (const Error& e) {
                   audit_failure(AuditAction::put, file_id, e);
                   throw;
                 }
                 protocol::UploadRequest upload;
                 upload.client_id = id;
                 upload.file_id = file_id;
                 if (!req.has_header(protocol::kDigestHeader)) {
                   throw Error(ErrorCode::validation_failed,
                               "digest: X-SBA-Digest header is required");
                 }
                 auto digest = Digest::from_hex(
                     req.get_header_value(protocol::kDigestHeader));
                 if (!digest) {
                   throw Error(ErrorCode::validation_failed,
                               "digest: X-SBA-Digest must be 64 hex chars");
                 }
                 upload.content_digest = *digest;
                 upload.content_length =
                     req.has_header(protocol::kLengthHeader)
                         ? std::strtoull(
                               req.get_header_value(protocol::kLengthHeader)
                                   .c_str(),
                               nullptr, 10)
                         : req.body.size();
                 const Bytes body = to_bytes(req.body);
                 upload.body = body;
                 protocol::validate_upload(upload);
                 FileRecord record = put_file(id, file_id, body);
                 res.set_content(record_json(record).dump(),
                                 "application/json");
               });
             });

  server.Get("/v1/files/:file_id",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               const std::string file_id = req.path_params.at("file_id");
               detail::guarded(res, [&] {
                 ClientId id;
                 try {
                   id = client_only(req);
                 } catch (const Error& e) {
                   audit_failure(AuditAction::get, file_id, e);
                   throw;
                 }
                 try {
                   auto [content, record] = get_file(id, file_id);
                   res.set_header(protocol::kDigestHeader,
                                  compute_digest(content).hex());
                   res.set_header(protocol::kUpdatedAtHeader,
                                  record.updated_at);
                   res.set_content(bytes_to_string(content),
                                   "application/octet-stream");
                 } catch (const Error&) {
                   store_->append_audit(id.hex(), AuditAction::get, file_id,
                                        AuditOutcome::error);
                   throw;
                 }
               });
             });

  server.Delete("/v1/files/:file_id",
                [=, this](const httplib::Request& req, httplib::Response& res) {
                  const std::string file_id = req.path_params.at("file_id");
                  detail::guarded(res, [&] {
                    ClientId id;
                    try {
                      id = client_only(req);
                    } catch (const Error& e) {
                      audit_failure(AuditAction::remove, file_id, e);
                      throw;
                    }
                    delete_file(id, file_id);
                    res.set_content("{\"deleted\":true}", "application/json");
                  });
                });

  server.Post("/v1/files/:file_id/recover",
              [=, this](const httplib::Request& req, httplib::Response& res) {
                const std::string file_id = req.path_params.at("file_id");
                detail::guarded(res, [&] {
                  ClientId id;
                  try {
                    id = client_only(req);
                  } catch (const Error& e) {
                    audit_failure(AuditAction::recover, file_id, e);
                    throw;
                  }
                  const bool force = req.has_param("force") &&
                                     (req.get_param_value("force") == "1" ||
                                      req.get_param_value("force") == "true");
                  try {
                    FileRecord record = recover_file(id, file_id, force);
                    res.set_content(record_json(record).dump(),
                                    "application/json");
                  } catch (const Error&) {
                    store_->append_audit(id.hex(), AuditAction::recover,
                                         file_id, AuditOutcome::error);
                    throw;
                  }
                });
              });

  server.Post("/v1/recover",
              [=, this](const httplib::Request& req, httplib::Response& res) {
                detail::guarded(res, [&] {
                  try {
                    admin_only(req);
                  } catch (const Error& e) {
                    audit_failure(AuditAction::recover, "-", e);
                    throw;
                  }
                  std::optional<ClientId> scope;
                  if (!req.body.empty()) {
                    try {
                      json j = json::parse(req.body);
                      if (j.contains("client_id")) {
                        scope = ClientId::from_hex(
                            j["client_id"].get<std::string>());
                        if (!scope) {
                          throw Error(ErrorCode::validation_failed,
                                      "client_id must be 32 hex chars");
                        }
                      }
                    } catch (const json::exception&) {
                      throw Error(ErrorCode::validation_failed,
                                  "body must be JSON");
                    }
                  }
                  RecoverAllReport report = recover_all(scope);
                  res.set_content(recover_report_json(report).dump(),
                                  "application/json");
                });
              });

  server.Get("/v1/verify",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               detail::guarded(res, [&] {
                 Caller caller;
                 try {
                   caller = resolve_caller(req);
                 } catch (const Error& e) {
                   audit_failure(AuditAction::verify, "-", e);
                   throw;
                 }
                 std::optional<ClientId> scope;
                 std::string actor = "admin";
                 if (!caller.is_admin) {
                   scope = caller.client;
                   actor = caller.client->hex();
                 }
                 FsckReport report = verify(scope, actor);
                 json files = json::array();
                 for (const auto& entry : report.entries) {
                   json f;
                   f["client_id"] = entry.client_id.hex();
                   f["file_id"] = entry.file_id;
                   f["status"] = std::string(to_string(entry.status));
                   files.push_back(std::move(f));
                 }
                 json j;
                 j["files"] = std::move(files);
                 j["present"] = report.present;
                 j["missing"] = report.missing;
                 j["corrupt"] = report.corrupt;
                 res.set_content(j.dump(), "application/json");
               });
             });

  return http_->start(host, port);
}

void MainService::run() {
  auto [host, port] = parse_listen_address(config_.listen_address);
  listen_background(host, port);
  std::cerr << "sba main server listening on " << host << ":" << port
            << ", data_dir " << config_.data_dir << ", remote "
            << config_.remote_url << "\n";
  if (http_->thread.joinable()) http_->thread.join();
}

void MainService::stop() {
  if (http_) http_->request_stop();
}

}  // namespace sba

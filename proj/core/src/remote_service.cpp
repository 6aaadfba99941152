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

#include "sba/remote_service.hpp"

#include <fstream>
#include <iostream>

#include <json.hpp>

#include "sba/blob.hpp"
#include "sba/clock.hpp"
#include "sba/digest.hpp"
#include "http_common.hpp"

using nlohmann::json;

namespace sba {

std::pair<std::string, int> parse_listen_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 ||
      colon + 1 >= address.size()) {
    throw Error(ErrorCode::internal,
                "listen_address must be host:port, got '" + address + "'");
  }
  int port = std::atoi(address.c_str() + colon + 1);
  if (port <= 0 || port > 65535) {
    throw Error(ErrorCode::internal, "bad port in '" + address + "'");
  }
  return {address.substr(0, colon), port};
}

RemoteConfig RemoteConfig::from_json_file(const std::filesystem::path& path) {
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
  RemoteConfig config;
  config.listen_address = j.value("listen_address", config.listen_address);
  config.data_dir = j.value("data_dir", "");
  config.shared_secret = j.value("shared_secret", "");
  if (config.data_dir.empty()) {
    throw Error(ErrorCode::internal, "config is missing data_dir");
  }
  if (config.shared_secret.empty()) {
    throw Error(ErrorCode::internal, "config is missing shared_secret");
  }
  return config;
}

std::string RemoteConfig::to_json() const {
  json j;
  j["listen_address"] = listen_address;
  j["data_dir"] = data_dir;
  j["shared_secret"] = shared_secret;
  return j.dump(2);
}

struct RemoteService::Http : detail::BackgroundServer {};

RemoteService::RemoteService(const RemoteConfig& config)
    : config_(config),
      store_(Store::open(config.data_dir, StoreRole::remote)) {}

RemoteService::~RemoteService() {
  if (http_) http_->stop();
}

void RemoteService::store_seed(const ClientId& id, const SeedBlock& seed) {
  std::lock_guard lock(seeds_mu_);
  if (auto existing = store_->find_client(id)) {
    if (existing->seed && *existing->seed == seed) {
      return;  // idempotent replay
    }
    store_->append_audit(id.hex(), AuditAction::register_client, "-",
                         AuditOutcome::error);
    throw Error(ErrorCode::integrity_violation,
                "a different seed is already stored for " + id.hex());
  }
  ClientRecord record;
  record.client_id = id;
  record.seed = seed;
  record.registered_at = now_iso8601_utc();
  store_->add_client(record);
  store_->append_audit(id.hex(), AuditAction::register_client, "-",
                       AuditOutcome::ok);
}

SeedBlock RemoteService::get_seed(const ClientId& id) {
  auto record = store_->find_client(id);
  if (!record || !record->seed) {
    throw Error(ErrorCode::not_found, "no seed stored for " + id.hex());
  }
  return *record->seed;
}

void RemoteService::store_blob(const ClientId& id, const std::string& file_id,
                               std::span<const std::uint8_t> blob_bytes) {
  protocol::validate_file_id(file_id);
  BackupBlob blob;
  try {
    blob = parse_blob(blob_bytes);
  } catch (const BlobParseError& e) {
    throw Error(ErrorCode::validation_failed,
                std::string("body is not a valid backup blob (") +
                    std::string(to_string(e.kind)) + "): " + e.what());
  }
  if (blob.client_id != id) {
    throw Error(ErrorCode::validation_failed,
                "blob header client id does not match the request path");
  }
  if (blob.file_id != file_id) {
    throw Error(ErrorCode::validation_failed,
                "blob header file id does not match the request path");
  }
  auto client = store_->find_client(id);
  if (!client || !client->seed) {
    throw Error(ErrorCode::not_registered,
                "no seed stored for " + id.hex() + "; register first");
  }
  // The blob is opaque here; the at-rest digest covers the blob bytes
  // themselves, distinct from the original-content digest inside.
  store_->put_object(id, file_id, blob_bytes, compute_digest(blob_bytes));
  store_->append_audit(id.hex(), AuditAction::put, file_id, AuditOutcome::ok);
}

Bytes RemoteService::get_blob(const ClientId& id, const std::string& file_id) {
  auto [bytes, record] = store_->get_object(id, file_id);
  store_->append_audit(id.hex(), AuditAction::get, file_id, AuditOutcome::ok);
  return std::move(bytes);
}

std::vector<BlobSummary> RemoteService::list_blobs(const ClientId& id) {
  std::vector<BlobSummary> out;
  for (const auto& record : store_->files_for(id)) {
    if (record.status != FileStatus::present) continue;
    Bytes bytes;
    try {
      bytes = store_->get_object(id, record.file_id).first;
    } catch (const Error&) {
      continue;  // unreadable at rest; fetching it reports the real error
    }
    try {
      BlobHeader header = parse_blob_header(bytes);
      out.push_back(
          {record.file_id, header.original_length, header.original_digest});
    } catch (const BlobParseError&) {
      continue;
    }
  }
  return out;  // files_for is sorted by file id already
}

int RemoteService::listen_background(const std::string& host, int port) {
  http_ = std::make_unique<Http>();
  detail::configure_server(http_->server);

  auto& server = http_->server;
  auto authed = [this](const httplib::Request& req, httplib::Response& res) {
    auto token = detail::request_bearer(req);
    if (!token || !protocol::secret_matches(*token, config_.shared_secret)) {
      detail::send_error(res, ErrorCode::unauthorized,
                         "server-to-server secret required");
      return false;
    }
    return true;
  };
  auto path_client = [](const httplib::Request& req) {
    auto id = ClientId::from_hex(req.path_params.at("client_id"));
    if (!id) {
      throw Error(ErrorCode::validation_failed,
                  "client id in path must be 32 hex chars");
    }
    return *id;
  };

  server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"status\":\"ok\",\"role\":\"remote\"}",
                    "application/json");
  });

  server.Put("/v1/seeds/:client_id",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               if (!authed(req, res)) return;
               detail::guarded(res, [&] {
                 ClientId id = path_client(req);
                 if (req.body.size() != SeedBlock::kSize) {
                   throw Error(ErrorCode::validation_failed,
                               "seed body must be exactly 16 bytes");
                 }
                 store_seed(id, SeedBlock::from_bytes(to_bytes(req.body)));
                 res.set_content("{\"stored\":true}", "application/json");
               });
             });

  server.Get("/v1/seeds/:client_id",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               if (!authed(req, res)) return;
               detail::guarded(res, [&] {
                 SeedBlock seed = get_seed(path_client(req));
                 res.set_content(bytes_to_string(seed.bytes()),
                                 "application/octet-stream");
               });
             });

  server.Put("/v1/backups/:client_id/:file_id",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               if (!authed(req, res)) return;
               detail::guarded(res, [&] {
                 ClientId id = path_client(req);
                 const std::string& file_id = req.path_params.at("file_id");
                 store_blob(id, file_id, to_bytes(req.body));
                 res.set_content("{\"stored\":true}", "application/json");
               });
             });

  server.Get("/v1/backups/:client_id/:file_id",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               if (!authed(req, res)) return;
               detail::guarded(res, [&] {
                 ClientId id = path_client(req);
                 Bytes bytes = get_blob(id, req.path_params.at("file_id"));
                 res.set_content(bytes_to_string(bytes),
                                 "application/octet-stream");
               });
             });

  server.Get("/v1/backups/:client_id",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               if (!authed(req, res)) return;
               detail::guarded(res, [&] {
                 json blobs = json::array();
                 for (const auto& summary : list_blobs(path_client(req))) {
                   json item;
                   item["file_id"] = summary.file_id;
                   item["original_length"] = summary.original_length;
                   item["original_digest"] = summary.original_digest.hex();
                   blobs.push_back(std::move(item));
                 }
                 json body;
                 body["blobs"] = std::move(blobs);
                 res.set_content(body.dump(), "application/json");
               });
             });

  return http_->start(host, port);
}

void RemoteService::run() {
  auto [host, port] = parse_listen_address(config_.listen_address);
  listen_background(host, port);
  std::cerr << "sba remote server listening on " << host << ":" << port
            << ", data_dir " << config_.data_dir << "\n";
  if (http_->thread.joinable()) http_->thread.join();
}

void RemoteService::stop() {
  if (http_) http_->request_stop();
}

}  // namespace sba

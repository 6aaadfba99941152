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

#include "sba/remote_client.hpp"

#include <httplib.h>
#include <json.hpp>

#include "sba/errors.hpp"

using nlohmann::json;

namespace sba {

struct RemoteClient::Impl {
  httplib::Client http;
  std::string secret;

  Impl(const std::string& base_url, std::string shared_secret)
      : http(base_url), secret(std::move(shared_secret)) {
    http.set_connection_timeout(5, 0);
    http.set_read_timeout(30, 0);
    http.set_write_timeout(30, 0);
    http.set_default_headers({{"Authorization", "Bearer " + secret}});
  }

  /// Transport failure → remote_unreachable; HTTP error → the remote's code.
  httplib::Result check(httplib::Result result, const char* what) {
    if (!result) {
      throw Error(ErrorCode::remote_unreachable,
                  std::string("remote server unreachable during ") + what);
    }
    if (result->status >= 200 && result->status < 300) return result;
    ErrorCode code = ErrorCode::remote_unreachable;
    std::string message = "remote rejected " + std::string(what);
    try {
      json j = json::parse(result->body);
      if (auto parsed = error_code_from_string(j.value("code", ""))) {
        code = *parsed;
      }
      message = j.value("message", message);
    } catch (const json::exception&) {
      // non-JSON error body; keep the generic message
    }
    throw Error(code, message);
  }
};

RemoteClient::RemoteClient(std::string base_url, std::string shared_secret)
    : impl_(std::make_unique<Impl>(base_url, std::move(shared_secret))) {}

RemoteClient::~RemoteClient() = default;

void RemoteClient::put_seed(const ClientId& id, const SeedBlock& seed) {
  const std::string path = "/v1/seeds/" + id.hex();
  auto body = bytes_to_string(seed.bytes());
  impl_->check(impl_->http.Put(path, body, "application/octet-stream"),
               "seed upload");
}

SeedBlock RemoteClient::get_seed(const ClientId& id) {
  const std::string path = "/v1/seeds/" + id.hex();
  auto result = impl_->check(impl_->http.Get(path), "seed fetch");
  const Bytes raw = to_bytes(result->body);
  if (raw.size() != SeedBlock::kSize) {
    throw Error(ErrorCode::integrity_violation,
                "remote returned a malformed seed");
  }
  return SeedBlock::from_bytes(raw);
}

void RemoteClient::put_blob(const ClientId& id, const std::string& file_id,
                            std::span<const std::uint8_t> blob_bytes) {
  const std::string path =
      "/v1/backups/" + id.hex() + "/" + escape_component(file_id);
  std::string body(blob_bytes.begin(), blob_bytes.end());
  impl_->check(impl_->http.Put(path, body, "application/octet-stream"),
               "backup upload");
}

Bytes RemoteClient::get_blob(const ClientId& id, const std::string& file_id) {
  const std::string path =
      "/v1/backups/" + id.hex() + "/" + escape_component(file_id);
  auto result = impl_->check(impl_->http.Get(path), "backup fetch");
  return to_bytes(result->body);
}

std::vector<BlobSummary> RemoteClient::list_blobs(const ClientId& id) {
  const std::string path = "/v1/backups/" + id.hex();
  auto result = impl_->check(impl_->http.Get(path), "backup list");
  std::vector<BlobSummary> out;
  try {
    json j = json::parse(result->body);
    for (const auto& item : j.value("blobs", json::array())) {
      BlobSummary summary;
      summary.file_id = item.value("file_id", "");
      summary.original_length = item.value("original_length", std::uint64_t{0});
      auto digest = Digest::from_hex(item.value("original_digest", ""));
      if (!digest) continue;
      summary.original_digest = *digest;
      out.push_back(std::move(summary));
    }
  } catch (const json::exception&) {
    throw Error(ErrorCode::internal, "remote returned a malformed blob list");
  }
  return out;
}

bool RemoteClient::health() {
  auto result = impl_->http.Get("/v1/health");
  return result && result->status == 200;
}

}  // namespace sba

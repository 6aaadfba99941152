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

#include "sba/api_client.hpp"

#include <httplib.h>
#include <json.hpp>

#include "sba/digest.hpp"
#include "sba/protocol.hpp"

using nlohmann::json;

namespace sba {

namespace {

FileRecordView record_from_json(const json& j) {
  FileRecordView view;
  view.client_id_hex = j.value("client_id", "");
  view.file_id = j.value("file_id", "");
  view.length = j.value("length", std::uint64_t{0});
  view.digest_hex = j.value("digest", "");
  view.updated_at = j.value("updated_at", "");
  view.status = j.value("status", "");
  return view;
}

}  // namespace

struct ApiClient::Impl {
  httplib::Client http;
  std::string token;
  std::string admin_secret;

  explicit Impl(const std::string& base_url) : http(base_url) {
    http.set_connection_timeout(5, 0);
    http.set_read_timeout(60, 0);
    http.set_write_timeout(60, 0);
  }

  httplib::Headers auth_headers(bool admin) const {
    // Client endpoints accept either identity; prefer the client token and
    // fall back to the admin secret (admin verify, for example).
    const std::string& secret =
        admin ? admin_secret : (token.empty() ? admin_secret : token);
    return {{"Authorization", "Bearer " + secret}};
  }

  httplib::Result check(httplib::Result result, const char* what) {
    if (!result) {
      throw Error(ErrorCode::remote_unreachable,
                  std::string("server unreachable during ") + what);
    }
    if (result->status >= 200 && result->status < 300) return result;
    ErrorCode code = ErrorCode::internal;
    std::string message = "server rejected " + std::string(what) +
                          " with status " + std::to_string(result->status);
    try {
      json j = json::parse(result->body);
      if (auto parsed = error_code_from_string(j.value("code", ""))) {
        code = *parsed;
      }
      message = j.value("message", message);
    } catch (const json::exception&) {
    }
    throw Error(code, message);
  }

  static json parse_body(const httplib::Result& result, const char* what) {
    try {
      return json::parse(result->body);
    } catch (const json::exception&) {
      throw Error(ErrorCode::internal,
                  std::string("malformed response body for ") + what);
    }
  }
};

ApiClient::ApiClient(std::string base_url)
    : impl_(std::make_unique<Impl>(std::move(base_url))) {}

ApiClient::~ApiClient() = default;
ApiClient::ApiClient(ApiClient&&) noexcept = default;
ApiClient& ApiClient::operator=(ApiClient&&) noexcept = default;

void ApiClient::set_token(std::string token_hex) {
  impl_->token = std::move(token_hex);
}

void ApiClient::set_admin_secret(std::string secret) {
  impl_->admin_secret = std::move(secret);
}

std::pair<std::string, std::string> ApiClient::register_client() {
  auto result = impl_->check(
      impl_->http.Post("/v1/clients", impl_->auth_headers(true), "",
                       "application/json"),
      "registration");
  json j = Impl::parse_body(result, "registration");
  const std::string client_id = j.value("client_id", "");
  const std::string token = j.value("token", "");
  if (client_id.empty() || token.empty()) {
    throw Error(ErrorCode::internal, "registration response is incomplete");
  }
  return {client_id, token};
}

FileRecordView ApiClient::put(const std::string& file_id,
                              std::span<const std::uint8_t> body) {
  const std::string path = "/v1/files/" + escape_component(file_id);
  httplib::Headers headers = impl_->auth_headers(false);
  headers.emplace(protocol::kDigestHeader, compute_digest(body).hex());
  headers.emplace(protocol::kLengthHeader, std::to_string(body.size()));
  std::string payload(body.begin(), body.end());
  auto result = impl_->check(
      impl_->http.Put(path, headers, payload, "application/octet-stream"),
      "upload");
  return record_from_json(Impl::parse_body(result, "upload"));
}

Bytes ApiClient::get(const std::string& file_id) {
  const std::string path = "/v1/files/" + escape_component(file_id);
  auto result =
      impl_->check(impl_->http.Get(path, impl_->auth_headers(false)),
                   "download");
  Bytes content = to_bytes(result->body);
  if (result->has_header(protocol::kDigestHeader)) {
    auto declared = Digest::from_hex(
        result->get_header_value(protocol::kDigestHeader));
    if (!declared || compute_digest(content) != *declared) {
      throw Error(ErrorCode::integrity_violation,
                  "downloaded bytes do not match the declared digest");
    }
  }
  return content;
}

void ApiClient::remove(const std::string& file_id) {
  const std::string path = "/v1/files/" + escape_component(file_id);
  impl_->check(impl_->http.Delete(path, impl_->auth_headers(false)),
               "delete");
}

FileRecordView ApiClient::recover(const std::string& file_id, bool force) {
  std::string path = "/v1/files/" + escape_component(file_id) + "/recover";
  if (force) path += "?force=1";
  auto result = impl_->check(
      impl_->http.Post(path, impl_->auth_headers(false), "",
                       "application/json"),
      "recover");
  return record_from_json(Impl::parse_body(result, "recover"));
}

RecoverAllSummary ApiClient::recover_all(
    const std::optional<std::string>& scope_cid_hex) {
  std::string body;
  if (scope_cid_hex) {
    json j;
    j["client_id"] = *scope_cid_hex;
    body = j.dump();
  }
  auto result = impl_->check(
      impl_->http.Post("/v1/recover", impl_->auth_headers(true), body,
                       "application/json"),
      "recover-all");
  json j = Impl::parse_body(result, "recover-all");
  RecoverAllSummary summary;
  summary.attempted = j.value("attempted", std::size_t{0});
  summary.restored = j.value("restored", std::size_t{0});
  summary.failed = j.value("failed", std::size_t{0});
  summary.raw_json = result->body;
  for (const auto& f : j.value("files", json::array())) {
    FileRecordView view;
    view.client_id_hex = f.value("client_id", "");
    view.file_id = f.value("file_id", "");
    view.status = f.value("outcome", "");
    summary.files.push_back(std::move(view));
  }
  return summary;
}

VerifySummary ApiClient::verify() {
  auto result = impl_->check(
      impl_->http.Get("/v1/verify", impl_->auth_headers(false)), "verify");
  json j = Impl::parse_body(result, "verify");
  VerifySummary summary;
  summary.present = j.value("present", std::size_t{0});
  summary.missing = j.value("missing", std::size_t{0});
  summary.corrupt = j.value("corrupt", std::size_t{0});
  for (const auto& f : j.value("files", json::array())) {
    FileRecordView view;
    view.client_id_hex = f.value("client_id", "");
    view.file_id = f.value("file_id", "");
    view.status = f.value("status", "");
    summary.files.push_back(std::move(view));
  }
  return summary;
}

bool ApiClient::health() {
  auto result = impl_->http.Get("/v1/health");
  return result && result->status == 200;
}

}  // namespace sba

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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sba/bytes.hpp"
#include "sba/errors.hpp"

namespace sba {

struct FileRecordView {
  std::string client_id_hex;
  std::string file_id;
  std::uint64_t length = 0;
  std::string digest_hex;
  std::string updated_at;
  std::string status;
};

struct VerifySummary {
  std::vector<FileRecordView> files;  // status carries the fsck verdict
  std::size_t present = 0;
  std::size_t missing = 0;
  std::size_t corrupt = 0;
};

struct RecoverAllSummary {
  std::size_t attempted = 0;
  std::size_t restored = 0;
  std::size_t failed = 0;
  std::vector<FileRecordView> files;  // status is "restored" or "failed"
  std::string raw_json;
};

/// Client-side API over the main service. A transport failure (server not
/// reachable) surfaces as Error(remote_unreachable); HTTP error responses
/// keep the code the server sent.
class ApiClient {
 public:
  explicit ApiClient(std::string base_url);
  ~ApiClient();
  ApiClient(ApiClient&&) noexcept;
  ApiClient& operator=(ApiClient&&) noexcept;
  ApiClient(const ApiClient&) = delete;
  ApiClient& operator=(const ApiClient&) = delete;

  void set_token(std::string token_hex);
  void set_admin_secret(std::string secret);

  /// Admin. Returns (client id hex, token hex).
  std::pair<std::string, std::string> register_client();

  FileRecordView put(const std::string& file_id,
                     std::span<const std::uint8_t> body);

  /// Verifies the response digest header against the received bytes.
  Bytes get(const std::string& file_id);

  void remove(const std::string& file_id);
  FileRecordView recover(const std::string& file_id, bool force = false);

  /// Admin; empty scope recovers every client.
  RecoverAllSummary recover_all(const std::optional<std::string>& scope_cid_hex);

  VerifySummary verify();
  bool health();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sba

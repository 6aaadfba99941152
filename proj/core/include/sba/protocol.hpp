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

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "sba/codec.hpp"
#include "sba/errors.hpp"
#include "sba/store.hpp"

namespace sba::protocol {

// Upload metadata travels in these headers; bodies are raw bytes.
inline constexpr char kDigestHeader[] = "X-SBA-Digest";
inline constexpr char kLengthHeader[] = "X-SBA-Length";
inline constexpr char kUpdatedAtHeader[] = "X-SBA-Updated-At";

/// Issues a fresh 32-byte bearer token, hex-encoded.
std::string new_token_hex();

/// Digest of the raw token bytes; what the server persists. Throws
/// unauthorized when the presented string is not 64 hex chars.
Digest token_hash_from_hex(std::string_view token_hex);

/// Extracts the token from an "Authorization: Bearer <...>" value.
std::optional<std::string> bearer_token(std::string_view header_value);

/// Resolves a presented bearer token to a registered client by comparing
/// token digests in constant time. Throws unauthorized if nothing matches.
ClientId authenticate(const std::string& bearer_hex, const Store& store);

/// Constant-time check of the presented admin or server-to-server secret.
bool secret_matches(std::string_view presented, std::string_view expected);

/// File id rules: 1..255 bytes, valid UTF-8, no '/' and no NUL.
/// Throws validation_failed naming the violated rule.
void validate_file_id(std::string_view file_id);

struct UploadRequest {
  ClientId client_id;
  std::string file_id;
  std::uint64_t content_length = 0;
  Digest content_digest;
  std::span<const std::uint8_t> body;
};

/// Pre-storage validation: declared length and digest must match the body
/// and the file id must be well formed. Throws validation_failed naming
/// exactly one failed check ("length", "digest" or "file_id").
void validate_upload(const UploadRequest& request);

/// {"code":"...","message":"..."} body used by every error response.
std::string error_response_json(ErrorCode code, std::string_view message);

bool valid_utf8(std::string_view s);

}  // namespace sba::protocol

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

#include "sba/protocol.hpp"

#include <json.hpp>

#include "sba/digest.hpp"

namespace sba::protocol {

std::string new_token_hex() { return to_hex(random_bytes(32)); }

Digest token_hash_from_hex(std::string_view token_hex) {
  auto raw = from_hex(token_hex);
  if (!raw || raw->size() != 32) {
    throw Error(ErrorCode::unauthorized, "malformed bearer token");
  }
  return compute_digest(*raw);
}

std::optional<std::string> bearer_token(std::string_view header_value) {
  constexpr std::string_view kPrefix = "Bearer ";
  if (header_value.size() <= kPrefix.size() ||
      header_value.substr(0, kPrefix.size()) != kPrefix) {
    return std::nullopt;
  }
  return std::string(header_value.substr(kPrefix.size()));
}

ClientId authenticate(const std::string& bearer_hex, const Store& store) {
  const Digest presented = token_hash_from_hex(bearer_hex);
  for (const auto& client : store.clients()) {
    if (!client.token_hash) continue;
    if (constant_time_eq(presented.bytes(), client.token_hash->bytes())) {
      return client.client_id;
    }
  }
  throw Error(ErrorCode::unauthorized, "unknown token");
}

bool secret_matches(std::string_view presented, std::string_view expected) {
  if (expected.empty()) return false;
  // Hashing first gives fixed-width operands, so the comparison leaks
  // neither content nor length.
  const Digest a = compute_digest(presented);
  const Digest b = compute_digest(expected);
  return constant_time_eq(a.bytes(), b.bytes());
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    unsigned cp_min;
    if (c < 0x80) {
      i += 1;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      extra = 1;
      cp_min = 0x80;
    } else if ((c & 0xf0) == 0xe0) {
      extra = 2;
      cp_min = 0x800;
    } else if ((c & 0xf8) == 0xf0) {
      extra = 3;
      cp_min = 0x10000;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    unsigned cp = c & (0x3f >> extra);
    for (std::size_t k = 1; k <= extra; ++k) {
      const unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (cp < cp_min) return false;                    // overlong
    if (cp > 0x10ffff) return false;                  // out of range
    if (cp >= 0xd800 && cp <= 0xdfff) return false;   // surrogate
    i += extra + 1;
  }
  return true;
}

void validate_file_id(std::string_view file_id) {
  if (file_id.empty() || file_id.size() > 255) {
    throw Error(ErrorCode::validation_failed,
                "file_id: must be 1..255 bytes");
  }
  if (file_id.find('/') != std::string_view::npos) {
    throw Error(ErrorCode::validation_failed,
                "file_id: must not contain '/'");
  }
  if (file_id.find('\0') != std::string_view::npos) {
    throw Error(ErrorCode::validation_failed,
                "file_id: must not contain NUL");
  }
  if (!valid_utf8(file_id)) {
    throw Error(ErrorCode::validation_failed,
                "file_id: must be valid UTF-8");
  }
}

void validate_upload(const UploadRequest& request) {
  validate_file_id(request.file_id);
  if (request.content_length != request.body.size()) {
    throw Error(ErrorCode::validation_failed,
                "length: declared " + std::to_string(request.content_length) +
                    " bytes but body has " +
                    std::to_string(request.body.size()));
  }
  if (compute_digest(request.body) != request.content_digest) {
    throw Error(ErrorCode::validation_failed,
                "digest: declared digest does not match body");
  }
}

std::string error_response_json(ErrorCode code, std::string_view message) {
  nlohmann::json j;
  j["code"] = std::string(to_string(code));
  j["message"] = std::string(message);
  return j.dump();
}

}  // namespace sba::protocol

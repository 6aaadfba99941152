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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sba/bytes.hpp"
#include "sba/codec.hpp"

namespace sba {

// Backup blob wire format, version 1. All integers big-endian.
//
//   offset  size  field
//        0     4  magic "SBA1"
//        4     1  version (1)
//        5    16  client id
//       21     1  file id length L (1..255)
//       22     L  file id (raw UTF-8)
//     22+L     8  original length N
//     30+L    32  digest of the original (pre-encoding) content
//     62+L     N  encoded payload
//
// The minimal blob (one-byte file id, empty payload) is 63 bytes.
inline constexpr std::uint8_t kBlobMagic[4] = {'S', 'B', 'A', '1'};
inline constexpr std::uint8_t kBlobVersion = 1;
inline constexpr std::size_t kBlobMinSize = 63;

struct BackupBlob {
  ClientId client_id;
  std::string file_id;  // 1..255 bytes
  std::uint64_t original_length = 0;
  Digest original_digest;
  Bytes payload;  // size == original_length

  friend bool operator==(const BackupBlob&, const BackupBlob&) = default;
};

enum class BlobError {
  bad_magic,        // wrong format: not a backup blob at all
  truncated,        // input stops before the declared layout ends
  unsupported_version,
  malformed,        // layout holds but a field violates its invariant
};

std::string_view to_string(BlobError kind);

struct BlobParseError : std::runtime_error {
  BlobParseError(BlobError kind, const std::string& message)
      : std::runtime_error(message), kind(kind) {}
  BlobError kind;
};

/// Header fields without the payload; payload_offset points at the first
/// payload byte. Parses from any buffer holding at least the header.
struct BlobHeader {
  ClientId client_id;
  std::string file_id;
  std::uint64_t original_length = 0;
  Digest original_digest;
  std::size_t payload_offset = 0;
};

/// Throws std::invalid_argument when blob invariants do not hold
/// (empty/oversized file id, payload size mismatch).
Bytes serialize_blob(const BackupBlob& blob);

/// Throws BlobParseError; never partially succeeds. Trailing bytes after the
/// declared payload are rejected as malformed.
BackupBlob parse_blob(std::span<const std::uint8_t> raw);

/// Parses only the header. The buffer may stop anywhere at or after the end
/// of the header; payload bytes are not examined.
BlobHeader parse_blob_header(std::span<const std::uint8_t> raw);

}  // namespace sba

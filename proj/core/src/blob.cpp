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

#include "sba/blob.hpp"

#include <cstring>

namespace sba {

std::string_view to_string(BlobError kind) {
  switch (kind) {
    case BlobError::bad_magic: return "bad_magic";
    case BlobError::truncated: return "truncated";
    case BlobError::unsupported_version: return "unsupported_version";
    case BlobError::malformed: return "malformed";
  }
  return "malformed";
}

namespace {

void put_u64_be(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

std::uint64_t get_u64_be(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v = (v << 8) | p[i];
  }
  return v;
}

// Bounds-checked cursor. Running out of input is always a truncation error,
// so every prefix of a valid blob fails with the same distinct kind.
struct Cursor {
  const std::uint8_t* p;
  std::size_t left;

  const std::uint8_t* take(std::size_t n, const char* what) {
    if (left < n) {
      throw BlobParseError(BlobError::truncated,
                           std::string("blob truncated reading ") + what);
    }
    const std::uint8_t* out = p;
    p += n;
    left -= n;
    return out;
  }
};

BlobHeader parse_header_cursor(Cursor& cur) {
  const std::uint8_t* magic = cur.take(sizeof(kBlobMagic), "magic");
  if (std::memcmp(magic, kBlobMagic, sizeof(kBlobMagic)) != 0) {
    throw BlobParseError(BlobError::bad_magic, "not a backup blob");
  }
  std::uint8_t version = *cur.take(1, "version");
  if (version != kBlobVersion) {
    throw BlobParseError(BlobError::unsupported_version,
                         "unsupported blob version " + std::to_string(version));
  }
  BlobHeader header;
  header.client_id = ClientId::from_bytes({cur.take(ClientId::kSize, "client id"), ClientId::kSize});
  std::uint8_t id_len = *cur.take(1, "file id length");
  if (id_len == 0) {
    throw BlobParseError(BlobError::malformed, "file id length is zero");
  }
  const std::uint8_t* id = cur.take(id_len, "file id");
  header.file_id.assign(reinterpret_cast<const char*>(id), id_len);
  header.original_length = get_u64_be(cur.take(8, "original length"));
  header.original_digest =
      Digest::from_bytes({cur.take(Digest::kSize, "digest"), Digest::kSize});
  return header;
}

}  // namespace

Bytes serialize_blob(const BackupBlob& blob) {
  if (blob.file_id.empty()) {
    throw std::invalid_argument("blob file id must not be empty");
  }
  if (blob.file_id.size() > 255) {
    throw std::invalid_argument("blob file id exceeds 255 bytes");
  }
  if (blob.payload.size() != blob.original_length) {
    throw std::invalid_argument("blob payload size does not match length");
  }
  Bytes out(std::begin(kBlobMagic), std::end(kBlobMagic));
  out.reserve(kBlobMinSize - 1 + blob.file_id.size() + blob.payload.size());
  out.push_back(kBlobVersion);
  out.insert(out.end(), blob.client_id.bytes().begin(),
             blob.client_id.bytes().end());
  out.push_back(static_cast<std::uint8_t>(blob.file_id.size()));
  out.insert(out.end(), blob.file_id.begin(), blob.file_id.end());
  put_u64_be(out, blob.original_length);
  out.insert(out.end(), blob.original_digest.bytes().begin(),
             blob.original_digest.bytes().end());
  out.insert(out.end(), blob.payload.begin(), blob.payload.end());
  return out;
}

BackupBlob parse_blob(std::span<const std::uint8_t> raw) {
  Cursor cur{raw.data(), raw.size()};
  BlobHeader header = parse_header_cursor(cur);
  if (header.original_length > cur.left) {
    throw BlobParseError(BlobError::truncated, "blob truncated reading payload");
  }
  BackupBlob blob;
  blob.client_id = header.client_id;
  blob.file_id = std::move(header.file_id);
  blob.original_length = header.original_length;
  blob.original_digest = header.original_digest;
  const std::uint8_t* payload =
      cur.take(static_cast<std::size_t>(header.original_length), "payload");
  blob.payload.assign(payload, payload + header.original_length);
  if (cur.left != 0) {
    throw BlobParseError(BlobError::malformed,
                         std::to_string(cur.left) +
                             " trailing bytes after declared payload");
  }
  return blob;
}

BlobHeader parse_blob_header(std::span<const std::uint8_t> raw) {
  Cursor cur{raw.data(), raw.size()};
  BlobHeader header = parse_header_cursor(cur);
  header.payload_offset = raw.size() - cur.left;
  return header;
}

}  // namespace sba

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

#include "sba/chaos.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>

#include <json.hpp>

#include "sba/bytes.hpp"
#include "sba/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sba {

namespace {

struct Candidate {
  std::string client_id_hex;
  std::string file_id;
  std::string status;
};

std::vector<Candidate> load_candidates(const fs::path& data_dir) {
  std::ifstream in(data_dir / "manifest.json");
  if (!in) {
    throw Error(ErrorCode::internal,
                "no manifest.json under " + data_dir.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::internal,
                std::string("manifest unreadable: ") + e.what());
  }
  std::vector<Candidate> out;
  for (const auto& f : j.value("files", json::array())) {
    out.push_back({f.value("client_id", ""), f.value("file_id", ""),
                   f.value("status", "")});
  }
  return out;
}

void flip_byte(const fs::path& path, std::uint64_t offset) {
  int fd = ::open(path.c_str(), O_RDWR);
  if (fd < 0) {
    throw Error(ErrorCode::not_found, "blob file missing: " + path.string());
  }
  struct Closer {
    int fd;
    ~Closer() { ::close(fd); }
  } closer{fd};
  const off_t size = ::lseek(fd, 0, SEEK_END);
  if (size < 0 || offset >= static_cast<std::uint64_t>(size)) {
    throw Error(ErrorCode::validation_failed,
                "byte offset " + std::to_string(offset) +
                    " is beyond the " + std::to_string(size) +
                    "-byte blob " + path.string());
  }
  std::uint8_t byte = 0;
  if (::pread(fd, &byte, 1, static_cast<off_t>(offset)) != 1) {
    throw Error(ErrorCode::internal, "read failed on " + path.string());
  }
  byte ^= 0xff;
  if (::pwrite(fd, &byte, 1, static_cast<off_t>(offset)) != 1) {
    throw Error(ErrorCode::internal, "write failed on " + path.string());
  }
}

}  // namespace

ChaosReport run_chaos(const fs::path& data_dir, ChaosAction action,
                      const ChaosTarget& target, std::uint64_t byte_offset) {
  if (!target.all && !target.file_id) {
    throw Error(ErrorCode::validation_failed,
                "chaos needs --all or a file id");
  }

  std::vector<Candidate> matched;
  for (auto& candidate : load_candidates(data_dir)) {
    if (!target.all && candidate.file_id != *target.file_id) continue;
    if (target.client_id_hex &&
        candidate.client_id_hex != *target.client_id_hex) {
      continue;
    }
    matched.push_back(std::move(candidate));
  }
  if (matched.empty()) {
    throw Error(ErrorCode::not_found, "chaos target matched no file record");
  }

  ChaosReport report;
  const bool single = !target.all;
  for (const auto& candidate : matched) {
    const fs::path blob = data_dir / "blobs" / candidate.client_id_hex /
                          escape_component(candidate.file_id);
    if (action == ChaosAction::remove) {
      std::error_code ec;
      const bool removed = fs::remove(blob, ec);
      if (!removed && single) {
        throw Error(ErrorCode::not_found,
                    "blob already absent: " + blob.string());
      }
      if (removed) {
        report.effects.push_back(
            {candidate.client_id_hex, candidate.file_id, "deleted"});
      }
    } else {
      try {
        flip_byte(blob, byte_offset);
      } catch (const Error&) {
        if (single) throw;
        continue;  // sweep mode skips files the offset does not fit
      }
      report.effects.push_back(
          {candidate.client_id_hex, candidate.file_id,
           "flipped byte " + std::to_string(byte_offset)});
    }
  }
  if (report.effects.empty()) {
    throw Error(ErrorCode::not_found, "chaos affected no blob file");
  }
  return report;
}

}  // namespace sba

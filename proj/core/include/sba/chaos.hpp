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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sba {

// Test-only fault injection: manufactures the "main store lost data" premise
// by deleting or bit-flipping blob files directly in a data_dir. Reads the
// manifest read-only and touches blob files only, so it is safe against a
// live store; the damage shows up on the next read or fsck.

enum class ChaosAction { remove, corrupt };

struct ChaosTarget {
  bool all = false;
  std::optional<std::string> file_id;
  std::optional<std::string> client_id_hex;  // narrows file_id matches
};

struct ChaosEffect {
  std::string client_id_hex;
  std::string file_id;
  std::string what;  // "deleted" or "flipped byte <n>"
};

struct ChaosReport {
  std::vector<ChaosEffect> effects;
};

/// Throws not_found when the target matches nothing.
ChaosReport run_chaos(const std::filesystem::path& data_dir,
                      ChaosAction action, const ChaosTarget& target,
                      std::uint64_t byte_offset = 0);

}  // namespace sba

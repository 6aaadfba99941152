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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sba/bytes.hpp"

namespace sba {

// Scripted end-to-end recovery drills: spin up both services on local ports,
// seed a workload, inject a fault, recover, and byte-compare every file
// against pristine copies the harness retained. The harness, not the
// servers, is the source of truth.

enum class DrillFault { delete_one, corrupt_one, wipe_main, kill_during_put };
enum class DrillMode { in_process, subprocess };

std::string_view to_string(DrillFault fault);
std::string_view to_string(DrillMode mode);

struct DrillScenario {
  std::string name;
  int num_clients = 1;
  int files_per_client = 1;
  std::uint64_t min_size = 0;
  std::uint64_t max_size = 64 * 1024;
  DrillFault fault = DrillFault::delete_one;
  std::uint64_t seed_for_rng = 1;  // same seed => bit-identical workload
  DrillMode mode = DrillMode::in_process;

  static DrillScenario from_json(const std::string& text);
  std::string to_json() const;

  /// Named scenarios shipped with the tool: wipe_main, delete_one,
  /// corrupt_one, kill_during_put.
  static std::optional<DrillScenario> builtin(std::string_view name);

  /// A builtin name, or a path to a scenario JSON file.
  static DrillScenario load(const std::string& name_or_path);
};

enum class FileVerdict { restored_identical, restored_mismatch, unrecoverable };
std::string_view to_string(FileVerdict verdict);

struct DrillFileResult {
  std::string client_id_hex;
  std::string file_id;
  std::uint64_t length = 0;
  FileVerdict verdict = FileVerdict::unrecoverable;
};

struct CrashPointResult {
  std::string point;
  std::string final_state;  // "absent", "committed" or "torn"
  bool fsck_clean = false;
};

struct RecoveryReport {
  std::string scenario;
  bool passed = false;
  std::string failure_reason;

  std::vector<DrillFileResult> files;  // one entry per recovered file
  std::vector<CrashPointResult> crash_points;  // kill_during_put only

  std::size_t files_verified = 0;  // ground-truth comparisons that matched
  std::size_t restored_identical = 0;
  std::size_t restored_mismatch = 0;  // must stay zero; a mismatch is a bug
  std::size_t unrecoverable = 0;

  std::uint64_t bytes_uploaded = 0;
  std::uint64_t bytes_restored = 0;
  std::size_t faults_injected = 0;
  std::size_t recoveries_performed = 0;
  double duration_seconds = 0.0;

  std::string to_json() const;
};

/// Environment problems (ports, scratch space, child processes) — distinct
/// from product failures so CI can tell flake from regression.
struct DrillInfraError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DrillOptions {
  std::filesystem::path work_dir;  // empty: a fresh directory under TMPDIR
  bool keep_dirs = false;
  std::string self_binary;  // subprocess mode; defaults to /proc/self/exe
};

RecoveryReport run_drill(const DrillScenario& scenario,
                         const DrillOptions& options = {});

/// Deterministic workload expansion for a scenario. The first files take the
/// boundary sizes (0, 1, 15, 16, 17, 4 KiB, 64 KiB — clipped to the size
/// range) so seed-tiling edges are always represented; the rest draw from
/// the seeded generator.
struct WorkloadFile {
  int client_index = 0;
  std::string file_id;
  Bytes content;
};

std::vector<WorkloadFile> generate_workload(const DrillScenario& scenario);

}  // namespace sba

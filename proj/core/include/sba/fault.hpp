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

#include <mutex>
#include <stdexcept>
#include <thread>
#include <string>
#include <string_view>

namespace sba {

/// Thrown by the injector in throw mode. Simulates a crash at a named point:
/// the operation stops between two syscalls and never runs any cleanup.
struct CrashPointHit : std::runtime_error {
  explicit CrashPointHit(std::string_view p)
      : std::runtime_error("crash point hit: " + std::string(p)),
        point(p) {}
  std::string point;
};

/// Cooperative crash injection for recovery drills. Off unless armed, either
/// programmatically or via SBA_CRASH_POINT (point name) and SBA_CRASH_MODE
/// ("exit" to _exit(137), anything else throws). Crossing an armed point
/// decrements the countdown; the crash fires when it reaches zero.
///
/// Programmatic arming binds to the arming thread, so an in-process sweep
/// crashes only the pipeline under test and not, say, the other service
/// sharing the process. Environment arming applies to every thread.
class FaultInjector {
 public:
  enum class Mode { off, throw_exception, exit_process };

  static FaultInjector& instance();

  void arm(std::string point, Mode mode, int countdown = 1);
  void disarm();
  void hit(std::string_view point);

 private:
  FaultInjector();

  std::mutex mu_;
  std::string point_;
  Mode mode_ = Mode::off;
  int countdown_ = 0;
  bool any_thread_ = false;
  std::thread::id armed_thread_;
};

/// Instrumentation call sites use this; it is a no-op unless armed.
inline void fault_point(std::string_view point) {
  FaultInjector::instance().hit(point);
}

/// Injection points crossed by a mirrored put, in execution order.
inline constexpr std::string_view kPutCrashPoints[] = {
    "storage.put.mid_temp_write",
    "storage.put.after_temp_write",
    "main_cloud.put.before_remote_push",
    "main_cloud.put.after_remote_push",
    "storage.put.after_blob_rename",
    "storage.manifest.after_temp_write",
    "storage.manifest.after_rename",
    "main_cloud.put.after_audit",
};

}  // namespace sba

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

#include "sba/fault.hpp"

#include <unistd.h>

#include <cstdlib>

namespace sba {

FaultInjector& FaultInjector::instance() {
  static FaultInjector injector;
  return injector;
}

FaultInjector::FaultInjector() {
  const char* point = std::getenv("SBA_CRASH_POINT");
  if (point != nullptr && *point != '\0') {
    point_ = point;
    const char* mode = std::getenv("SBA_CRASH_MODE");
    mode_ = (mode != nullptr && std::string_view(mode) == "exit")
                ? Mode::exit_process
                : Mode::throw_exception;
    countdown_ = 1;
    any_thread_ = true;
    const char* count = std::getenv("SBA_CRASH_COUNT");
    if (count != nullptr) {
      int n = std::atoi(count);
      if (n > 0) countdown_ = n;
    }
  }
}

void FaultInjector::arm(std::string point, Mode mode, int countdown) {
  std::lock_guard lock(mu_);
  point_ = std::move(point);
  mode_ = mode;
  countdown_ = countdown;
  any_thread_ = false;
  armed_thread_ = std::this_thread::get_id();
}

void FaultInjector::disarm() {
  std::lock_guard lock(mu_);
  point_.clear();
  mode_ = Mode::off;
  countdown_ = 0;
  any_thread_ = false;
}

void FaultInjector::hit(std::string_view point) {
  Mode fire = Mode::off;
  {
    std::lock_guard lock(mu_);
    if (mode_ == Mode::off || point != point_) return;
    if (!any_thread_ && std::this_thread::get_id() != armed_thread_) return;
    if (--countdown_ > 0) return;
    fire = mode_;
    mode_ = Mode::off;  // one shot
  }
  if (fire == Mode::exit_process) {
    ::_exit(137);
  }
  throw CrashPointHit(point);
}

}  // namespace sba

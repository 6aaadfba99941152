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

#include <csignal>
#include <functional>
#include <string>

#include "sba/main_service.hpp"
#include "sba/remote_service.hpp"

namespace sba_cli {

inline std::function<void()>& stop_hook() {
  static std::function<void()> hook;
  return hook;
}

inline void handle_stop_signal(int) {
  if (stop_hook()) stop_hook()();
}

inline void install_stop_signals(std::function<void()> stop) {
  stop_hook() = std::move(stop);
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
}

inline int run_main_server(const std::string& config_path) {
  sba::MainService service(sba::MainConfig::from_json_file(config_path));
  install_stop_signals([&service] { service.stop(); });
  service.run();
  return 0;
}

inline int run_remote_server(const std::string& config_path) {
  sba::RemoteService service(sba::RemoteConfig::from_json_file(config_path));
  install_stop_signals([&service] { service.stop(); });
  service.run();
  return 0;
}

}  // namespace sba_cli

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

// Shared HTTP wiring for the two services. Private to the library build.

#pragma once

#include <httplib.h>

#include <optional>
#include <string>
#include <thread>

#include "sba/errors.hpp"
#include "sba/fault.hpp"
#include "sba/protocol.hpp"

namespace sba::detail {

inline constexpr int kServerThreads = 48;  // contract: >= 32 concurrent requests

inline void send_error(httplib::Response& res, ErrorCode code,
                       const std::string& message) {
  res.status = http_status_for(code);
  res.set_content(protocol::error_response_json(code, message),
                  "application/json");
}

inline std::optional<std::string> request_bearer(const httplib::Request& req) {
  if (!req.has_header("Authorization")) return std::nullopt;
  return protocol::bearer_token(req.get_header_value("Authorization"));
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const CrashPointHit&) {
    throw;  // simulated crash, not a protocol error
  } catch (const Error& e) {
    send_error(res, e.code(), e.what());
  } catch (const std::invalid_argument& e) {
    send_error(res, ErrorCode::validation_failed, e.what());
  } catch (const std::exception& e) {
    send_error(res, ErrorCode::internal, e.what());
  }
}

inline void configure_server(httplib::Server& server) {
  server.new_task_queue = [] { return new httplib::ThreadPool(kServerThreads); };
  server.set_payload_max_length(1ULL << 30);
}

/// Owns the listening thread for background (in-process) serving.
struct BackgroundServer {
  httplib::Server server;
  std::thread thread;
  int port = -1;

  int start(const std::string& host, int port_hint) {
    if (port_hint == 0) {
      port = server.bind_to_any_port(host);
      if (port < 0) {
        throw Error(ErrorCode::internal, "cannot bind a listening port");
      }
    } else {
      if (!server.bind_to_port(host, port_hint)) {
        throw Error(ErrorCode::internal,
                    "cannot bind " + host + ":" + std::to_string(port_hint));
      }
      port = port_hint;
    }
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    return port;
  }

  /// Signal-handler safe: asks the server to stop without joining.
  void request_stop() {
    if (server.is_running()) server.stop();
  }

  void stop() {
    request_stop();
    if (thread.joinable()) thread.join();
  }

  ~BackgroundServer() { stop(); }
};

}  // namespace sba::detail

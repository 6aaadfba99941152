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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sba {

/// Closed error vocabulary shared by both services. Clients branch on the
/// code only; the message is for humans.
enum class ErrorCode {
  unauthorized,
  not_registered,
  validation_failed,
  not_found,
  integrity_violation,
  remote_unreachable,
  internal,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view name);

/// HTTP status carried alongside the JSON error body.
int http_status_for(ErrorCode code);

/// Documented CLI mapping: 0 ok, 2 auth, 3 validation, 4 network,
/// 5 integrity, 6 not found, 1 anything else.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sba

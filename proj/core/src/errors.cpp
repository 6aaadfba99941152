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

#include "sba/errors.hpp"

namespace sba {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::unauthorized: return "unauthorized";
    case ErrorCode::not_registered: return "not_registered";
    case ErrorCode::validation_failed: return "validation_failed";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::integrity_violation: return "integrity_violation";
    case ErrorCode::remote_unreachable: return "remote_unreachable";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name) {
  if (name == "unauthorized") return ErrorCode::unauthorized;
  if (name == "not_registered") return ErrorCode::not_registered;
  if (name == "validation_failed") return ErrorCode::validation_failed;
  if (name == "not_found") return ErrorCode::not_found;
  if (name == "integrity_violation") return ErrorCode::integrity_violation;
  if (name == "remote_unreachable") return ErrorCode::remote_unreachable;
  if (name == "internal") return ErrorCode::internal;
  return std::nullopt;
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::unauthorized: return 401;
    case ErrorCode::not_registered: return 403;
    case ErrorCode::validation_failed: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::integrity_violation: return 409;
    case ErrorCode::remote_unreachable: return 502;
    case ErrorCode::internal: return 500;
  }
  return 500;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::unauthorized:
    case ErrorCode::not_registered: return 2;
    case ErrorCode::validation_failed: return 3;
    case ErrorCode::remote_unreachable: return 4;
    case ErrorCode::integrity_violation: return 5;
    case ErrorCode::not_found: return 6;
    case ErrorCode::internal: return 1;
  }
  return 1;
}

}  // namespace sba

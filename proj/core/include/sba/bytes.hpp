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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sba {

using Bytes = std::vector<std::uint8_t>;

std::string to_hex(std::span<const std::uint8_t> data);
std::optional<Bytes> from_hex(std::string_view hex);

/// Cryptographically strong random bytes (client ids, nonces, tokens).
Bytes random_bytes(std::size_t n);

/// Constant-time equality; both operands must be the same length.
bool constant_time_eq(std::span<const std::uint8_t> a,
                      std::span<const std::uint8_t> b);

Bytes to_bytes(std::string_view s);
std::string bytes_to_string(std::span<const std::uint8_t> data);

/// Percent-encodes every byte outside [A-Za-z0-9._-] as %XX (uppercase hex).
/// The names "." and ".." are fully encoded, so the result is always a safe
/// single path component and a valid URL path segment.
std::string escape_component(std::string_view raw);

/// Inverse of escape_component. Returns nullopt on malformed input.
std::optional<std::string> unescape_component(std::string_view escaped);

}  // namespace sba

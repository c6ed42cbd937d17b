// Copyright 2026 The Tessera Authors
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

#ifndef TESSERA_JSON_UTIL_HPP_
#define TESSERA_JSON_UTIL_HPP_

#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tessera {

// Throws ConfigError if doc is not an object or holds a key outside `allowed`.
void require_known_keys(const nlohmann::json& doc, std::initializer_list<std::string_view> allowed,
                        std::string_view context);

// Reads doc[key] into out when present; type errors become ConfigError.
template <typename T>
void read_optional(const nlohmann::json& doc, const char* key, T& out, std::string_view context);

}  // namespace tessera

#include "tessera/error.hpp"

namespace tessera {

template <typename T>
void read_optional(const nlohmann::json& doc, const char* key, T& out, std::string_view context) {
  const auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfigError,
         std::string(context) + "." + key + ": " + e.what());
  }
}

}  // namespace tessera

#endif  // TESSERA_JSON_UTIL_HPP_

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

#include "tessera/json_util.hpp"

#include <algorithm>

namespace tessera {

void require_known_keys(const nlohmann::json& doc, std::initializer_list<std::string_view> allowed,
                        std::string_view context) {
  if (!doc.is_object()) {
    fail(ErrorCode::kConfigError, std::string(context) + " must be a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(ErrorCode::kConfigError, "unknown key '" + key + "' in " + std::string(context));
    }
  }
}

}  // namespace tessera

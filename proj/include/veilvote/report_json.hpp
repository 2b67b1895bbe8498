//
// Copyright 2026 The VeilVote Authors
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
//

#pragma once

#include <string>

#include "json.hpp"

#include "veilvote/accounting.hpp"
#include "veilvote/harness.hpp"

namespace veilvote::report {

nlohmann::ordered_json to_json(const accounting::PrivacyReport& report);
nlohmann::ordered_json to_json(const harness::RunReport& report);

// One compact JSON line for batch (JSON-lines) output, no trailing newline.
std::string report_line(const harness::RunReport& report);

}  // namespace veilvote::report

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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "veilvote/accounting.hpp"
#include "veilvote/fedavg.hpp"
#include "veilvote/harness.hpp"

namespace veilvote::config {

// Malformed or inconsistent run configuration. Messages carry file:line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One scheme section of a run plan, e.g. [ae] or [dp_fedavg:tuned].
struct SchemeBlock {
  harness::SchemeKind scheme = harness::SchemeKind::kAeDpfl;
  std::string label;  // optional section suffix after ':'
  harness::VotingParams voting;
  fedavg::FedAvgConfig fedavg;
  double delta = 1e-3;  // dp_fedavg conversion target
};

// A parsed run plan: one federation, shared run settings, 1+ scheme blocks.
struct RunPlan {
  harness::FederationSpec federation;
  uint64_t base_seed = 0;
  int repeats = 1;
  std::string output_path;  // JSON-lines sink; empty keeps results on stdout
  std::vector<SchemeBlock> schemes;
};

// Flat key = value sections; full-line # comments; unknown sections or keys
// are errors. `origin` names the source in error messages.
RunPlan parse_run_plan(const std::string& text, const std::string& origin);
RunPlan load_run_plan(const std::string& path);

// "query_id,gamma" rows for offline accounting.
std::vector<accounting::MarginRecord> read_margins_csv(const std::string& path);

}  // namespace veilvote::config

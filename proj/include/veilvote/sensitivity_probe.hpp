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

#include "veilvote/accounting.hpp"

namespace veilvote::probe {

struct ProbeConfig {
  accounting::Scheme scheme = accounting::Scheme::kAe;
  accounting::Granularity granularity = accounting::Granularity::kAgentLevel;
  int k = 4;  // kNN neighbours per vote
  int num_agents = 3;
  int points_per_agent = 8;
  int num_classes = 3;
  int query_grid = 7;  // probe queries per axis over the data bounding box
  uint64_t seed = 0;
  void validate() const;
};

struct ProbeResult {
  double max_l2 = 0.0;         // worst observed change of the summed vote
  double assumed_bound = 0.0;  // sensitivity constant the accountant uses
  bool attains_bound = false;  // max_l2 within 1e-9 of assumed_bound
};

// Enumerates neighboring datasets (whole-agent removal at agent granularity;
// single-instance removal and relabeling at instance granularity) over a
// small 2-d federation, recomputes every noiseless summed vote on a query
// grid, and reports the worst L2 change. The federation includes crafted
// agents whose votes provably flip, so tight constants are attained, plus
// seeded random agents for breadth.
ProbeResult l2_sensitivity_probe(const ProbeConfig& config);

}  // namespace veilvote::probe

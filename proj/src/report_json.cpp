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

#include "veilvote/report_json.hpp"

namespace veilvote::report {

nlohmann::ordered_json to_json(const accounting::PrivacyReport& report) {
  nlohmann::ordered_json json;
  json["epsilon"] = report.epsilon;
  json["delta"] = report.delta;
  json["alpha_star"] = report.alpha_star;
  if (report.epsilon_data_dependent.has_value()) {
    json["epsilon_data_dependent"] = *report.epsilon_data_dependent;
  } else {
    json["epsilon_data_dependent"] = nullptr;
  }
  nlohmann::ordered_json orders = nlohmann::ordered_json::array();
  for (const auto& [alpha, eps] : report.rdp_at_orders) {
    orders.push_back(nlohmann::ordered_json::array({alpha, eps}));
  }
  json["rdp_at_orders"] = std::move(orders);
  json["warnings"] = report.warnings;
  return json;
}

nlohmann::ordered_json to_json(const harness::RunReport& report) {
  nlohmann::ordered_json json;
  json["scheme"] = report.scheme;
  json["test_accuracy"] = report.test_accuracy;
  if (report.pseudo_label_accuracy.has_value()) {
    json["pseudo_label_accuracy"] = *report.pseudo_label_accuracy;
  } else {
    json["pseudo_label_accuracy"] = nullptr;
  }
  if (report.privacy.has_value()) {
    json["privacy"] = to_json(*report.privacy);
  } else {
    json["privacy"] = nullptr;
  }
  json["comm_upstream_floats"] = report.comm_upstream_floats;
  json["wall_time_ms"] = report.wall_time_ms;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.config_echo) config[key] = value;
  json["config"] = std::move(config);
  return json;
}

std::string report_line(const harness::RunReport& report) {
  return to_json(report).dump();
}

}  // namespace veilvote::report

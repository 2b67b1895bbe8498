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

#include "veilvote/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "veilvote/learners.hpp"

namespace veilvote::config {

namespace {

enum class Section {
  kNone,
  kFederation,
  kRun,
  kAe,
  kKnn,
  kFedAvg,
  kDpFedAvg,
};

constexpr std::array<const char*, 13> kFederationKeys = {
    "agents",     "partition",        "classes_per_agent", "shift_scale",
    "source",     "classes",          "dim",               "separation",
    "points_per_agent", "pool",       "test_points",       "features_file",
    "labels_file"};

std::string trim(const std::string& text) {
  const size_t begin = text.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const size_t end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& message) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + message);
}

class ValueParser {
 public:
  ValueParser(const std::string& origin, int line) : origin_(origin), line_(line) {}

  int to_int(const std::string& key, const std::string& value) const {
    int parsed = 0;
    if (!full_from_chars(value, parsed)) {
      fail(origin_, line_, key + ": expected an integer, got '" + value + "'");
    }
    return parsed;
  }

  uint64_t to_u64(const std::string& key, const std::string& value) const {
    uint64_t parsed = 0;
    if (!full_from_chars(value, parsed)) {
      fail(origin_, line_, key + ": expected an unsigned integer, got '" + value + "'");
    }
    return parsed;
  }

  double to_double(const std::string& key, const std::string& value) const {
    if (value.empty()) fail(origin_, line_, key + ": expected a number");
    char* end = nullptr;
    const double parsed = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || !std::isfinite(parsed)) {
      fail(origin_, line_, key + ": expected a finite number, got '" + value + "'");
    }
    return parsed;
  }

  bool to_bool(const std::string& key, const std::string& value) const {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail(origin_, line_, key + ": expected true or false, got '" + value + "'");
  }

  harness::PartitionKind to_partition(const std::string& value) const {
    if (value == "iid") return harness::PartitionKind::kIid;
    if (value == "label_sorted") return harness::PartitionKind::kLabelSorted;
    if (value == "domain_shift") return harness::PartitionKind::kDomainShift;
    fail(origin_, line_, "partition must be iid, label_sorted, or domain_shift");
  }

  harness::DataSource to_source(const std::string& value) const {
    if (value == "synthetic") return harness::DataSource::kSyntheticBlobs;
    if (value == "file") return harness::DataSource::kFileBacked;
    fail(origin_, line_, "source must be synthetic or file");
  }

  learners::ClassifierKind to_classifier(const std::string& key,
                                         const std::string& value) const {
    if (value == "logistic") return learners::ClassifierKind::kMultinomialLogistic;
    if (value == "centroid") return learners::ClassifierKind::kNearestCentroid;
    fail(origin_, line_, key + " must be logistic or centroid");
  }

  learners::FeatureMap::Kind to_feature_map(const std::string& value) const {
    if (value == "identity") return learners::FeatureMap::Kind::kIdentity;
    if (value == "random_projection") {
      return learners::FeatureMap::Kind::kRandomProjection;
    }
    if (value == "precomputed") return learners::FeatureMap::Kind::kPrecomputed;
    fail(origin_, line_,
         "feature_map must be identity, random_projection, or precomputed");
  }

  accounting::Granularity to_granularity(const std::string& value) const {
    if (value == "agent") return accounting::Granularity::kAgentLevel;
    if (value == "instance") return accounting::Granularity::kInstanceLevel;
    fail(origin_, line_, "granularity must be agent or instance");
  }

 private:
  template <typename T>
  static bool full_from_chars(const std::string& value, T& parsed) {
    if (value.empty()) return false;
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, parsed);
    return ec == std::errc() && ptr == last;
  }

  const std::string& origin_;
  int line_;
};

bool is_federation_key(const std::string& key) {
  return std::find_if(kFederationKeys.begin(), kFederationKeys.end(),
                      [&](const char* name) { return key == name; }) !=
         kFederationKeys.end();
}

[[noreturn]] void unknown_key(const std::string& origin, int line,
                              const std::string& section, const std::string& key) {
  if (is_federation_key(key)) {
    fail(origin, line, "key '" + key + "' belongs in [federation]");
  }
  fail(origin, line, "unknown key '" + key + "' in [" + section + "]");
}

void apply_federation(harness::FederationSpec& spec, const std::string& key,
                      const std::string& value, const ValueParser& parse,
                      const std::string& origin, int line) {
  if (key == "agents") spec.num_agents = parse.to_int(key, value);
  else if (key == "partition") spec.partition = parse.to_partition(value);
  else if (key == "classes_per_agent") spec.classes_per_agent = parse.to_int(key, value);
  else if (key == "shift_scale") spec.domain_shift_scale = parse.to_double(key, value);
  else if (key == "source") spec.source = parse.to_source(value);
  else if (key == "classes") spec.num_classes = parse.to_int(key, value);
  else if (key == "dim") spec.input_dim = parse.to_int(key, value);
  else if (key == "separation") spec.separation = parse.to_double(key, value);
  else if (key == "points_per_agent") spec.points_per_agent = parse.to_int(key, value);
  else if (key == "pool") spec.public_pool_size = parse.to_int(key, value);
  else if (key == "test_points") spec.test_size = parse.to_int(key, value);
  else if (key == "features_file") spec.features_path = value;
  else if (key == "labels_file") spec.labels_path = value;
  else fail(origin, line, "unknown key '" + key + "' in [federation]");
}

void apply_run(RunPlan& plan, const std::string& key, const std::string& value,
               const ValueParser& parse, const std::string& origin, int line) {
  if (key == "seed") {
    plan.base_seed = parse.to_u64(key, value);
  } else if (key == "repeats") {
    plan.repeats = parse.to_int(key, value);
    if (plan.repeats < 1) fail(origin, line, "repeats must be at least 1");
  } else if (key == "output") {
    plan.output_path = value;
  } else {
    unknown_key(origin, line, "run", key);
  }
}

bool apply_student(harness::VotingParams& voting, const std::string& key,
                   const std::string& value, const ValueParser& parse) {
  if (key == "student") {
    voting.student.kind = parse.to_classifier(key, value);
  } else if (key == "student_epochs") {
    voting.student.epochs = parse.to_int(key, value);
  } else if (key == "student_lr") {
    voting.student.learning_rate = parse.to_double(key, value);
  } else if (key == "student_batch") {
    voting.student.batch_size = parse.to_int(key, value);
  } else {
    return false;
  }
  return true;
}

bool apply_voting_common(harness::VotingParams& voting, const std::string& key,
                         const std::string& value, const ValueParser& parse) {
  if (key == "sigma") voting.sigma = parse.to_double(key, value);
  else if (key == "queries") voting.queries = parse.to_int(key, value);
  else if (key == "delta") voting.delta = parse.to_double(key, value);
  else if (key == "granularity") voting.granularity = parse.to_granularity(value);
  else return apply_student(voting, key, value, parse);
  return true;
}

void apply_ae(SchemeBlock& block, const std::string& key, const std::string& value,
              const ValueParser& parse, const std::string& origin, int line) {
  harness::VotingParams& voting = block.voting;
  if (apply_voting_common(voting, key, value, parse)) return;
  if (key == "teacher") voting.teacher.kind = parse.to_classifier(key, value);
  else if (key == "teacher_epochs") voting.teacher.epochs = parse.to_int(key, value);
  else if (key == "teacher_lr") voting.teacher.learning_rate = parse.to_double(key, value);
  else if (key == "teacher_batch") voting.teacher.batch_size = parse.to_int(key, value);
  else unknown_key(origin, line, "ae", key);
}

void apply_knn(SchemeBlock& block, const std::string& key, const std::string& value,
               const ValueParser& parse, const std::string& origin, int line) {
  harness::VotingParams& voting = block.voting;
  if (apply_voting_common(voting, key, value, parse)) return;
  if (key == "k") voting.k = parse.to_int(key, value);
  else if (key == "k_fraction") voting.k_fraction = parse.to_double(key, value);
  else if (key == "feature_map") voting.feature_map = parse.to_feature_map(value);
  else if (key == "projection_dim") voting.projection_dim = parse.to_int(key, value);
  else if (key == "projection_seed") voting.projection_seed = parse.to_u64(key, value);
  else if (key == "map_file") voting.feature_file = value;
  else unknown_key(origin, line, "knn", key);
}

void apply_gradient(SchemeBlock& block, bool dp, const std::string& key,
                    const std::string& value, const ValueParser& parse,
                    const std::string& origin, int line) {
  fedavg::FedAvgConfig& fa = block.fedavg;
  if (key == "participation") fa.participation = parse.to_double(key, value);
  else if (key == "inner_iters") fa.inner_iters = parse.to_int(key, value);
  else if (key == "eta") fa.eta = parse.to_double(key, value);
  else if (key == "rounds") fa.rounds = parse.to_int(key, value);
  else if (key == "lr_decay") fa.lr_decay = parse.to_bool(key, value);
  else if (dp && key == "sigma") fa.sigma = parse.to_double(key, value);
  else if (dp && key == "clip") fa.clip_threshold = parse.to_double(key, value);
  else if (dp && key == "delta") block.delta = parse.to_double(key, value);
  else unknown_key(origin, line, dp ? "dp_fedavg" : "fedavg", key);
}

SchemeBlock fresh_block(Section section, std::string label) {
  SchemeBlock block;
  block.label = std::move(label);
  switch (section) {
    case Section::kAe: block.scheme = harness::SchemeKind::kAeDpfl; break;
    case Section::kKnn: block.scheme = harness::SchemeKind::kKnnDpfl; break;
    case Section::kFedAvg: block.scheme = harness::SchemeKind::kFedAvg; break;
    case Section::kDpFedAvg: block.scheme = harness::SchemeKind::kDpFedAvg; break;
    default: break;
  }
  return block;
}

}  // namespace

RunPlan parse_run_plan(const std::string& text, const std::string& origin) {
  RunPlan plan;
  Section section = Section::kNone;
  std::istringstream stream(text);
  std::string raw;
  int line_number = 0;
  while (std::getline(stream, raw)) {
    ++line_number;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_number, "unterminated section header");
      const std::string inside = line.substr(1, line.size() - 2);
      const size_t colon = inside.find(':');
      const std::string name = trim(inside.substr(0, colon));
      const std::string label =
          colon == std::string::npos ? "" : trim(inside.substr(colon + 1));
      if (name == "federation") section = Section::kFederation;
      else if (name == "run") section = Section::kRun;
      else if (name == "ae") section = Section::kAe;
      else if (name == "knn") section = Section::kKnn;
      else if (name == "fedavg") section = Section::kFedAvg;
      else if (name == "dp_fedavg") section = Section::kDpFedAvg;
      else fail(origin, line_number, "unknown section [" + name + "]");
      if (section != Section::kFederation && section != Section::kRun) {
        plan.schemes.push_back(fresh_block(section, label));
      } else if (!label.empty()) {
        fail(origin, line_number, "[" + name + "] does not take a label");
      }
      continue;
    }
    const size_t equals = line.find('=');
    if (equals == std::string::npos) {
      fail(origin, line_number, "expected key = value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, equals));
    const std::string value = trim(line.substr(equals + 1));
    if (key.empty()) fail(origin, line_number, "empty key");
    const ValueParser parse(origin, line_number);
    switch (section) {
      case Section::kNone:
        fail(origin, line_number, "key '" + key + "' appears outside any section");
      case Section::kFederation:
        apply_federation(plan.federation, key, value, parse, origin, line_number);
        break;
      case Section::kRun:
        apply_run(plan, key, value, parse, origin, line_number);
        break;
      case Section::kAe:
        apply_ae(plan.schemes.back(), key, value, parse, origin, line_number);
        break;
      case Section::kKnn:
        apply_knn(plan.schemes.back(), key, value, parse, origin, line_number);
        break;
      case Section::kFedAvg:
        apply_gradient(plan.schemes.back(), false, key, value, parse, origin,
                       line_number);
        break;
      case Section::kDpFedAvg:
        apply_gradient(plan.schemes.back(), true, key, value, parse, origin,
                       line_number);
        break;
    }
  }
  if (plan.schemes.empty()) {
    throw ConfigError(origin + ": no scheme section ([ae], [knn], [fedavg], or [dp_fedavg])");
  }
  return plan;
}

RunPlan load_run_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_plan(buffer.str(), path);
}

std::vector<accounting::MarginRecord> read_margins_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty margins file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "query_id,gamma") {
    throw ConfigError(path + ": margins header must be 'query_id,gamma'");
  }
  std::vector<accounting::MarginRecord> records;
  int line_number = 1;
  const std::string origin = path;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos) {
      fail(origin, line_number, "malformed margins row '" + line + "'");
    }
    const ValueParser parse(origin, line_number);
    accounting::MarginRecord record;
    record.query_id = parse.to_int("query_id", line.substr(0, comma));
    record.gamma = parse.to_double("gamma", line.substr(comma + 1));
    records.push_back(record);
  }
  if (records.empty()) throw ConfigError(path + ": no margin rows");
  return records;
}

}  // namespace veilvote::config

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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "veilvote/accounting.hpp"
#include "veilvote/common.hpp"
#include "veilvote/fedavg.hpp"
#include "veilvote/learners.hpp"

namespace veilvote::harness {

enum class PartitionKind { kIid, kLabelSorted, kDomainShift };
enum class DataSource { kSyntheticBlobs, kFileBacked };

struct FederationSpec {
  int num_agents = 10;
  PartitionKind partition = PartitionKind::kIid;
  // Label-sorted sharding only: shards per agent. 0 derives max(1, C / 2).
  int classes_per_agent = 0;
  double domain_shift_scale = 1.0;
  DataSource source = DataSource::kSyntheticBlobs;
  int num_classes = 10;
  int input_dim = 16;
  double separation = 4.0;  // pairwise distance between blob class means
  int points_per_agent = 100;
  std::string features_path;  // file-backed source
  std::string labels_path;
  int public_pool_size = 200;  // unlabeled points the server may query
  int test_size = 200;
  uint64_t seed = 0;
  void validate() const;
};

struct FederationData {
  std::vector<learners::AgentDataset> agents;
  Matrix pool_features;
  std::vector<int> pool_labels;  // held back, used only to score pseudo-labels
  Matrix test_features;
  std::vector<int> test_labels;
  int num_classes = 0;
  int input_dim = 0;
};

// Splits already-generated rows across agents according to spec.partition.
std::vector<learners::AgentDataset> partition(const Matrix& features,
                                              const std::vector<int>& labels,
                                              const FederationSpec& spec);

FederationData make_federation(const FederationSpec& spec);

enum class SchemeKind { kAeDpfl, kKnnDpfl, kFedAvg, kDpFedAvg };
std::string scheme_name(SchemeKind kind);

// Upstream floats one agent sends over a whole run.
double voting_upstream_floats(int num_classes, int queries);
double gradient_upstream_floats(int model_dim, int rounds, double participation);

struct RunReport {
  std::string scheme;
  double test_accuracy = 0.0;
  std::optional<double> pseudo_label_accuracy;
  std::optional<accounting::PrivacyReport> privacy;
  double comm_upstream_floats = 0.0;
  double wall_time_ms = 0.0;
  std::vector<std::pair<std::string, std::string>> config_echo;
};

struct VotingParams {
  double sigma = 25.0;  // per-agent vote noise is N(0, sigma^2 / N)
  int queries = 200;
  double delta = 1e-3;
  accounting::Granularity granularity = accounting::Granularity::kAgentLevel;
  learners::TrainConfig teacher;  // seed is re-derived per agent
  learners::TrainConfig student;
  int k = 0;  // kNN neighbours; 0 picks ceil(k_fraction * n_i) per agent
  double k_fraction = 0.05;
  learners::FeatureMap::Kind feature_map = learners::FeatureMap::Kind::kIdentity;
  int projection_dim = 0;
  uint64_t projection_seed = 0;
  std::string feature_file;
  void validate() const;
};

// Teachers for the aggregate-ensemble scheme, one per agent, seeds derived
// from run_seed so retraining is reproducible.
std::vector<learners::Classifier> train_teachers(const FederationData& data,
                                                 const learners::TrainConfig& config,
                                                 uint64_t run_seed);

double evaluate(const learners::Classifier& model, const Matrix& features,
                const std::vector<int>& labels);

RunReport run_ae_dpfl(const FederationSpec& spec, const VotingParams& params);
RunReport run_knn_dpfl(const FederationSpec& spec, const VotingParams& params);
RunReport run_fedavg(const FederationSpec& spec, const fedavg::FedAvgConfig& config);
RunReport run_dp_fedavg(const FederationSpec& spec,
                        const fedavg::FedAvgConfig& config, double delta);

}  // namespace veilvote::harness

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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "veilvote/accounting.hpp"
#include "veilvote/common.hpp"
#include "veilvote/harness.hpp"
#include "veilvote/learners.hpp"
#include "veilvote/report_json.hpp"

using namespace veilvote;
using harness::FederationData;
using harness::FederationSpec;
using harness::PartitionKind;
using harness::RunReport;
using harness::VotingParams;

namespace {

FederationSpec small_blob_spec() {
  FederationSpec spec;
  spec.num_agents = 5;
  spec.num_classes = 3;
  spec.input_dim = 4;
  spec.separation = 6.0;
  spec.points_per_agent = 60;
  spec.public_pool_size = 50;
  spec.test_size = 200;
  spec.seed = 3;
  return spec;
}

VotingParams centroid_voting_params(int queries) {
  VotingParams params;
  params.queries = queries;
  params.teacher.kind = learners::ClassifierKind::kNearestCentroid;
  params.student.kind = learners::ClassifierKind::kNearestCentroid;
  return params;
}

learners::AgentDataset pooled_training_data(const FederationData& data) {
  int total = 0;
  for (const learners::AgentDataset& agent : data.agents) total += agent.size();
  learners::AgentDataset pooled;
  pooled.features = Matrix(total, data.input_dim);
  pooled.labels.reserve(total);
  pooled.num_classes = data.num_classes;
  int row = 0;
  for (const learners::AgentDataset& agent : data.agents) {
    for (int i = 0; i < agent.size(); ++i) {
      const std::span<const double> src = agent.features.row(i);
      std::copy(src.begin(), src.end(), pooled.features.row(row++).begin());
      pooled.labels.push_back(agent.labels[i]);
    }
  }
  return pooled;
}

std::string canonical_report(const RunReport& report) {
  RunReport copy = report;
  copy.wall_time_ms = 0.0;
  return veilvote::report::report_line(copy);
}

}  // namespace

TEST_CASE("well-separated blobs are almost perfectly classifiable") {
  const FederationSpec spec = small_blob_spec();
  const FederationData data = harness::make_federation(spec);
  learners::TrainConfig config;
  config.kind = learners::ClassifierKind::kNearestCentroid;
  const learners::Classifier model =
      learners::train_classifier(pooled_training_data(data), config);
  CHECK(harness::evaluate(model, data.test_features, data.test_labels) >= 0.97);
}

TEST_CASE("iid partition balances sizes and preserves the label multiset") {
  const int n = 103;
  const int num_classes = 4;
  Matrix features(n, 2);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    features.at(i, 0) = i;
    features.at(i, 1) = -i;
    labels[i] = i % num_classes;
  }
  FederationSpec spec;
  spec.num_agents = 5;
  spec.num_classes = num_classes;
  spec.input_dim = 2;
  spec.seed = 11;

  const std::vector<learners::AgentDataset> agents =
      harness::partition(features, labels, spec);
  REQUIRE(agents.size() == 5);
  std::multiset<int> seen;
  std::multiset<double> seen_rows;
  for (const learners::AgentDataset& agent : agents) {
    CHECK(agent.size() >= 20);
    CHECK(agent.size() <= 21);
    for (int label : agent.labels) seen.insert(label);
    for (int i = 0; i < agent.size(); ++i) seen_rows.insert(agent.features.at(i, 0));
  }
  std::multiset<int> expected(labels.begin(), labels.end());
  CHECK(seen == expected);
  CHECK(seen_rows.size() == static_cast<size_t>(n));

  const std::vector<learners::AgentDataset> again =
      harness::partition(features, labels, spec);
  CHECK(again[0].labels == agents[0].labels);
  spec.seed = 12;
  const std::vector<learners::AgentDataset> reshuffled =
      harness::partition(features, labels, spec);
  CHECK(reshuffled[0].labels != agents[0].labels);
}

TEST_CASE("label-sorted partition limits each agent to few classes") {
  const int n = 3000;
  const int num_classes = 10;
  Matrix features(n, 1);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    features.at(i, 0) = i;
    labels[i] = i % num_classes;
  }
  FederationSpec spec;
  spec.num_agents = 5;
  spec.num_classes = num_classes;
  spec.input_dim = 1;
  spec.partition = PartitionKind::kLabelSorted;
  spec.classes_per_agent = 2;

  const std::vector<learners::AgentDataset> agents =
      harness::partition(features, labels, spec);
  for (const learners::AgentDataset& agent : agents) {
    CHECK(agent.size() == 600);
    const std::set<int> distinct(agent.labels.begin(), agent.labels.end());
    CHECK(distinct.size() <= 2);
  }
  // Every label still appears somewhere.
  std::set<int> all;
  for (const learners::AgentDataset& agent : agents) {
    all.insert(agent.labels.begin(), agent.labels.end());
  }
  CHECK(all.size() == static_cast<size_t>(num_classes));
}

TEST_CASE("domain shift adds a constant per-agent offset of the given norm") {
  const int n = 40;
  Matrix features(n, 3);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    features.at(i, 0) = i * 0.5;
    features.at(i, 1) = 1.0;
    features.at(i, 2) = -i;
    labels[i] = i % 2;
  }
  FederationSpec spec;
  spec.num_agents = 4;
  spec.num_classes = 2;
  spec.input_dim = 3;
  spec.seed = 7;
  const std::vector<learners::AgentDataset> base =
      harness::partition(features, labels, spec);

  spec.partition = PartitionKind::kDomainShift;
  spec.domain_shift_scale = 1.5;
  const std::vector<learners::AgentDataset> shifted =
      harness::partition(features, labels, spec);

  for (int a = 0; a < 4; ++a) {
    CHECK(shifted[a].domain_tag == "shift-" + std::to_string(a));
    CHECK(shifted[a].labels == base[a].labels);
    std::vector<double> offset(3);
    for (int j = 0; j < 3; ++j) {
      offset[j] = shifted[a].features.at(0, j) - base[a].features.at(0, j);
    }
    CHECK(l2_norm(offset) == doctest::Approx(1.5).epsilon(1e-12));
    for (int i = 1; i < shifted[a].size(); ++i) {
      for (int j = 0; j < 3; ++j) {
        const double diff =
            shifted[a].features.at(i, j) - base[a].features.at(i, j);
        CHECK(diff == doctest::Approx(offset[j]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("noiseless voting run matches the recomputed ensemble") {
  const FederationSpec spec = small_blob_spec();
  VotingParams params = centroid_voting_params(40);
  params.sigma = 0.0;
  const RunReport report = harness::run_ae_dpfl(spec, params);
  CHECK(report.scheme == "ae");
  CHECK_FALSE(report.privacy.has_value());
  REQUIRE(report.pseudo_label_accuracy.has_value());

  // Rebuild the ensemble with the public pieces and score its plain argmax.
  const FederationData data = harness::make_federation(spec);
  const std::vector<learners::Classifier> teachers =
      harness::train_teachers(data, params.teacher, spec.seed);
  int correct = 0;
  for (int q = 0; q < params.queries; ++q) {
    std::vector<double> counts(data.num_classes, 0.0);
    for (const learners::Classifier& teacher : teachers) {
      const voting::VoteVector vote = teacher.predict(data.pool_features.row(q));
      for (int c = 0; c < data.num_classes; ++c) counts[c] += vote.values[c];
    }
    if (argmax_lowest(counts) == data.pool_labels[q]) ++correct;
  }
  CHECK(*report.pseudo_label_accuracy ==
        doctest::Approx(static_cast<double>(correct) / params.queries)
            .epsilon(1e-15));
}

TEST_CASE("ae run wires the accountant with its own mechanism parameters") {
  const FederationSpec spec = small_blob_spec();
  VotingParams params = centroid_voting_params(50);
  params.sigma = 20.0;
  params.delta = 1e-3;
  const RunReport report = harness::run_ae_dpfl(spec, params);

  REQUIRE(report.privacy.has_value());
  accounting::MechanismParams mechanism;
  mechanism.sigma = params.sigma;
  mechanism.queries = params.queries;
  mechanism.num_agents = spec.num_agents;
  mechanism.num_classes = spec.num_classes;
  mechanism.granularity = accounting::Granularity::kAgentLevel;
  const accounting::ConversionResult direct = accounting::rdp_to_dp(
      accounting::scheme_curve(mechanism, accounting::Scheme::kAe), params.delta);
  CHECK(report.privacy->epsilon == direct.epsilon);
  CHECK(report.privacy->delta == params.delta);
  REQUIRE(report.privacy->epsilon_data_dependent.has_value());
  CHECK(*report.privacy->epsilon_data_dependent <=
        report.privacy->epsilon + 1e-12);
  CHECK(report.comm_upstream_floats ==
        doctest::Approx(3.0 * 50.0).epsilon(1e-15));
  REQUIRE_FALSE(report.config_echo.empty());
  CHECK(report.config_echo.front().first == "scheme");
  CHECK(report.config_echo.front().second == "ae");
}

TEST_CASE("identical voting runs serialize identically") {
  const FederationSpec spec = small_blob_spec();
  VotingParams params = centroid_voting_params(30);
  params.sigma = 15.0;
  const RunReport first = harness::run_ae_dpfl(spec, params);
  const RunReport second = harness::run_ae_dpfl(spec, params);
  CHECK(canonical_report(first) == canonical_report(second));
}

TEST_CASE("knn run accounts with the smallest per-agent k") {
  const FederationSpec spec = small_blob_spec();
  VotingParams params;
  params.queries = 40;
  params.sigma = 18.0;
  params.granularity = accounting::Granularity::kInstanceLevel;
  params.student.kind = learners::ClassifierKind::kNearestCentroid;

  SUBCASE("derived k") {
    params.k = 0;
    params.k_fraction = 0.05;
    const RunReport report = harness::run_knn_dpfl(spec, params);
    CHECK(report.scheme == "knn");
    REQUIRE(report.privacy.has_value());
    // Every agent holds 60 points, so ceil(0.05 * 60) = 3 neighbors each.
    accounting::MechanismParams mechanism;
    mechanism.sigma = params.sigma;
    mechanism.queries = params.queries;
    mechanism.num_agents = spec.num_agents;
    mechanism.k = 3;
    mechanism.num_classes = spec.num_classes;
    mechanism.granularity = accounting::Granularity::kInstanceLevel;
    const accounting::ConversionResult direct = accounting::rdp_to_dp(
        accounting::scheme_curve(mechanism, accounting::Scheme::kKnn),
        params.delta);
    CHECK(report.privacy->epsilon == direct.epsilon);
  }
  SUBCASE("explicit k") {
    params.k = 5;
    const RunReport report = harness::run_knn_dpfl(spec, params);
    REQUIRE(report.privacy.has_value());
    accounting::MechanismParams mechanism;
    mechanism.sigma = params.sigma;
    mechanism.queries = params.queries;
    mechanism.num_agents = spec.num_agents;
    mechanism.k = 5;
    mechanism.num_classes = spec.num_classes;
    mechanism.granularity = accounting::Granularity::kInstanceLevel;
    const accounting::ConversionResult direct = accounting::rdp_to_dp(
        accounting::scheme_curve(mechanism, accounting::Scheme::kKnn),
        params.delta);
    CHECK(report.privacy->epsilon == direct.epsilon);
  }
  SUBCASE("explicit k larger than a shard") {
    params.k = 61;
    CHECK_THROWS_AS(harness::run_knn_dpfl(spec, params), std::invalid_argument);
  }
}

TEST_CASE("dp_fedavg reports the composed gaussian epsilon") {
  FederationSpec spec;
  spec.num_agents = 4;
  spec.num_classes = 2;
  spec.input_dim = 2;
  spec.points_per_agent = 10;
  spec.public_pool_size = 5;
  spec.test_size = 5;
  spec.seed = 9;

  fedavg::FedAvgConfig config;
  config.sigma = 25.0;
  config.clip_threshold = 1.0;
  config.eta = 0.05;
  config.inner_iters = 1;

  SUBCASE("25 rounds") {
    config.rounds = 25;
    const RunReport report = harness::run_dp_fedavg(spec, config, 1e-3);
    CHECK(report.scheme == "dp_fedavg");
    REQUIRE(report.privacy.has_value());
    CHECK(report.privacy->epsilon ==
          doctest::Approx(0.763384437769968).epsilon(1e-12));
    // Model dim 2 * (2 + 1) = 6, full participation.
    CHECK(report.comm_upstream_floats == doctest::Approx(150.0).epsilon(1e-15));
  }
  SUBCASE("100 rounds") {
    config.rounds = 100;
    const RunReport report = harness::run_dp_fedavg(spec, config, 1e-3);
    REQUIRE(report.privacy.has_value());
    CHECK(report.privacy->epsilon ==
          doctest::Approx(1.56676887553994).epsilon(1e-12));
  }
  SUBCASE("preconditions") {
    config.sigma = 0.0;
    CHECK_THROWS_AS(harness::run_dp_fedavg(spec, config, 1e-3),
                    std::invalid_argument);
    config.sigma = 25.0;
    CHECK_THROWS_AS(harness::run_dp_fedavg(spec, config, 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("plain fedavg never claims a privacy guarantee") {
  FederationSpec spec;
  spec.num_agents = 3;
  spec.num_classes = 2;
  spec.input_dim = 2;
  spec.points_per_agent = 12;
  spec.public_pool_size = 4;
  spec.test_size = 6;

  fedavg::FedAvgConfig config;
  config.rounds = 3;
  config.eta = 0.1;
  config.sigma = 17.0;  // forced back to zero by the plain runner
  const RunReport report = harness::run_fedavg(spec, config);
  CHECK(report.scheme == "fedavg");
  CHECK_FALSE(report.privacy.has_value());
  CHECK_FALSE(report.pseudo_label_accuracy.has_value());
}

TEST_CASE("evaluate counts exact matches") {
  // Weights pick the larger of the two inputs; bias column is zero.
  Matrix weights(2, 3);
  weights.at(0, 0) = 1.0;
  weights.at(1, 1) = 1.0;
  const learners::Classifier model =
      learners::Classifier::multinomial_logistic(weights);
  Matrix features(4, 2);
  features.at(0, 0) = 2.0;  // class 0
  features.at(1, 1) = 2.0;  // class 1
  features.at(2, 0) = 2.0;  // class 0
  features.at(3, 1) = 2.0;  // class 1
  CHECK(harness::evaluate(model, features, {0, 1, 0, 0}) ==
        doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(harness::evaluate(model, features, {0, 1}),
                  std::invalid_argument);
}

TEST_CASE("file-backed federation splits rows in stored order") {
  const std::string features_path = "test_fed_features.vvft";
  const std::string labels_path = "test_fed_labels.csv";
  const int rows = 14;  // 8 training + 3 pool + 3 test
  Matrix features(rows, 2);
  std::vector<int> labels(rows);
  for (int i = 0; i < rows; ++i) {
    features.at(i, 0) = i;
    features.at(i, 1) = 100 + i;
    labels[i] = i % 2;
  }
  learners::write_vvft(features_path, features);
  learners::write_labels_csv(labels_path, labels);

  FederationSpec spec;
  spec.source = harness::DataSource::kFileBacked;
  spec.features_path = features_path;
  spec.labels_path = labels_path;
  spec.num_agents = 2;
  spec.num_classes = 2;
  spec.public_pool_size = 3;
  spec.test_size = 3;
  spec.seed = 4;

  const FederationData data = harness::make_federation(spec);
  CHECK(data.input_dim == 2);
  CHECK(data.agents.size() == 2);
  CHECK(data.agents[0].size() + data.agents[1].size() == 8);
  REQUIRE(data.pool_features.rows() == 3);
  CHECK(data.pool_features.at(0, 0) == doctest::Approx(8.0));
  CHECK(data.pool_labels == std::vector<int>{0, 1, 0});
  CHECK(data.test_features.at(2, 1) == doctest::Approx(113.0));
  CHECK(data.test_labels == std::vector<int>{1, 0, 1});

  SUBCASE("labels outside the configured classes are rejected") {
    labels[5] = 7;
    learners::write_labels_csv(labels_path, labels);
    CHECK_THROWS_AS(harness::make_federation(spec), std::invalid_argument);
  }
  SUBCASE("too few training rows are rejected") {
    spec.public_pool_size = 7;
    spec.test_size = 6;
    CHECK_THROWS_AS(harness::make_federation(spec), std::invalid_argument);
  }
  std::remove(features_path.c_str());
  std::remove(labels_path.c_str());
}

TEST_CASE("upstream float counts") {
  CHECK(harness::voting_upstream_floats(10, 500) == doctest::Approx(5000.0));
  CHECK(harness::gradient_upstream_floats(906, 100, 1.0) ==
        doctest::Approx(90600.0));
  CHECK(harness::gradient_upstream_floats(10, 4, 0.25) == doctest::Approx(10.0));
  CHECK_THROWS_AS(harness::voting_upstream_floats(1, 5), std::invalid_argument);
  CHECK_THROWS_AS(harness::gradient_upstream_floats(0, 5, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(harness::gradient_upstream_floats(5, 5, 0.0),
                  std::invalid_argument);
}

TEST_CASE("spec and params validation") {
  FederationSpec spec = small_blob_spec();
  spec.num_agents = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_blob_spec();
  spec.input_dim = 2;  // below num_classes for synthetic blobs
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = small_blob_spec();
  spec.source = harness::DataSource::kFileBacked;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

  VotingParams params = centroid_voting_params(10);
  params.k_fraction = 0.0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = centroid_voting_params(10);
  params.feature_map = learners::FeatureMap::Kind::kRandomProjection;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);

  // More queries than pool points.
  params = centroid_voting_params(51);
  CHECK_THROWS_AS(harness::run_ae_dpfl(small_blob_spec(), params),
                  std::invalid_argument);
}

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

#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"

#include "veilvote/config.hpp"

using namespace veilvote;
using config::ConfigError;
using config::RunPlan;

namespace {

std::string error_message(const std::string& text) {
  try {
    config::parse_run_plan(text, "plan.cfg");
  } catch (const ConfigError& error) {
    return error.what();
  }
  return "";
}

}  // namespace

TEST_CASE("full run plan round-trips every section") {
  const std::string text = R"(# demo plan
[federation]
agents = 8
partition = label_sorted
classes_per_agent = 3
source = synthetic
classes = 6
dim = 12
separation = 5.5
points_per_agent = 40
pool = 100
test_points = 120

[run]
seed = 17
repeats = 3
output = runs.jsonl

[ae]
sigma = 30
queries = 80
delta = 0.002
granularity = instance
teacher = centroid
student = logistic
student_epochs = 25
student_lr = 0.2
student_batch = 16

[ae:hot]
sigma = 10
queries = 80

[knn]
sigma = 22
queries = 60
k = 4
feature_map = random_projection
projection_dim = 9
projection_seed = 5

[fedavg]
rounds = 12
eta = 0.25
inner_iters = 2
participation = 0.5
lr_decay = true

[dp_fedavg]
sigma = 11
clip = 0.75
rounds = 20
eta = 0.1
delta = 0.0005
)";
  const RunPlan plan = config::parse_run_plan(text, "plan.cfg");
  CHECK(plan.federation.num_agents == 8);
  CHECK(plan.federation.partition == harness::PartitionKind::kLabelSorted);
  CHECK(plan.federation.classes_per_agent == 3);
  CHECK(plan.federation.num_classes == 6);
  CHECK(plan.federation.input_dim == 12);
  CHECK(plan.federation.separation == doctest::Approx(5.5));
  CHECK(plan.federation.points_per_agent == 40);
  CHECK(plan.federation.public_pool_size == 100);
  CHECK(plan.federation.test_size == 120);
  CHECK(plan.base_seed == 17);
  CHECK(plan.repeats == 3);
  CHECK(plan.output_path == "runs.jsonl");

  REQUIRE(plan.schemes.size() == 5);
  const config::SchemeBlock& ae = plan.schemes[0];
  CHECK(ae.scheme == harness::SchemeKind::kAeDpfl);
  CHECK(ae.label.empty());
  CHECK(ae.voting.sigma == doctest::Approx(30.0));
  CHECK(ae.voting.queries == 80);
  CHECK(ae.voting.delta == doctest::Approx(0.002));
  CHECK(ae.voting.granularity == accounting::Granularity::kInstanceLevel);
  CHECK(ae.voting.teacher.kind == learners::ClassifierKind::kNearestCentroid);
  CHECK(ae.voting.student.kind == learners::ClassifierKind::kMultinomialLogistic);
  CHECK(ae.voting.student.epochs == 25);
  CHECK(ae.voting.student.learning_rate == doctest::Approx(0.2));
  CHECK(ae.voting.student.batch_size == 16);

  CHECK(plan.schemes[1].label == "hot");
  CHECK(plan.schemes[1].voting.sigma == doctest::Approx(10.0));

  const config::SchemeBlock& knn = plan.schemes[2];
  CHECK(knn.scheme == harness::SchemeKind::kKnnDpfl);
  CHECK(knn.voting.k == 4);
  CHECK(knn.voting.feature_map == learners::FeatureMap::Kind::kRandomProjection);
  CHECK(knn.voting.projection_dim == 9);
  CHECK(knn.voting.projection_seed == 5);

  const config::SchemeBlock& plain = plan.schemes[3];
  CHECK(plain.scheme == harness::SchemeKind::kFedAvg);
  CHECK(plain.fedavg.rounds == 12);
  CHECK(plain.fedavg.eta == doctest::Approx(0.25));
  CHECK(plain.fedavg.inner_iters == 2);
  CHECK(plain.fedavg.participation == doctest::Approx(0.5));
  CHECK(plain.fedavg.lr_decay);

  const config::SchemeBlock& noisy = plan.schemes[4];
  CHECK(noisy.scheme == harness::SchemeKind::kDpFedAvg);
  CHECK(noisy.fedavg.sigma == doctest::Approx(11.0));
  CHECK(noisy.fedavg.clip_threshold == doctest::Approx(0.75));
  CHECK(noisy.delta == doctest::Approx(0.0005));
}

TEST_CASE("defaults survive an almost-empty plan") {
  const RunPlan plan = config::parse_run_plan("[ae]\n", "plan.cfg");
  CHECK(plan.federation.num_agents == 10);
  CHECK(plan.repeats == 1);
  CHECK(plan.output_path.empty());
  REQUIRE(plan.schemes.size() == 1);
  CHECK(plan.schemes[0].voting.sigma == doctest::Approx(25.0));
}

TEST_CASE("parse errors carry the origin and line number") {
  SUBCASE("unknown key") {
    const std::string message = error_message("[ae]\nbogus = 1\n");
    CHECK(message.find("plan.cfg:2") != std::string::npos);
    CHECK(message.find("bogus") != std::string::npos);
  }
  SUBCASE("federation key inside a scheme block") {
    const std::string message = error_message("[ae]\nagents = 4\n");
    CHECK(message.find("belongs in [federation]") != std::string::npos);
  }
  SUBCASE("unknown section") {
    const std::string message = error_message("[mystery]\n");
    CHECK(message.find("plan.cfg:1") != std::string::npos);
    CHECK(message.find("mystery") != std::string::npos);
  }
  SUBCASE("key before any section") {
    const std::string message = error_message("sigma = 3\n[ae]\n");
    CHECK(message.find("plan.cfg:1") != std::string::npos);
  }
  SUBCASE("malformed integer") {
    const std::string message = error_message("[ae]\nqueries = ten\n");
    CHECK(message.find("plan.cfg:2") != std::string::npos);
  }
  SUBCASE("malformed real") {
    CHECK_FALSE(error_message("[ae]\nsigma = 1.5x\n").empty());
  }
  SUBCASE("unknown enum value") {
    const std::string message =
        error_message("[federation]\npartition = scrambled\n[ae]\n");
    CHECK(message.find("plan.cfg:2") != std::string::npos);
  }
  SUBCASE("no scheme sections") {
    const std::string message = error_message("[federation]\nagents = 3\n");
    CHECK_FALSE(message.empty());
  }
  SUBCASE("unterminated section header") {
    CHECK_FALSE(error_message("[ae\n").empty());
  }
  SUBCASE("label on a non-scheme section") {
    CHECK_FALSE(error_message("[run:fast]\n[ae]\n").empty());
    CHECK_FALSE(error_message("[federation:a]\n[ae]\n").empty());
  }
  SUBCASE("repeats below one") {
    const std::string message = error_message("[run]\nrepeats = 0\n[ae]\n");
    CHECK(message.find("plan.cfg:2") != std::string::npos);
  }
  SUBCASE("line without an equals sign") {
    CHECK_FALSE(error_message("[ae]\nsigma\n").empty());
  }
}

TEST_CASE("load_run_plan reads from disk and names the file in errors") {
  const std::string path = "test_plan.cfg";
  {
    std::ofstream out(path);
    out << "[ae]\nqueries = 33\n";
  }
  const RunPlan plan = config::load_run_plan(path);
  CHECK(plan.schemes.size() == 1);
  CHECK(plan.schemes[0].voting.queries == 33);
  {
    std::ofstream out(path);
    out << "[ae]\nqueries = bad\n";
  }
  try {
    config::load_run_plan(path);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& error) {
    CHECK(std::string(error.what()).find(path + ":2") != std::string::npos);
  }
  std::remove(path.c_str());
  CHECK_THROWS_AS(config::load_run_plan("no_such_plan.cfg"), ConfigError);
}

TEST_CASE("margins csv") {
  const std::string path = "test_margins.csv";
  {
    std::ofstream out(path);
    out << "query_id,gamma\n0,0.5\n1,1\n2,0.25\n";
  }
  const std::vector<accounting::MarginRecord> records =
      config::read_margins_csv(path);
  REQUIRE(records.size() == 3);
  CHECK(records[0].query_id == 0);
  CHECK(records[0].gamma == doctest::Approx(0.5));
  CHECK(records[2].gamma == doctest::Approx(0.25));

  SUBCASE("wrong header") {
    std::ofstream out(path);
    out << "id,margin\n0,0.5\n";
    out.close();
    CHECK_THROWS_AS(config::read_margins_csv(path), std::runtime_error);
  }
  SUBCASE("malformed row") {
    std::ofstream out(path);
    out << "query_id,gamma\n0,half\n";
    out.close();
    CHECK_THROWS_AS(config::read_margins_csv(path), std::runtime_error);
  }
  SUBCASE("empty body") {
    std::ofstream out(path);
    out << "query_id,gamma\n";
    out.close();
    CHECK_THROWS_AS(config::read_margins_csv(path), std::runtime_error);
  }
  std::remove(path.c_str());
}

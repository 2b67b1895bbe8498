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
#include <fstream>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "veilvote/learners.hpp"
#include "veilvote/rng.hpp"

using namespace veilvote;
using learners::AgentDataset;
using learners::Classifier;
using learners::ClassifierKind;
using learners::FeatureMap;
using learners::TrainConfig;

namespace {

AgentDataset blob_dataset(int points_per_class, int num_classes, int dim,
                          double separation, uint64_t seed) {
  AgentDataset data;
  const int n = points_per_class * num_classes;
  data.features = Matrix(n, dim);
  data.labels.resize(n);
  data.num_classes = num_classes;
  rng::GaussianSampler sampler(seed);
  for (int i = 0; i < n; ++i) {
    const int label = i % num_classes;
    data.labels[i] = label;
    for (int j = 0; j < dim; ++j) data.features.at(i, j) = sampler.next();
    data.features.at(i, label % dim) += separation;
  }
  return data;
}

AgentDataset tiny_dataset(const std::vector<std::vector<double>>& points,
                          const std::vector<int>& labels, int num_classes) {
  AgentDataset data;
  data.features = Matrix(static_cast<int>(points.size()),
                         static_cast<int>(points[0].size()));
  for (size_t i = 0; i < points.size(); ++i) {
    for (size_t j = 0; j < points[i].size(); ++j) {
      data.features.at(static_cast<int>(i), static_cast<int>(j)) = points[i][j];
    }
  }
  data.labels = labels;
  data.num_classes = num_classes;
  return data;
}

}  // namespace

TEST_CASE("AgentDataset validation") {
  AgentDataset data = tiny_dataset({{0.0, 1.0}}, {0}, 2);
  CHECK_NOTHROW(data.validate());
  data.labels[0] = 2;
  CHECK_THROWS_AS(data.validate(), std::invalid_argument);
  data.labels[0] = 0;
  data.features.at(0, 1) = std::nan("");
  CHECK_THROWS_AS(data.validate(), std::invalid_argument);
  AgentDataset mismatched = tiny_dataset({{0.0}, {1.0}}, {0}, 2);
  CHECK_THROWS_AS(mismatched.validate(), std::invalid_argument);
}

TEST_CASE("logistic_loss_and_grad matches finite differences") {
  const AgentDataset data = blob_dataset(4, 3, 4, 1.5, 21);
  std::mt19937_64 engine(3);
  std::uniform_real_distribution<double> uniform(-0.5, 0.5);
  Matrix weights(3, 5);
  for (double& w : weights.data()) w = uniform(engine);

  const auto [loss, grad] =
      learners::logistic_loss_and_grad(weights, data.features, data.labels);
  CHECK(std::isfinite(loss));
  const double h = 1e-6;
  for (int probe = 0; probe < 20; ++probe) {
    const int index = static_cast<int>(engine() % weights.data().size());
    Matrix plus = weights;
    Matrix minus = weights;
    plus.data()[index] += h;
    minus.data()[index] -= h;
    const double loss_plus =
        learners::logistic_loss_and_grad(plus, data.features, data.labels).first;
    const double loss_minus =
        learners::logistic_loss_and_grad(minus, data.features, data.labels).first;
    const double numeric = (loss_plus - loss_minus) / (2.0 * h);
    const double analytic = grad.data()[index];
    CHECK(std::fabs(numeric - analytic) <=
          1e-4 * std::max(1.0, std::fabs(analytic)));
  }
}

TEST_CASE("logistic training reduces loss and fits separable blobs") {
  const AgentDataset data = blob_dataset(30, 3, 4, 3.0, 5);
  TrainConfig config;
  config.kind = ClassifierKind::kMultinomialLogistic;
  config.epochs = 60;
  config.seed = 9;
  const Classifier model = learners::train_classifier(data, config);
  CHECK_FALSE(model.degenerate());
  CHECK(model.num_classes() == 3);
  CHECK(model.input_dim() == 4);

  const Matrix zeros(3, 5);
  const double loss_before =
      learners::logistic_loss_and_grad(zeros, data.features, data.labels).first;
  const double loss_after =
      learners::logistic_loss_and_grad(model.weights(), data.features, data.labels)
          .first;
  CHECK(loss_after < loss_before);

  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    if (model.predict_label(data.features.row(i)) == data.labels[i]) ++correct;
  }
  CHECK(static_cast<double>(correct) / data.size() >= 0.95);
}

TEST_CASE("logistic training is deterministic in the seed") {
  const AgentDataset data = blob_dataset(10, 2, 3, 2.0, 8);
  TrainConfig config;
  config.seed = 4;
  const Classifier a = learners::train_classifier(data, config);
  const Classifier b = learners::train_classifier(data, config);
  CHECK(a.weights().data() == b.weights().data());
  config.seed = 5;
  const Classifier c = learners::train_classifier(data, config);
  CHECK(a.weights().data() != c.weights().data());
}

TEST_CASE("nearest centroid computes exact class means") {
  const AgentDataset data = tiny_dataset(
      {{0.0, 0.0}, {2.0, 0.0}, {0.0, 4.0}, {0.0, 6.0}}, {0, 0, 1, 1}, 3);
  TrainConfig config;
  config.kind = ClassifierKind::kNearestCentroid;
  const Classifier model = learners::train_classifier(data, config);
  CHECK(model.weights().at(0, 0) == doctest::Approx(1.0));
  CHECK(model.weights().at(0, 1) == doctest::Approx(0.0));
  CHECK(model.weights().at(1, 0) == doctest::Approx(0.0));
  CHECK(model.weights().at(1, 1) == doctest::Approx(5.0));
  // Class 2 was never seen, so it can never win.
  CHECK(model.predict_label(std::vector<double>{100.0, 100.0}) != 2);
  CHECK(model.predict_label(std::vector<double>{1.0, 0.5}) == 0);
  CHECK(model.predict_label(std::vector<double>{0.0, 5.0}) == 1);
}

TEST_CASE("single-label shards train but are flagged degenerate") {
  const AgentDataset data = tiny_dataset({{0.0}, {1.0}}, {1, 1}, 3);
  TrainConfig config;
  config.kind = ClassifierKind::kNearestCentroid;
  const Classifier model = learners::train_classifier(data, config);
  CHECK(model.degenerate());
  CHECK(model.predict_label(std::vector<double>{50.0}) == 1);
}

TEST_CASE("prediction ties resolve to the lowest class") {
  const Classifier logistic = Classifier::multinomial_logistic(Matrix(3, 3));
  CHECK(logistic.predict_label(std::vector<double>{1.0, -2.0}) == 0);
  const AgentDataset data =
      tiny_dataset({{-1.0, 0.0}, {1.0, 0.0}}, {0, 1}, 2);
  TrainConfig config;
  config.kind = ClassifierKind::kNearestCentroid;
  const Classifier centroid = learners::train_classifier(data, config);
  CHECK(centroid.predict_label(std::vector<double>{0.0, 3.0}) == 0);
}

TEST_CASE("predict returns a one-hot vote") {
  const AgentDataset data = tiny_dataset({{0.0}, {4.0}}, {0, 1}, 2);
  TrainConfig config;
  config.kind = ClassifierKind::kNearestCentroid;
  const Classifier model = learners::train_classifier(data, config);
  const voting::VoteVector vote = model.predict(std::vector<double>{4.2});
  CHECK(vote.values == std::vector<double>{0.0, 1.0});
  CHECK(vote.kind == voting::VoteKind::kOneHot);
}

TEST_CASE("knn votes match a brute-force reference") {
  const AgentDataset data = blob_dataset(10, 4, 3, 1.0, 77);
  const FeatureMap phi = FeatureMap::identity(3);
  const learners::KnnIndex index(data, phi);
  rng::GaussianSampler sampler(99);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> query(3);
    for (double& q : query) q = 2.0 * sampler.next();
    const int k = 1 + trial % 9;
    const voting::VoteVector vote = index.predict(query, k);

    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < data.size(); ++i) {
      double d2 = 0.0;
      for (int j = 0; j < 3; ++j) {
        const double diff = data.features.at(i, j) - query[j];
        d2 += diff * diff;
      }
      order.emplace_back(d2, i);
    }
    std::sort(order.begin(), order.end());
    std::vector<double> expected(4, 0.0);
    for (int i = 0; i < k; ++i) expected[data.labels[order[i].second]] += 1.0 / k;
    for (int c = 0; c < 4; ++c) {
      CHECK(vote.values[c] == doctest::Approx(expected[c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("knn distance ties pick the lower data index") {
  // Two points at the same location with different labels.
  const AgentDataset data =
      tiny_dataset({{1.0, 0.0}, {1.0, 0.0}, {5.0, 0.0}}, {1, 0, 0}, 2);
  const FeatureMap phi = FeatureMap::identity(2);
  const voting::VoteVector vote =
      learners::knn_predict(data, phi, std::vector<double>{0.0, 0.0}, 1);
  CHECK(vote.values == std::vector<double>{0.0, 1.0});
}

TEST_CASE("knn rejects out-of-range k") {
  const AgentDataset data = tiny_dataset({{0.0}, {1.0}}, {0, 1}, 2);
  const FeatureMap phi = FeatureMap::identity(1);
  CHECK_THROWS_AS(learners::knn_predict(data, phi, std::vector<double>{0.0}, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(learners::knn_predict(data, phi, std::vector<double>{0.0}, 0),
                  std::invalid_argument);
}

TEST_CASE("default_k is the ceiling of the fraction, clamped to [1, n]") {
  CHECK(learners::default_k(100, 0.05) == 5);
  CHECK(learners::default_k(10, 0.05) == 1);
  CHECK(learners::default_k(19, 0.05) == 1);
  CHECK(learners::default_k(21, 0.05) == 2);
  CHECK(learners::default_k(3, 1.0) == 3);
  CHECK_THROWS_AS(learners::default_k(0, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(learners::default_k(10, 0.0), std::invalid_argument);
}

TEST_CASE("identity feature map returns its input") {
  const FeatureMap phi = FeatureMap::identity(3);
  const std::vector<double> x = {1.0, -2.0, 0.5};
  CHECK(phi.apply(x) == x);
  CHECK(phi.output_dim() == 3);
  CHECK_THROWS_AS(phi.apply(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("random projection roughly preserves squared norms") {
  const int input_dim = 20;
  const int output_dim = 500;
  const FeatureMap phi = FeatureMap::random_projection(input_dim, output_dim, 3);
  rng::GaussianSampler sampler(12);
  std::vector<double> x(input_dim);
  double norm_sq = 0.0;
  for (double& value : x) {
    value = sampler.next();
    norm_sq += value * value;
  }
  const std::vector<double> projected = phi.apply(x);
  REQUIRE(static_cast<int>(projected.size()) == output_dim);
  double projected_sq = 0.0;
  for (double value : projected) projected_sq += value * value;
  CHECK(projected_sq / norm_sq == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("random projection is deterministic in the seed") {
  const FeatureMap a = FeatureMap::random_projection(4, 6, 11);
  const FeatureMap b = FeatureMap::random_projection(4, 6, 11);
  const FeatureMap c = FeatureMap::random_projection(4, 6, 12);
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  CHECK(a.apply(x) == b.apply(x));
  CHECK(a.apply(x) != c.apply(x));
}

TEST_CASE("vvft files round-trip through float32") {
  Matrix matrix(3, 2);
  matrix.data() = {1.5, -2.25, 0.0, 1e-3, 123456.0, -0.125};
  const std::string path = "test_roundtrip.vvft";
  learners::write_vvft(path, matrix);
  const Matrix loaded = learners::read_vvft(path);
  REQUIRE(loaded.rows() == 3);
  REQUIRE(loaded.cols() == 2);
  for (size_t i = 0; i < matrix.data().size(); ++i) {
    CHECK(loaded.data()[i] ==
          static_cast<double>(static_cast<float>(matrix.data()[i])));
  }
  std::remove(path.c_str());
}

TEST_CASE("vvft reader rejects bad files") {
  SUBCASE("bad magic") {
    std::ofstream out("bad_magic.vvft", std::ios::binary);
    out << "NOPE" << std::string(8, '\0');
    out.close();
    CHECK_THROWS_AS(learners::read_vvft("bad_magic.vvft"), std::runtime_error);
    std::remove("bad_magic.vvft");
  }
  SUBCASE("truncated payload") {
    Matrix matrix(2, 2);
    matrix.data() = {1.0, 2.0, 3.0, 4.0};
    learners::write_vvft("truncated.vvft", matrix);
    std::ifstream in("truncated.vvft", std::ios::binary);
    std::string contents((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out("truncated.vvft", std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<long>(contents.size() - 5));
    out.close();
    CHECK_THROWS_AS(learners::read_vvft("truncated.vvft"), std::runtime_error);
    std::remove("truncated.vvft");
  }
  SUBCASE("non-finite payload") {
    std::ofstream out("inf.vvft", std::ios::binary);
    out << "VVFT";
    const unsigned char header[8] = {1, 0, 0, 0, 1, 0, 0, 0};
    out.write(reinterpret_cast<const char*>(header), 8);
    const unsigned char inf_bits[4] = {0x00, 0x00, 0x80, 0x7f};
    out.write(reinterpret_cast<const char*>(inf_bits), 4);
    out.close();
    CHECK_THROWS_AS(learners::read_vvft("inf.vvft"), std::runtime_error);
    std::remove("inf.vvft");
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(learners::read_vvft("does_not_exist.vvft"),
                    std::runtime_error);
  }
}

TEST_CASE("labels csv round-trips and validates") {
  const std::vector<int> labels = {2, 0, 1, 1};
  learners::write_labels_csv("labels_ok.csv", labels);
  CHECK(learners::read_labels_csv("labels_ok.csv") == labels);
  std::remove("labels_ok.csv");

  std::ofstream bad_header("labels_bad.csv");
  bad_header << "idx,label\n0,1\n";
  bad_header.close();
  CHECK_THROWS_AS(learners::read_labels_csv("labels_bad.csv"), std::runtime_error);
  std::remove("labels_bad.csv");

  std::ofstream out_of_order("labels_order.csv");
  out_of_order << "index,label\n0,1\n2,0\n";
  out_of_order.close();
  CHECK_THROWS_AS(learners::read_labels_csv("labels_order.csv"),
                  std::runtime_error);
  std::remove("labels_order.csv");
}

TEST_CASE("train_student distills pseudo-labels") {
  const AgentDataset data = blob_dataset(25, 2, 3, 3.0, 6);
  TrainConfig config;
  config.epochs = 40;
  config.seed = 2;
  const Classifier student = learners::train_student(
      data.features, data.labels, data.num_classes, config);
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    if (student.predict_label(data.features.row(i)) == data.labels[i]) ++correct;
  }
  CHECK(static_cast<double>(correct) / data.size() >= 0.9);
}

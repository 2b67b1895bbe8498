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
#include <string>
#include <utility>
#include <vector>

#include "veilvote/common.hpp"
#include "veilvote/votes.hpp"

namespace veilvote::learners {

// One agent's private shard.
struct AgentDataset {
  Matrix features;          // n x d
  std::vector<int> labels;  // values in [0, num_classes)
  int num_classes = 0;
  std::string domain_tag;

  int size() const { return features.rows(); }
  int dim() const { return features.cols(); }
  void validate() const;
};

enum class ClassifierKind { kMultinomialLogistic, kNearestCentroid };

struct TrainConfig {
  ClassifierKind kind = ClassifierKind::kMultinomialLogistic;
  int epochs = 40;
  double learning_rate = 0.3;
  int batch_size = 32;
  uint64_t seed = 0;
  void validate() const;
};

// A trained model. Multinomial logistic stores C x (d+1) weights with the
// bias folded into the last column; nearest centroid stores C x d class
// means plus a seen mask for classes absent from the training shard.
class Classifier {
 public:
  static Classifier multinomial_logistic(Matrix weights);
  static Classifier nearest_centroid(Matrix centroids, std::vector<char> seen);

  // Score ties resolve to the lowest class index.
  int predict_label(std::span<const double> x) const;
  voting::VoteVector predict(std::span<const double> x) const;

  ClassifierKind kind() const { return kind_; }
  int num_classes() const { return weights_.rows(); }
  int input_dim() const;
  const Matrix& weights() const { return weights_; }
  // True when the training shard held a single distinct label.
  bool degenerate() const { return degenerate_; }

 private:
  friend Classifier train_classifier(const AgentDataset& data,
                                     const TrainConfig& config);

  Classifier(ClassifierKind kind, Matrix weights, std::vector<char> seen)
      : kind_(kind), weights_(std::move(weights)), seen_(std::move(seen)) {}

  ClassifierKind kind_ = ClassifierKind::kMultinomialLogistic;
  Matrix weights_;
  std::vector<char> seen_;
  bool degenerate_ = false;
};

// Seeded mini-batch gradient descent on the cross-entropy (logistic) or a
// per-class mean (centroid). A single-class shard trains but the returned
// model reports degenerate().
Classifier train_classifier(const AgentDataset& data, const TrainConfig& config);

// Student distillation: the same classifier families, fit to pseudo-labeled
// public points.
Classifier train_student(const Matrix& features, const std::vector<int>& pseudo_labels,
                         int num_classes, const TrainConfig& config);

// Mean cross-entropy and its gradient for C x (d+1) logistic weights. Shared
// by the trainer, the gradient baseline, and the finite-difference check.
std::pair<double, Matrix> logistic_loss_and_grad(const Matrix& weights,
                                                 const Matrix& features,
                                                 const std::vector<int>& labels);

// phi: raw inputs -> the space where kNN distances are measured.
class FeatureMap {
 public:
  enum class Kind { kIdentity, kRandomProjection, kPrecomputed };

  static FeatureMap identity(int dim);
  // Gaussian entries scaled by 1/sqrt(output_dim), fixed by seed.
  static FeatureMap random_projection(int input_dim, int output_dim, uint64_t seed);
  // Linear map loaded from a VVFT matrix file (rows = output dim).
  static FeatureMap precomputed(const std::string& vvft_path);

  std::vector<double> apply(std::span<const double> x) const;
  Kind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int output_dim() const;

 private:
  FeatureMap(Kind kind, int input_dim, Matrix projection)
      : kind_(kind), input_dim_(input_dim), projection_(std::move(projection)) {}

  Kind kind_ = Kind::kIdentity;
  int input_dim_ = 0;
  Matrix projection_;  // empty for identity
};

// Frequency vote of the k nearest neighbors of x in phi-space, Euclidean
// distance, distance ties resolved by the lower data index. Projects the
// whole shard on every call; use KnnIndex to cache across queries.
voting::VoteVector knn_predict(const AgentDataset& data, const FeatureMap& phi,
                               std::span<const double> x, int k);

// kNN with the projected shard cached.
class KnnIndex {
 public:
  KnnIndex(const AgentDataset& data, const FeatureMap& phi);
  voting::VoteVector predict(std::span<const double> x, int k) const;
  int size() const { return projected_.rows(); }

 private:
  FeatureMap phi_;
  Matrix projected_;
  std::vector<int> labels_;
  int num_classes_ = 0;
};

// Default neighbor count: ceil(fraction * n), clamped to [1, n].
int default_k(int dataset_size, double fraction = 0.05);

// VVFT dense matrix file: magic "VVFT", u32 rows, u32 cols, then row-major
// float32 values, all little endian. Readers reject bad magic, truncated
// payloads, and non-finite values.
Matrix read_vvft(const std::string& path);
void write_vvft(const std::string& path, const Matrix& matrix);

// Labels CSV with the exact header "index,label"; indices must cover 0..n-1.
std::vector<int> read_labels_csv(const std::string& path);
void write_labels_csv(const std::string& path, const std::vector<int>& labels);

}  // namespace veilvote::learners

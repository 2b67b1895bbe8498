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

#include "veilvote/learners.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "veilvote/rng.hpp"

namespace veilvote::learners {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

// Adds one sample's cross-entropy gradient into grad and returns its loss.
double accumulate_sample(const Matrix& weights, std::span<const double> x,
                         int label, Matrix& grad) {
  const int num_classes = weights.rows();
  const int dim = weights.cols() - 1;
  std::vector<double> scores(num_classes, 0.0);
  for (int c = 0; c < num_classes; ++c) {
    double score = weights.at(c, dim);  // bias
    const std::span<const double> row = weights.row(c);
    for (int j = 0; j < dim; ++j) score += row[j] * x[j];
    scores[c] = score;
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  double normalizer = 0.0;
  for (double& score : scores) {
    score = std::exp(score - top);
    normalizer += score;
  }
  for (int c = 0; c < num_classes; ++c) {
    const double coefficient = scores[c] / normalizer - (c == label ? 1.0 : 0.0);
    const std::span<double> grad_row = grad.row(c);
    for (int j = 0; j < dim; ++j) grad_row[j] += coefficient * x[j];
    grad_row[dim] += coefficient;
  }
  return -(std::log(scores[label] / normalizer));
}

Matrix fit_centroids(const AgentDataset& data, std::vector<char>& seen) {
  Matrix centroids(data.num_classes, data.dim());
  std::vector<int> counts(data.num_classes, 0);
  seen.assign(data.num_classes, 0);
  for (int i = 0; i < data.size(); ++i) {
    const int label = data.labels[i];
    const std::span<const double> x = data.features.row(i);
    const std::span<double> mean = centroids.row(label);
    for (int j = 0; j < data.dim(); ++j) mean[j] += x[j];
    ++counts[label];
  }
  for (int c = 0; c < data.num_classes; ++c) {
    if (counts[c] == 0) continue;
    seen[c] = 1;
    const std::span<double> mean = centroids.row(c);
    for (int j = 0; j < data.dim(); ++j) mean[j] /= counts[c];
  }
  return centroids;
}

Matrix fit_logistic(const AgentDataset& data, const TrainConfig& config) {
  const int num_classes = data.num_classes;
  const int dim = data.dim();
  Matrix weights(num_classes, dim + 1);
  std::mt19937_64 engine(config.seed);
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Matrix grad(num_classes, dim + 1);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), engine);
    for (int start = 0; start < data.size(); start += config.batch_size) {
      const int end = std::min(start + config.batch_size, data.size());
      std::fill(grad.data().begin(), grad.data().end(), 0.0);
      for (int b = start; b < end; ++b) {
        const int i = order[b];
        accumulate_sample(weights, data.features.row(i), data.labels[i], grad);
      }
      const double step = config.learning_rate / (end - start);
      for (size_t j = 0; j < weights.data().size(); ++j) {
        weights.data()[j] -= step * grad.data()[j];
      }
    }
  }
  return weights;
}

void put_u32(std::ostream& out, uint32_t value) {
  const char bytes[4] = {static_cast<char>(value), static_cast<char>(value >> 8),
                         static_cast<char>(value >> 16), static_cast<char>(value >> 24)};
  out.write(bytes, 4);
}

bool get_u32(std::istream& in, uint32_t& value) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) return false;
  value = static_cast<uint32_t>(bytes[0]) | (static_cast<uint32_t>(bytes[1]) << 8) |
          (static_cast<uint32_t>(bytes[2]) << 16) | (static_cast<uint32_t>(bytes[3]) << 24);
  return true;
}

int parse_int(const std::string& text, const std::string& what) {
  int value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument(what + ": not an integer: '" + text + "'");
  }
  return value;
}

}  // namespace

void AgentDataset::validate() const {
  require(features.rows() >= 1, "dataset must not be empty");
  require(features.cols() >= 1, "dataset needs at least one feature");
  require(static_cast<int>(labels.size()) == features.rows(),
          "label count must match feature rows");
  require(num_classes >= 2, "num_classes must be at least 2");
  for (int label : labels) {
    require(label >= 0 && label < num_classes, "label out of range");
  }
  for (double value : features.data()) {
    require(std::isfinite(value), "features must be finite");
  }
}

void TrainConfig::validate() const {
  require(epochs >= 1, "epochs must be at least 1");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(batch_size >= 1, "batch_size must be at least 1");
}

Classifier Classifier::multinomial_logistic(Matrix weights) {
  require(weights.rows() >= 2, "need at least 2 classes");
  require(weights.cols() >= 2, "logistic weights need feature and bias columns");
  return Classifier(ClassifierKind::kMultinomialLogistic, std::move(weights), {});
}

Classifier Classifier::nearest_centroid(Matrix centroids, std::vector<char> seen) {
  require(centroids.rows() >= 2, "need at least 2 classes");
  require(centroids.cols() >= 1, "centroids need at least one feature");
  require(static_cast<int>(seen.size()) == centroids.rows(),
          "seen mask must cover every class");
  require(std::count(seen.begin(), seen.end(), 1) >= 1,
          "at least one class must be seen");
  return Classifier(ClassifierKind::kNearestCentroid, std::move(centroids),
                    std::move(seen));
}

int Classifier::input_dim() const {
  return kind_ == ClassifierKind::kMultinomialLogistic ? weights_.cols() - 1
                                                       : weights_.cols();
}

int Classifier::predict_label(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == input_dim(), "input dimension mismatch");
  if (kind_ == ClassifierKind::kMultinomialLogistic) {
    const int dim = weights_.cols() - 1;
    std::vector<double> scores(weights_.rows(), 0.0);
    for (int c = 0; c < weights_.rows(); ++c) {
      double score = weights_.at(c, dim);
      const std::span<const double> row = weights_.row(c);
      for (int j = 0; j < dim; ++j) score += row[j] * x[j];
      scores[c] = score;
    }
    return argmax_lowest(scores);
  }
  int best = -1;
  double best_distance = 0.0;
  for (int c = 0; c < weights_.rows(); ++c) {
    if (!seen_[c]) continue;
    double distance = 0.0;
    const std::span<const double> mean = weights_.row(c);
    for (int j = 0; j < weights_.cols(); ++j) {
      const double diff = x[j] - mean[j];
      distance += diff * diff;
    }
    if (best < 0 || distance < best_distance) {
      best = c;
      best_distance = distance;
    }
  }
  return best;
}

voting::VoteVector Classifier::predict(std::span<const double> x) const {
  return voting::one_hot(predict_label(x), num_classes());
}

Classifier train_classifier(const AgentDataset& data, const TrainConfig& config) {
  data.validate();
  config.validate();
  const std::set<int> distinct(data.labels.begin(), data.labels.end());
  Classifier model = [&] {
    if (config.kind == ClassifierKind::kNearestCentroid) {
      std::vector<char> seen;
      Matrix centroids = fit_centroids(data, seen);
      return Classifier::nearest_centroid(std::move(centroids), std::move(seen));
    }
    return Classifier::multinomial_logistic(fit_logistic(data, config));
  }();
  model.degenerate_ = distinct.size() == 1;
  return model;
}

Classifier train_student(const Matrix& features, const std::vector<int>& pseudo_labels,
                         int num_classes, const TrainConfig& config) {
  AgentDataset data;
  data.features = features;
  data.labels = pseudo_labels;
  data.num_classes = num_classes;
  data.domain_tag = "student";
  return train_classifier(data, config);
}

std::pair<double, Matrix> logistic_loss_and_grad(const Matrix& weights,
                                                 const Matrix& features,
                                                 const std::vector<int>& labels) {
  require(weights.rows() >= 2, "need at least 2 classes");
  require(weights.cols() == features.cols() + 1, "weights shape mismatch");
  require(static_cast<int>(labels.size()) == features.rows(),
          "label count must match feature rows");
  require(features.rows() >= 1, "need at least one sample");
  Matrix grad(weights.rows(), weights.cols());
  double loss = 0.0;
  for (int i = 0; i < features.rows(); ++i) {
    require(labels[i] >= 0 && labels[i] < weights.rows(), "label out of range");
    loss += accumulate_sample(weights, features.row(i), labels[i], grad);
  }
  const double inv_n = 1.0 / features.rows();
  loss *= inv_n;
  for (double& value : grad.data()) value *= inv_n;
  return {loss, std::move(grad)};
}

FeatureMap FeatureMap::identity(int dim) {
  require(dim >= 1, "identity map needs a positive dimension");
  return FeatureMap(Kind::kIdentity, dim, Matrix());
}

FeatureMap FeatureMap::random_projection(int input_dim, int output_dim, uint64_t seed) {
  require(input_dim >= 1, "input_dim must be positive");
  require(output_dim >= 1, "output_dim must be positive");
  rng::GaussianSampler sampler(rng::derive_seed(seed, rng::kStreamProjection));
  Matrix projection(output_dim, input_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(output_dim));
  for (double& value : projection.data()) value = scale * sampler.next();
  return FeatureMap(Kind::kRandomProjection, input_dim, std::move(projection));
}

FeatureMap FeatureMap::precomputed(const std::string& vvft_path) {
  Matrix projection = read_vvft(vvft_path);
  const int input_dim = projection.cols();
  return FeatureMap(Kind::kPrecomputed, input_dim, std::move(projection));
}

std::vector<double> FeatureMap::apply(std::span<const double> x) const {
  require(static_cast<int>(x.size()) == input_dim_, "feature-map dimension mismatch");
  if (kind_ == Kind::kIdentity) return {x.begin(), x.end()};
  std::vector<double> projected(projection_.rows(), 0.0);
  for (int i = 0; i < projection_.rows(); ++i) {
    const std::span<const double> row = projection_.row(i);
    double acc = 0.0;
    for (int j = 0; j < input_dim_; ++j) acc += row[j] * x[j];
    projected[i] = acc;
  }
  return projected;
}

int FeatureMap::output_dim() const {
  return kind_ == Kind::kIdentity ? input_dim_ : projection_.rows();
}

KnnIndex::KnnIndex(const AgentDataset& data, const FeatureMap& phi)
    : phi_(phi), num_classes_(data.num_classes) {
  data.validate();
  require(phi.input_dim() == data.dim(), "feature-map dimension mismatch");
  projected_ = Matrix(data.size(), phi.output_dim());
  for (int i = 0; i < data.size(); ++i) {
    const std::vector<double> row = phi.apply(data.features.row(i));
    std::copy(row.begin(), row.end(), projected_.row(i).begin());
  }
  labels_ = data.labels;
}

voting::VoteVector KnnIndex::predict(std::span<const double> x, int k) const {
  require(k >= 1, "k must be at least 1");
  require(k <= projected_.rows(), "k must not exceed the dataset size");
  const std::vector<double> query = phi_.apply(x);
  std::vector<std::pair<double, int>> distances;
  distances.reserve(projected_.rows());
  for (int i = 0; i < projected_.rows(); ++i) {
    const std::span<const double> row = projected_.row(i);
    double d2 = 0.0;
    for (size_t j = 0; j < query.size(); ++j) {
      const double diff = row[j] - query[j];
      d2 += diff * diff;
    }
    distances.emplace_back(d2, i);
  }
  // Pair order resolves exact distance ties by the lower data index.
  std::partial_sort(distances.begin(), distances.begin() + k, distances.end());
  std::vector<int> neighbor_labels;
  neighbor_labels.reserve(k);
  for (int i = 0; i < k; ++i) neighbor_labels.push_back(labels_[distances[i].second]);
  return voting::knn_frequency(neighbor_labels, num_classes_);
}

voting::VoteVector knn_predict(const AgentDataset& data, const FeatureMap& phi,
                               std::span<const double> x, int k) {
  return KnnIndex(data, phi).predict(x, k);
}

int default_k(int dataset_size, double fraction) {
  require(dataset_size >= 1, "dataset must not be empty");
  require(fraction > 0.0 && fraction <= 1.0, "fraction must lie in (0, 1]");
  const int k = static_cast<int>(std::ceil(fraction * dataset_size));
  return std::clamp(k, 1, dataset_size);
}

Matrix read_vvft(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "VVFT", 4) != 0) {
    throw std::runtime_error(path + ": not a VVFT file (bad magic)");
  }
  uint32_t rows = 0;
  uint32_t cols = 0;
  if (!get_u32(in, rows) || !get_u32(in, cols)) {
    throw std::runtime_error(path + ": truncated VVFT header");
  }
  if (rows == 0 || cols == 0) throw std::runtime_error(path + ": empty VVFT matrix");
  const uint64_t count = static_cast<uint64_t>(rows) * cols;
  if (count > (1ULL << 28)) throw std::runtime_error(path + ": VVFT dimensions overflow");
  Matrix matrix(static_cast<int>(rows), static_cast<int>(cols));
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t bits = 0;
    if (!get_u32(in, bits)) throw std::runtime_error(path + ": truncated VVFT payload");
    float value = 0.0f;
    std::memcpy(&value, &bits, 4);
    if (!std::isfinite(value)) {
      throw std::runtime_error(path + ": non-finite value in VVFT payload");
    }
    matrix.data()[i] = static_cast<double>(value);
  }
  return matrix;
}

void write_vvft(const std::string& path, const Matrix& matrix) {
  if (matrix.rows() < 1 || matrix.cols() < 1) {
    throw std::invalid_argument("write_vvft: empty matrix");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write("VVFT", 4);
  put_u32(out, static_cast<uint32_t>(matrix.rows()));
  put_u32(out, static_cast<uint32_t>(matrix.cols()));
  for (double value : matrix.data()) {
    const float narrowed = static_cast<float>(value);
    uint32_t bits = 0;
    std::memcpy(&bits, &narrowed, 4);
    put_u32(out, bits);
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<int> read_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty labels file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "index,label") {
    throw std::runtime_error(path + ": labels header must be 'index,label'");
  }
  std::vector<int> labels;
  int expected_index = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error(path + ": malformed labels row '" + line + "'");
    }
    const int index = parse_int(line.substr(0, comma), path);
    const int label = parse_int(line.substr(comma + 1), path);
    if (index != expected_index) {
      throw std::runtime_error(path + ": label indices must run 0..n-1 in order");
    }
    if (label < 0) throw std::runtime_error(path + ": negative label");
    labels.push_back(label);
    ++expected_index;
  }
  if (labels.empty()) throw std::runtime_error(path + ": no label rows");
  return labels;
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "index,label\n";
  for (size_t i = 0; i < labels.size(); ++i) out << i << "," << labels[i] << "\n";
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace veilvote::learners

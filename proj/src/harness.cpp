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

#include "veilvote/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

#include "veilvote/rng.hpp"
#include "veilvote/votes.hpp"

namespace veilvote::harness {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

std::string partition_name(PartitionKind kind) {
  switch (kind) {
    case PartitionKind::kIid: return "iid";
    case PartitionKind::kLabelSorted: return "label_sorted";
    case PartitionKind::kDomainShift: return "domain_shift";
  }
  return "unknown";
}

std::string source_name(DataSource source) {
  return source == DataSource::kSyntheticBlobs ? "synthetic" : "file";
}

std::string classifier_name(learners::ClassifierKind kind) {
  return kind == learners::ClassifierKind::kMultinomialLogistic ? "logistic"
                                                                : "centroid";
}

std::string feature_map_name(learners::FeatureMap::Kind kind) {
  switch (kind) {
    case learners::FeatureMap::Kind::kIdentity: return "identity";
    case learners::FeatureMap::Kind::kRandomProjection: return "random_projection";
    case learners::FeatureMap::Kind::kPrecomputed: return "precomputed";
  }
  return "unknown";
}

int resolved_classes_per_agent(const FederationSpec& spec) {
  if (spec.classes_per_agent > 0) return spec.classes_per_agent;
  return std::max(1, spec.num_classes / 2);
}

Matrix take_rows(const Matrix& source, int start, int count) {
  Matrix out(count, source.cols());
  for (int i = 0; i < count; ++i) {
    const std::span<const double> row = source.row(start + i);
    std::copy(row.begin(), row.end(), out.row(i).begin());
  }
  return out;
}

std::vector<int> take_labels(const std::vector<int>& labels, int start, int count) {
  return {labels.begin() + start, labels.begin() + start + count};
}

struct RawFederation {
  Matrix features;  // training rows, then pool rows, then test rows
  std::vector<int> labels;
  int training_rows = 0;
};

RawFederation generate_synthetic(const FederationSpec& spec) {
  RawFederation raw;
  raw.training_rows = spec.num_agents * spec.points_per_agent;
  const int total = raw.training_rows + spec.public_pool_size + spec.test_size;
  raw.features = Matrix(total, spec.input_dim);
  raw.labels.resize(total);
  rng::GaussianSampler sampler(rng::derive_seed(spec.seed, rng::kStreamData));
  const double mean_scale = spec.separation / std::sqrt(2.0);
  for (int i = 0; i < total; ++i) {
    const int label = i % spec.num_classes;
    raw.labels[i] = label;
    const std::span<double> row = raw.features.row(i);
    for (int j = 0; j < spec.input_dim; ++j) row[j] = sampler.next();
    row[label] += mean_scale;
  }
  return raw;
}

RawFederation load_file_backed(const FederationSpec& spec) {
  RawFederation raw;
  raw.features = learners::read_vvft(spec.features_path);
  raw.labels = learners::read_labels_csv(spec.labels_path);
  require(static_cast<int>(raw.labels.size()) == raw.features.rows(),
          "feature rows and label rows disagree");
  for (int label : raw.labels) {
    require(label < spec.num_classes, "label exceeds the configured class count");
  }
  raw.training_rows =
      raw.features.rows() - spec.public_pool_size - spec.test_size;
  require(raw.training_rows >= spec.num_agents,
          "file leaves fewer training rows than agents");
  return raw;
}

// One participant's local logistic objective, exposed to the gradient
// baseline as a flat parameter vector of shape C * (d + 1).
class LogisticProblem : public fedavg::AgentProblem {
 public:
  explicit LogisticProblem(const learners::AgentDataset& data)
      : data_(data), dim_(data.num_classes * (data.dim() + 1)) {}

  int dim() const override { return dim_; }

  std::vector<double> gradient(std::span<const double> theta) const override {
    Matrix weights(data_.num_classes, data_.dim() + 1,
                   std::vector<double>(theta.begin(), theta.end()));
    auto [loss, grad] =
        learners::logistic_loss_and_grad(weights, data_.features, data_.labels);
    (void)loss;
    return grad.data();
  }

 private:
  const learners::AgentDataset& data_;
  int dim_;
};

struct VoteRunOutput {
  std::vector<int> pseudo_labels;
  std::vector<accounting::MarginRecord> margins;
};

// agent_votes[a][q] holds agent a's vote on pool query q.
VoteRunOutput run_vote_rounds(
    const std::vector<std::vector<voting::VoteVector>>& agent_votes,
    double sigma, uint64_t run_seed, int queries) {
  const int num_agents = static_cast<int>(agent_votes.size());
  VoteRunOutput output;
  output.pseudo_labels.reserve(queries);
  output.margins.reserve(queries);
  const voting::trust::AccountantHook hook{};
  for (int q = 0; q < queries; ++q) {
    std::vector<voting::VoteVector> noiseless;
    std::vector<voting::VoteVector> noisy;
    noiseless.reserve(num_agents);
    noisy.reserve(num_agents);
    for (int a = 0; a < num_agents; ++a) {
      noiseless.push_back(agent_votes[a][q]);
      rng::GaussianSampler sampler(
          rng::derive_seed(run_seed, rng::kStreamVoteNoise,
                           static_cast<uint64_t>(a), static_cast<uint64_t>(q)));
      noisy.push_back(
          voting::noisy_vote(agent_votes[a][q], sigma, num_agents, sampler));
    }
    const voting::SecureAggregate aggregate =
        voting::trust::mpc_argmax(noisy, noiseless, q);
    output.pseudo_labels.push_back(aggregate.released_label());
    output.margins.push_back(hook.record(aggregate));
  }
  return output;
}

std::vector<std::pair<std::string, std::string>> federation_echo(
    const FederationSpec& spec) {
  std::vector<std::pair<std::string, std::string>> echo;
  echo.emplace_back("agents", std::to_string(spec.num_agents));
  echo.emplace_back("partition", partition_name(spec.partition));
  if (spec.partition == PartitionKind::kLabelSorted) {
    echo.emplace_back("classes_per_agent",
                      std::to_string(resolved_classes_per_agent(spec)));
  }
  if (spec.partition == PartitionKind::kDomainShift) {
    echo.emplace_back("shift_scale", format_double(spec.domain_shift_scale));
  }
  echo.emplace_back("source", source_name(spec.source));
  if (spec.source == DataSource::kFileBacked) {
    echo.emplace_back("features_file", spec.features_path);
    echo.emplace_back("labels_file", spec.labels_path);
  } else {
    echo.emplace_back("dim", std::to_string(spec.input_dim));
    echo.emplace_back("separation", format_double(spec.separation));
    echo.emplace_back("points_per_agent", std::to_string(spec.points_per_agent));
  }
  echo.emplace_back("classes", std::to_string(spec.num_classes));
  echo.emplace_back("pool", std::to_string(spec.public_pool_size));
  echo.emplace_back("test_points", std::to_string(spec.test_size));
  echo.emplace_back("seed", std::to_string(spec.seed));
  return echo;
}

void append_train_echo(std::vector<std::pair<std::string, std::string>>& echo,
                       const std::string& prefix,
                       const learners::TrainConfig& config) {
  echo.emplace_back(prefix, classifier_name(config.kind));
  if (config.kind == learners::ClassifierKind::kMultinomialLogistic) {
    echo.emplace_back(prefix + "_epochs", std::to_string(config.epochs));
    echo.emplace_back(prefix + "_lr", format_double(config.learning_rate));
    echo.emplace_back(prefix + "_batch", std::to_string(config.batch_size));
  }
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  const auto elapsed = std::chrono::steady_clock::now() - start;
  return std::chrono::duration<double, std::milli>(elapsed).count();
}

// Shared tail of both voting schemes: aggregate, distill, account.
RunReport finish_voting_run(const FederationSpec& spec, const VotingParams& params,
                            const FederationData& data,
                            std::vector<std::vector<voting::VoteVector>> agent_votes,
                            accounting::Scheme scheme, int account_k,
                            std::chrono::steady_clock::time_point start) {
  const int queries = params.queries;
  VoteRunOutput votes =
      run_vote_rounds(agent_votes, params.sigma, spec.seed, queries);

  learners::TrainConfig student_config = params.student;
  student_config.seed = rng::derive_seed(spec.seed, rng::kStreamTraining,
                                         static_cast<uint64_t>(spec.num_agents));
  const learners::Classifier student =
      learners::train_student(take_rows(data.pool_features, 0, queries),
                              votes.pseudo_labels, data.num_classes, student_config);

  int correct = 0;
  for (int q = 0; q < queries; ++q) {
    if (votes.pseudo_labels[q] == data.pool_labels[q]) ++correct;
  }

  RunReport report;
  report.scheme = scheme_name(scheme == accounting::Scheme::kAe
                                  ? SchemeKind::kAeDpfl
                                  : SchemeKind::kKnnDpfl);
  report.test_accuracy = evaluate(student, data.test_features, data.test_labels);
  report.pseudo_label_accuracy = static_cast<double>(correct) / queries;
  if (params.sigma > 0.0) {
    accounting::MechanismParams mechanism;
    mechanism.sigma = params.sigma;
    mechanism.sensitivity = 1.0;
    mechanism.queries = queries;
    mechanism.num_agents = spec.num_agents;
    mechanism.k = account_k;
    mechanism.num_classes = data.num_classes;
    mechanism.granularity = params.granularity;
    report.privacy = accounting::accumulate_data_dependent(
        votes.margins, mechanism, scheme, params.delta);
  }
  report.comm_upstream_floats = voting_upstream_floats(data.num_classes, queries);
  report.wall_time_ms = elapsed_ms(start);
  return report;
}

std::vector<std::pair<std::string, std::string>> voting_echo(
    const FederationSpec& spec, const VotingParams& params, bool knn) {
  std::vector<std::pair<std::string, std::string>> echo = federation_echo(spec);
  echo.emplace_back("sigma", format_double(params.sigma));
  echo.emplace_back("queries", std::to_string(params.queries));
  echo.emplace_back("delta", format_double(params.delta));
  echo.emplace_back("granularity",
                    params.granularity == accounting::Granularity::kAgentLevel
                        ? "agent"
                        : "instance");
  if (knn) {
    echo.emplace_back("k", std::to_string(params.k));
    if (params.k == 0) {
      echo.emplace_back("k_fraction", format_double(params.k_fraction));
    }
    echo.emplace_back("feature_map", feature_map_name(params.feature_map));
    if (params.feature_map == learners::FeatureMap::Kind::kRandomProjection) {
      echo.emplace_back("projection_dim", std::to_string(params.projection_dim));
      echo.emplace_back("projection_seed", std::to_string(params.projection_seed));
    }
    if (params.feature_map == learners::FeatureMap::Kind::kPrecomputed) {
      echo.emplace_back("map_file", params.feature_file);
    }
  } else {
    append_train_echo(echo, "teacher", params.teacher);
  }
  append_train_echo(echo, "student", params.student);
  return echo;
}

std::vector<std::pair<std::string, std::string>> fedavg_echo(
    const FederationSpec& spec, const fedavg::FedAvgConfig& config,
    std::optional<double> delta) {
  std::vector<std::pair<std::string, std::string>> echo = federation_echo(spec);
  echo.emplace_back("participation", format_double(config.participation));
  if (delta.has_value()) {
    echo.emplace_back("sigma", format_double(config.sigma));
    echo.emplace_back("clip", format_double(config.clip_threshold));
    echo.emplace_back("delta", format_double(*delta));
  }
  echo.emplace_back("inner_iters", std::to_string(config.inner_iters));
  echo.emplace_back("eta", format_double(config.eta));
  echo.emplace_back("rounds", std::to_string(config.rounds));
  echo.emplace_back("lr_decay", config.lr_decay ? "true" : "false");
  return echo;
}

RunReport run_gradient_scheme(const FederationSpec& spec,
                              const fedavg::FedAvgConfig& config,
                              std::optional<double> delta) {
  const auto start = std::chrono::steady_clock::now();
  spec.validate();
  config.validate();
  const FederationData data = make_federation(spec);

  std::vector<LogisticProblem> problems;
  problems.reserve(data.agents.size());
  for (const learners::AgentDataset& agent : data.agents) {
    problems.emplace_back(agent);
  }
  std::vector<const fedavg::AgentProblem*> pointers;
  for (const LogisticProblem& problem : problems) pointers.push_back(&problem);

  const int model_dim = data.num_classes * (data.input_dim + 1);
  fedavg::FedAvgConfig local = config;
  local.seed = spec.seed;
  std::vector<double> theta(model_dim, 0.0);
  for (int t = 0; t < local.rounds; ++t) {
    theta = fedavg::fedavg_round(theta, pointers, local, t).theta;
  }

  const learners::Classifier model = learners::Classifier::multinomial_logistic(
      Matrix(data.num_classes, data.input_dim + 1, theta));

  RunReport report;
  report.scheme =
      scheme_name(delta.has_value() ? SchemeKind::kDpFedAvg : SchemeKind::kFedAvg);
  report.test_accuracy = evaluate(model, data.test_features, data.test_labels);
  if (delta.has_value()) {
    std::vector<accounting::RdpCurve> rounds;
    rounds.reserve(local.rounds);
    for (int t = 0; t < local.rounds; ++t) {
      rounds.push_back(accounting::gaussian_rdp(1.0, local.sigma));
    }
    report.privacy =
        accounting::make_privacy_report(accounting::compose(rounds), *delta);
  }
  report.comm_upstream_floats =
      gradient_upstream_floats(model_dim, local.rounds, local.participation);
  report.wall_time_ms = elapsed_ms(start);
  report.config_echo = fedavg_echo(spec, config, delta);
  report.config_echo.insert(report.config_echo.begin(),
                            {"scheme", report.scheme});
  return report;
}

}  // namespace

void FederationSpec::validate() const {
  require(num_agents >= 1, "num_agents must be at least 1");
  require(num_classes >= 2, "num_classes must be at least 2");
  require(public_pool_size >= 1, "public_pool_size must be at least 1");
  require(test_size >= 1, "test_size must be at least 1");
  if (source == DataSource::kSyntheticBlobs) {
    require(input_dim >= num_classes,
            "synthetic blobs need input_dim >= num_classes");
    require(separation >= 0.0, "separation must be non-negative");
    require(points_per_agent >= 1, "points_per_agent must be at least 1");
  } else {
    require(!features_path.empty(), "file source needs features_path");
    require(!labels_path.empty(), "file source needs labels_path");
  }
  if (partition == PartitionKind::kLabelSorted) {
    require(classes_per_agent >= 0 && classes_per_agent <= num_classes,
            "classes_per_agent must lie in [0, num_classes]");
  }
  if (partition == PartitionKind::kDomainShift) {
    require(domain_shift_scale >= 0.0, "shift_scale must be non-negative");
  }
}

void VotingParams::validate() const {
  require(sigma >= 0.0, "sigma must be non-negative");
  require(queries >= 1, "queries must be at least 1");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(k >= 0, "k must be non-negative");
  require(k_fraction > 0.0 && k_fraction <= 1.0, "k_fraction must lie in (0, 1]");
  teacher.validate();
  student.validate();
  if (feature_map == learners::FeatureMap::Kind::kRandomProjection) {
    require(projection_dim >= 1, "random projection needs projection_dim >= 1");
  }
  if (feature_map == learners::FeatureMap::Kind::kPrecomputed) {
    require(!feature_file.empty(), "precomputed map needs feature_file");
  }
}

std::vector<learners::AgentDataset> partition(const Matrix& features,
                                              const std::vector<int>& labels,
                                              const FederationSpec& spec) {
  const int n = features.rows();
  require(static_cast<int>(labels.size()) == n,
          "feature rows and label rows disagree");
  require(n >= spec.num_agents, "fewer training rows than agents");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<int>> assignment(spec.num_agents);

  if (spec.partition == PartitionKind::kLabelSorted) {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return labels[a] < labels[b]; });
    const int shards_per_agent = resolved_classes_per_agent(spec);
    const int shards = spec.num_agents * shards_per_agent;
    require(n >= shards, "label-sorted sharding needs at least one row per shard");
    for (int s = 0; s < shards; ++s) {
      const int begin = static_cast<int>(static_cast<int64_t>(s) * n / shards);
      const int end = static_cast<int>(static_cast<int64_t>(s + 1) * n / shards);
      std::vector<int>& rows = assignment[s % spec.num_agents];
      rows.insert(rows.end(), order.begin() + begin, order.begin() + end);
    }
  } else {
    std::mt19937_64 engine(rng::derive_seed(spec.seed, rng::kStreamData, 1));
    std::shuffle(order.begin(), order.end(), engine);
    int cursor = 0;
    for (int a = 0; a < spec.num_agents; ++a) {
      const int count = n / spec.num_agents + (a < n % spec.num_agents ? 1 : 0);
      assignment[a].assign(order.begin() + cursor, order.begin() + cursor + count);
      cursor += count;
    }
  }

  std::vector<learners::AgentDataset> agents(spec.num_agents);
  for (int a = 0; a < spec.num_agents; ++a) {
    learners::AgentDataset& agent = agents[a];
    const std::vector<int>& rows = assignment[a];
    agent.features = Matrix(static_cast<int>(rows.size()), features.cols());
    agent.labels.reserve(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      const std::span<const double> row = features.row(rows[i]);
      std::copy(row.begin(), row.end(), agent.features.row(static_cast<int>(i)).begin());
      agent.labels.push_back(labels[rows[i]]);
    }
    agent.num_classes = spec.num_classes;
    if (spec.partition == PartitionKind::kDomainShift) {
      rng::GaussianSampler sampler(rng::derive_seed(
          spec.seed, rng::kStreamData, 2, static_cast<uint64_t>(a)));
      std::vector<double> direction(features.cols());
      for (double& value : direction) value = sampler.next();
      const double norm = l2_norm(direction);
      for (double& value : direction) {
        value *= spec.domain_shift_scale / (norm > 0.0 ? norm : 1.0);
      }
      for (int i = 0; i < agent.features.rows(); ++i) {
        const std::span<double> row = agent.features.row(i);
        for (int j = 0; j < features.cols(); ++j) row[j] += direction[j];
      }
      agent.domain_tag = "shift-" + std::to_string(a);
    }
    agent.validate();
  }
  return agents;
}

FederationData make_federation(const FederationSpec& spec) {
  spec.validate();
  const RawFederation raw = spec.source == DataSource::kSyntheticBlobs
                                ? generate_synthetic(spec)
                                : load_file_backed(spec);
  FederationData data;
  data.num_classes = spec.num_classes;
  data.input_dim = raw.features.cols();
  data.agents = partition(take_rows(raw.features, 0, raw.training_rows),
                          take_labels(raw.labels, 0, raw.training_rows), spec);
  data.pool_features =
      take_rows(raw.features, raw.training_rows, spec.public_pool_size);
  data.pool_labels =
      take_labels(raw.labels, raw.training_rows, spec.public_pool_size);
  data.test_features = take_rows(
      raw.features, raw.training_rows + spec.public_pool_size, spec.test_size);
  data.test_labels = take_labels(
      raw.labels, raw.training_rows + spec.public_pool_size, spec.test_size);
  return data;
}

std::string scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kAeDpfl: return "ae";
    case SchemeKind::kKnnDpfl: return "knn";
    case SchemeKind::kFedAvg: return "fedavg";
    case SchemeKind::kDpFedAvg: return "dp_fedavg";
  }
  return "unknown";
}

double voting_upstream_floats(int num_classes, int queries) {
  require(num_classes >= 2, "num_classes must be at least 2");
  require(queries >= 1, "queries must be at least 1");
  return static_cast<double>(num_classes) * queries;
}

double gradient_upstream_floats(int model_dim, int rounds, double participation) {
  require(model_dim >= 1, "model_dim must be at least 1");
  require(rounds >= 1, "rounds must be at least 1");
  require(participation > 0.0 && participation <= 1.0,
          "participation must lie in (0, 1]");
  return participation * model_dim * rounds;
}

std::vector<learners::Classifier> train_teachers(
    const FederationData& data, const learners::TrainConfig& config,
    uint64_t run_seed) {
  std::vector<learners::Classifier> teachers;
  teachers.reserve(data.agents.size());
  for (size_t a = 0; a < data.agents.size(); ++a) {
    learners::TrainConfig agent_config = config;
    agent_config.seed =
        rng::derive_seed(run_seed, rng::kStreamTraining, static_cast<uint64_t>(a));
    teachers.push_back(learners::train_classifier(data.agents[a], agent_config));
  }
  return teachers;
}

double evaluate(const learners::Classifier& model, const Matrix& features,
                const std::vector<int>& labels) {
  require(static_cast<int>(labels.size()) == features.rows(),
          "feature rows and label rows disagree");
  require(features.rows() >= 1, "nothing to evaluate");
  int correct = 0;
  for (int i = 0; i < features.rows(); ++i) {
    if (model.predict_label(features.row(i)) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / features.rows();
}

RunReport run_ae_dpfl(const FederationSpec& spec, const VotingParams& params) {
  const auto start = std::chrono::steady_clock::now();
  spec.validate();
  params.validate();
  require(params.queries <= spec.public_pool_size,
          "queries must not exceed the public pool");
  const FederationData data = make_federation(spec);
  const std::vector<learners::Classifier> teachers =
      train_teachers(data, params.teacher, spec.seed);

  std::vector<std::vector<voting::VoteVector>> agent_votes(spec.num_agents);
  parallel_for(spec.num_agents, [&](int a) {
    std::vector<voting::VoteVector>& votes = agent_votes[a];
    votes.reserve(params.queries);
    for (int q = 0; q < params.queries; ++q) {
      votes.push_back(teachers[a].predict(data.pool_features.row(q)));
    }
  });

  RunReport report = finish_voting_run(spec, params, data, std::move(agent_votes),
                                       accounting::Scheme::kAe, 1, start);
  report.config_echo = voting_echo(spec, params, false);
  report.config_echo.insert(report.config_echo.begin(), {"scheme", report.scheme});
  return report;
}

RunReport run_knn_dpfl(const FederationSpec& spec, const VotingParams& params) {
  const auto start = std::chrono::steady_clock::now();
  spec.validate();
  params.validate();
  require(params.queries <= spec.public_pool_size,
          "queries must not exceed the public pool");
  const FederationData data = make_federation(spec);

  const learners::FeatureMap phi = [&] {
    switch (params.feature_map) {
      case learners::FeatureMap::Kind::kRandomProjection:
        return learners::FeatureMap::random_projection(
            data.input_dim, params.projection_dim, params.projection_seed);
      case learners::FeatureMap::Kind::kPrecomputed:
        return learners::FeatureMap::precomputed(params.feature_file);
      case learners::FeatureMap::Kind::kIdentity:
      default:
        return learners::FeatureMap::identity(data.input_dim);
    }
  }();

  std::vector<int> agent_k(spec.num_agents);
  int account_k = 0;
  for (int a = 0; a < spec.num_agents; ++a) {
    const int n = data.agents[a].size();
    if (params.k > 0) {
      require(params.k <= n, "k exceeds an agent's dataset size");
      agent_k[a] = params.k;
    } else {
      agent_k[a] = learners::default_k(n, params.k_fraction);
    }
    account_k = account_k == 0 ? agent_k[a] : std::min(account_k, agent_k[a]);
  }

  std::vector<std::vector<voting::VoteVector>> agent_votes(spec.num_agents);
  parallel_for(spec.num_agents, [&](int a) {
    const learners::KnnIndex index(data.agents[a], phi);
    std::vector<voting::VoteVector>& votes = agent_votes[a];
    votes.reserve(params.queries);
    for (int q = 0; q < params.queries; ++q) {
      votes.push_back(index.predict(data.pool_features.row(q), agent_k[a]));
    }
  });

  RunReport report = finish_voting_run(spec, params, data, std::move(agent_votes),
                                       accounting::Scheme::kKnn, account_k, start);
  report.config_echo = voting_echo(spec, params, true);
  report.config_echo.insert(report.config_echo.begin(), {"scheme", report.scheme});
  return report;
}

RunReport run_fedavg(const FederationSpec& spec,
                     const fedavg::FedAvgConfig& config) {
  fedavg::FedAvgConfig plain = config;
  plain.sigma = 0.0;
  plain.clip_threshold = std::numeric_limits<double>::infinity();
  return run_gradient_scheme(spec, plain, std::nullopt);
}

RunReport run_dp_fedavg(const FederationSpec& spec,
                        const fedavg::FedAvgConfig& config, double delta) {
  require(config.sigma > 0.0, "dp_fedavg needs sigma > 0");
  require(std::isfinite(config.clip_threshold),
          "dp_fedavg needs a finite clip_threshold");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  return run_gradient_scheme(spec, config, delta);
}

}  // namespace veilvote::harness

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

#include "veilvote/sensitivity_probe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "veilvote/common.hpp"
#include "veilvote/learners.hpp"
#include "veilvote/rng.hpp"
#include "veilvote/votes.hpp"

namespace veilvote::probe {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

learners::AgentDataset make_agent(int rows, int num_classes) {
  learners::AgentDataset agent;
  agent.features = Matrix(rows, 2);
  agent.labels.assign(rows, 0);
  agent.num_classes = num_classes;
  return agent;
}

// Background agents: 2-d blobs around class means on a circle.
std::vector<learners::AgentDataset> random_agents(const ProbeConfig& config) {
  std::vector<learners::AgentDataset> agents;
  for (int a = 0; a < config.num_agents; ++a) {
    rng::GaussianSampler sampler(rng::derive_seed(
        config.seed, rng::kStreamData, static_cast<uint64_t>(a)));
    learners::AgentDataset agent =
        make_agent(config.points_per_agent, config.num_classes);
    for (int i = 0; i < config.points_per_agent; ++i) {
      const int label = i % config.num_classes;
      const double angle =
          2.0 * std::numbers::pi * label / config.num_classes;
      agent.labels[i] = label;
      agent.features.at(i, 0) = 2.5 * std::cos(angle) + sampler.next();
      agent.features.at(i, 1) = 2.5 * std::sin(angle) + sampler.next();
    }
    agents.push_back(std::move(agent));
  }
  return agents;
}

// Two points of different labels with a nearby decision boundary: removing
// or relabeling either one flips the centroid vote at (0.9, 0).
learners::AgentDataset crafted_flip_agent(int num_classes) {
  learners::AgentDataset agent = make_agent(2, num_classes);
  agent.features.at(0, 0) = 0.0;
  agent.features.at(0, 1) = 0.0;
  agent.labels[0] = 0;
  agent.features.at(1, 0) = 2.0;
  agent.features.at(1, 1) = 0.0;
  agent.labels[1] = 1;
  return agent;
}

// k unanimous near neighbours plus one far point of another label: removing
// any near point swaps the far one into the neighbour set of a query at the
// origin, moving the frequency vote by exactly sqrt(2) / k.
learners::AgentDataset crafted_knn_agent(int k, int num_classes) {
  learners::AgentDataset agent = make_agent(k + 1, num_classes);
  for (int i = 0; i < k; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / k;
    agent.features.at(i, 0) = std::cos(angle);
    agent.features.at(i, 1) = std::sin(angle);
    agent.labels[i] = 0;
  }
  agent.features.at(k, 0) = 2.0;
  agent.features.at(k, 1) = 0.0;
  agent.labels[k] = 1;
  return agent;
}

std::vector<std::vector<double>> probe_queries(
    const std::vector<learners::AgentDataset>& agents, int grid) {
  double lo = -1.0;
  double hi = 1.0;
  for (const learners::AgentDataset& agent : agents) {
    for (double value : agent.features.data()) {
      lo = std::min(lo, value);
      hi = std::max(hi, value);
    }
  }
  std::vector<std::vector<double>> queries;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double x = lo + (hi - lo) * i / (grid - 1);
      const double y = lo + (hi - lo) * j / (grid - 1);
      queries.push_back({x, y});
    }
  }
  // The crafted flip points must be probed regardless of the grid layout.
  queries.push_back({0.9, 0.0});
  queries.push_back({0.0, 0.0});
  return queries;
}

std::vector<double> agent_vote(const learners::AgentDataset& agent,
                               std::span<const double> query,
                               const ProbeConfig& config) {
  if (config.scheme == accounting::Scheme::kAe) {
    learners::TrainConfig train;
    train.kind = learners::ClassifierKind::kNearestCentroid;
    const learners::Classifier teacher = learners::train_classifier(agent, train);
    return teacher.predict(query).values;
  }
  const learners::FeatureMap phi = learners::FeatureMap::identity(2);
  return learners::knn_predict(agent, phi, query, config.k).values;
}

std::vector<double> summed_votes(const std::vector<learners::AgentDataset>& agents,
                                 std::span<const double> query,
                                 const ProbeConfig& config) {
  std::vector<double> sum(config.num_classes, 0.0);
  for (const learners::AgentDataset& agent : agents) {
    const std::vector<double> vote = agent_vote(agent, query, config);
    for (int c = 0; c < config.num_classes; ++c) sum[c] += vote[c];
  }
  return sum;
}

double worst_query_gap(const std::vector<learners::AgentDataset>& base,
                       const std::vector<learners::AgentDataset>& neighbor,
                       const std::vector<std::vector<double>>& queries,
                       const ProbeConfig& config) {
  double worst = 0.0;
  for (const std::vector<double>& query : queries) {
    const std::vector<double> a = summed_votes(base, query, config);
    const std::vector<double> b = summed_votes(neighbor, query, config);
    std::vector<double> diff(a.size());
    for (size_t c = 0; c < a.size(); ++c) diff[c] = a[c] - b[c];
    worst = std::max(worst, l2_norm(diff));
  }
  return worst;
}

learners::AgentDataset without_row(const learners::AgentDataset& agent, int row) {
  learners::AgentDataset out = make_agent(agent.size() - 1, agent.num_classes);
  int cursor = 0;
  for (int i = 0; i < agent.size(); ++i) {
    if (i == row) continue;
    out.features.at(cursor, 0) = agent.features.at(i, 0);
    out.features.at(cursor, 1) = agent.features.at(i, 1);
    out.labels[cursor] = agent.labels[i];
    ++cursor;
  }
  return out;
}

}  // namespace

void ProbeConfig::validate() const {
  require(num_classes >= 2, "num_classes must be at least 2");
  require(num_agents >= 1, "num_agents must be at least 1");
  require(points_per_agent >= 2, "points_per_agent must be at least 2");
  require(query_grid >= 2, "query_grid must be at least 2");
  if (scheme == accounting::Scheme::kKnn) {
    require(k >= 1, "k must be at least 1");
    require(points_per_agent >= k + 1,
            "instance removal needs points_per_agent >= k + 1");
  }
}

ProbeResult l2_sensitivity_probe(const ProbeConfig& config) {
  config.validate();

  std::vector<learners::AgentDataset> agents = random_agents(config);
  if (config.scheme == accounting::Scheme::kAe) {
    agents.push_back(crafted_flip_agent(config.num_classes));
  } else {
    agents.push_back(crafted_knn_agent(config.k, config.num_classes));
  }
  const std::vector<std::vector<double>> queries =
      probe_queries(agents, config.query_grid);

  ProbeResult result;
  if (config.granularity == accounting::Granularity::kAgentLevel) {
    result.assumed_bound = 1.0;
    for (size_t a = 0; a < agents.size(); ++a) {
      std::vector<learners::AgentDataset> neighbor;
      for (size_t other = 0; other < agents.size(); ++other) {
        if (other != a) neighbor.push_back(agents[other]);
      }
      result.max_l2 = std::max(
          result.max_l2, worst_query_gap(agents, neighbor, queries, config));
    }
  } else {
    result.assumed_bound = config.scheme == accounting::Scheme::kAe
                               ? std::sqrt(2.0)
                               : std::sqrt(2.0) / config.k;
    for (size_t a = 0; a < agents.size(); ++a) {
      const int min_rows = config.scheme == accounting::Scheme::kKnn
                               ? config.k + 1
                               : 2;
      for (int i = 0; i < agents[a].size(); ++i) {
        std::vector<learners::AgentDataset> neighbor = agents;
        if (agents[a].size() >= min_rows) {
          neighbor[a] = without_row(agents[a], i);
          result.max_l2 = std::max(
              result.max_l2, worst_query_gap(agents, neighbor, queries, config));
        }
        for (int c = 0; c < config.num_classes; ++c) {
          if (c == agents[a].labels[i]) continue;
          neighbor = agents;
          neighbor[a].labels[i] = c;
          result.max_l2 = std::max(
              result.max_l2, worst_query_gap(agents, neighbor, queries, config));
        }
      }
    }
  }
  result.attains_bound = std::abs(result.max_l2 - result.assumed_bound) <= 1e-9;
  return result;
}

}  // namespace veilvote::probe

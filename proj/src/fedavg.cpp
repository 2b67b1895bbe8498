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

#include "veilvote/fedavg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "veilvote/common.hpp"

namespace veilvote::fedavg {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

double effective_eta(const FedAvgConfig& config, int round_index) {
  if (!config.lr_decay) return config.eta;
  return config.eta * static_cast<double>(config.rounds - round_index) /
         config.rounds;
}

std::vector<double> mean_gradient(const PiecewiseLinearObjective& objective,
                                  std::span<const double> theta) {
  std::vector<double> mean = pairwise_vector_sum(
      static_cast<int>(objective.agents.size()),
      [&](int i) { return objective.agents[i].gradient(theta); });
  for (double& value : mean) value /= static_cast<double>(objective.agents.size());
  return mean;
}

EquivalenceResult compare_round_to_step(const PiecewiseLinearObjective& objective,
                                        std::span<const double> theta, double eta,
                                        int inner_iters) {
  std::vector<const AgentProblem*> pointers;
  std::vector<PiecewiseAgentProblem> problems;
  problems.reserve(objective.agents.size());
  for (const PiecewiseLinearFunction& function : objective.agents) {
    problems.emplace_back(function);
  }
  for (const PiecewiseAgentProblem& problem : problems) {
    pointers.push_back(&problem);
  }
  FedAvgConfig config;
  config.eta = eta;
  config.inner_iters = inner_iters;
  config.seed = 0;
  config.validate();

  const std::vector<double> start(theta.begin(), theta.end());
  const RoundResult round = fedavg_round(start, pointers, config, 0);

  EquivalenceResult result;
  result.fedavg_update.resize(theta.size());
  for (size_t j = 0; j < theta.size(); ++j) {
    result.fedavg_update[j] = round.theta[j] - start[j];
  }
  const std::vector<double> grad = mean_gradient(objective, theta);
  result.subgradient_step.resize(theta.size());
  std::vector<double> diff(theta.size());
  for (size_t j = 0; j < theta.size(); ++j) {
    result.subgradient_step[j] = -eta * inner_iters * grad[j];
    diff[j] = result.fedavg_update[j] - result.subgradient_step[j];
  }
  result.max_deviation = l2_norm(diff);
  return result;
}

}  // namespace

void FedAvgConfig::validate() const {
  require(participation > 0.0 && participation <= 1.0,
          "participation must lie in (0, 1]");
  require(sigma >= 0.0, "sigma must be non-negative");
  require(clip_threshold > 0.0, "clip_threshold must be positive");
  require(inner_iters >= 1, "inner_iters must be at least 1");
  require(eta > 0.0, "eta must be positive");
  require(rounds >= 1, "rounds must be at least 1");
}

ModelUpdate clip_update(std::vector<double> delta, double clip_threshold) {
  require(clip_threshold > 0.0, "clip_threshold must be positive");
  ModelUpdate update;
  update.pre_clip_norm = l2_norm(delta);
  const double scale = std::max(1.0, update.pre_clip_norm / clip_threshold);
  update.clipped = scale > 1.0;
  if (update.clipped) {
    for (double& value : delta) value /= scale;
  }
  update.delta = std::move(delta);
  return update;
}

std::vector<double> local_delta(const AgentProblem& agent,
                                std::span<const double> theta, double eta,
                                int inner_iters) {
  require(static_cast<int>(theta.size()) == agent.dim(), "theta dimension mismatch");
  require(eta > 0.0, "eta must be positive");
  require(inner_iters >= 1, "inner_iters must be at least 1");
  std::vector<double> local(theta.begin(), theta.end());
  for (int step = 0; step < inner_iters; ++step) {
    const std::vector<double> grad = agent.gradient(local);
    for (size_t j = 0; j < local.size(); ++j) local[j] -= eta * grad[j];
  }
  for (size_t j = 0; j < local.size(); ++j) local[j] -= theta[j];
  return local;
}

std::vector<double> noisy_update(const AgentProblem& agent,
                                 std::span<const double> theta,
                                 const FedAvgConfig& config, int sampled_count,
                                 rng::GaussianSampler& noise) {
  config.validate();
  require(sampled_count >= 1, "sampled_count must be at least 1");
  ModelUpdate update =
      clip_update(local_delta(agent, theta, config.eta, config.inner_iters),
                  config.clip_threshold);
  if (config.sigma > 0.0) {
    require(std::isfinite(config.clip_threshold),
            "noise requires a finite clip_threshold");
    const double stddev =
        config.sigma * config.clip_threshold / std::sqrt(sampled_count);
    for (double& value : update.delta) value += stddev * noise.next();
  }
  return std::move(update.delta);
}

RoundResult fedavg_round(std::span<const double> theta,
                         const std::vector<const AgentProblem*>& agents,
                         const FedAvgConfig& config, int round_index) {
  config.validate();
  require(!agents.empty(), "need at least one agent");
  require(round_index >= 0 && round_index < config.rounds,
          "round_index out of range");
  for (const AgentProblem* agent : agents) {
    require(agent != nullptr, "null agent");
    require(agent->dim() == static_cast<int>(theta.size()),
            "agent dimension mismatch");
  }

  std::vector<int> selected;
  if (config.participation >= 1.0) {
    selected.resize(agents.size());
    for (size_t i = 0; i < agents.size(); ++i) selected[i] = static_cast<int>(i);
  } else {
    for (uint64_t attempt = 0; selected.empty(); ++attempt) {
      rng::GaussianSampler coin(rng::derive_seed(
          config.seed, rng::kStreamSampling, static_cast<uint64_t>(round_index),
          attempt));
      for (size_t i = 0; i < agents.size(); ++i) {
        if (coin.uniform01() < config.participation) {
          selected.push_back(static_cast<int>(i));
        }
      }
    }
  }
  const int sampled_count = static_cast<int>(selected.size());

  FedAvgConfig effective = config;
  effective.eta = effective_eta(config, round_index);
  const std::vector<double> sum =
      pairwise_vector_sum(sampled_count, [&](int slot) {
        const int agent_id = selected[slot];
        rng::GaussianSampler noise(rng::derive_seed(
            config.seed, rng::kStreamUpdateNoise,
            static_cast<uint64_t>(round_index), static_cast<uint64_t>(agent_id)));
        return noisy_update(*agents[agent_id], theta, effective, sampled_count,
                            noise);
      });

  RoundResult result;
  result.sampled_count = sampled_count;
  result.theta.assign(theta.begin(), theta.end());
  for (size_t j = 0; j < result.theta.size(); ++j) {
    result.theta[j] += sum[j] / sampled_count;
  }
  return result;
}

PiecewiseLinearFunction::PiecewiseLinearFunction(std::vector<LinearPiece> pieces,
                                                 double temperature)
    : pieces_(std::move(pieces)), temperature_(temperature) {
  require(!pieces_.empty(), "need at least one piece");
  require(temperature_ >= 0.0, "temperature must be non-negative");
  const size_t dim = pieces_[0].coeffs.size();
  require(dim >= 1, "pieces need at least one coefficient");
  for (const LinearPiece& piece : pieces_) {
    require(piece.coeffs.size() == dim, "piece dimension mismatch");
    require(std::isfinite(piece.offset), "piece offset must be finite");
    for (double value : piece.coeffs) {
      require(std::isfinite(value), "piece coefficients must be finite");
    }
  }
}

double PiecewiseLinearFunction::value(std::span<const double> theta) const {
  require(static_cast<int>(theta.size()) == dim(), "theta dimension mismatch");
  std::vector<double> values(pieces_.size());
  for (size_t j = 0; j < pieces_.size(); ++j) {
    double v = pieces_[j].offset;
    for (int i = 0; i < dim(); ++i) v += pieces_[j].coeffs[i] * theta[i];
    values[j] = v;
  }
  const double top = *std::max_element(values.begin(), values.end());
  if (temperature_ == 0.0) return top;
  double sum = 0.0;
  for (double v : values) sum += std::exp((v - top) / temperature_);
  return top + temperature_ * std::log(sum);
}

std::vector<double> PiecewiseLinearFunction::gradient(
    std::span<const double> theta) const {
  require(static_cast<int>(theta.size()) == dim(), "theta dimension mismatch");
  std::vector<double> values(pieces_.size());
  for (size_t j = 0; j < pieces_.size(); ++j) {
    double v = pieces_[j].offset;
    for (int i = 0; i < dim(); ++i) v += pieces_[j].coeffs[i] * theta[i];
    values[j] = v;
  }
  if (temperature_ == 0.0) {
    const int active = argmax_lowest(values);
    return pieces_[active].coeffs;
  }
  const double top = *std::max_element(values.begin(), values.end());
  double normalizer = 0.0;
  for (double& v : values) {
    v = std::exp((v - top) / temperature_);
    normalizer += v;
  }
  std::vector<double> grad(dim(), 0.0);
  for (size_t j = 0; j < pieces_.size(); ++j) {
    const double weight = values[j] / normalizer;
    for (int i = 0; i < dim(); ++i) grad[i] += weight * pieces_[j].coeffs[i];
  }
  return grad;
}

double PiecewiseLinearFunction::interior_margin(
    std::span<const double> theta) const {
  require(temperature_ == 0.0, "interior_margin is defined for temperature 0");
  require(static_cast<int>(theta.size()) == dim(), "theta dimension mismatch");
  std::vector<double> values(pieces_.size());
  for (size_t j = 0; j < pieces_.size(); ++j) {
    double v = pieces_[j].offset;
    for (int i = 0; i < dim(); ++i) v += pieces_[j].coeffs[i] * theta[i];
    values[j] = v;
  }
  const size_t active = static_cast<size_t>(argmax_lowest(values));
  double margin = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < pieces_.size(); ++j) {
    if (j == active) continue;
    std::vector<double> diff(dim());
    for (int i = 0; i < dim(); ++i) {
      diff[i] = pieces_[active].coeffs[i] - pieces_[j].coeffs[i];
    }
    const double norm = l2_norm(diff);
    if (norm == 0.0) continue;  // parallel piece, never overtakes
    margin = std::min(margin, (values[active] - values[j]) / norm);
  }
  return margin;
}

double PiecewiseLinearFunction::max_piece_norm() const {
  double max_norm = 0.0;
  for (const LinearPiece& piece : pieces_) {
    max_norm = std::max(max_norm, l2_norm(piece.coeffs));
  }
  return max_norm;
}

PiecewiseLinearObjective make_objective(
    std::vector<PiecewiseLinearFunction> agents) {
  require(!agents.empty(), "need at least one agent objective");
  const int dim = agents[0].dim();
  PiecewiseLinearObjective objective;
  for (const PiecewiseLinearFunction& agent : agents) {
    require(agent.dim() == dim, "agent objective dimension mismatch");
    objective.lipschitz = std::max(objective.lipschitz, agent.max_piece_norm());
  }
  objective.agents = std::move(agents);
  return objective;
}

EquivalenceResult piecewise_equivalence_check(
    const PiecewiseLinearObjective& objective, std::span<const double> theta,
    double eta, int inner_iters, double margin) {
  require(margin > 0.0, "margin must be positive");
  for (const PiecewiseLinearFunction& agent : objective.agents) {
    require(agent.temperature() == 0.0,
            "exact equivalence requires unsmoothed objectives");
    require(agent.interior_margin(theta) >= margin,
            "theta is not margin-deep inside every active piece");
  }
  require(inner_iters * eta * objective.lipschitz < margin,
          "local step budget exceeds the interior margin");
  return compare_round_to_step(objective, theta, eta, inner_iters);
}

EquivalenceResult lipschitz_equivalence_gap(
    const PiecewiseLinearObjective& objective, std::span<const double> theta,
    double eta, int inner_iters) {
  require(eta > 0.0, "eta must be positive");
  require(inner_iters >= 1, "inner_iters must be at least 1");
  require(!objective.agents.empty(), "need at least one agent objective");
  return compare_round_to_step(objective, theta, eta, inner_iters);
}

}  // namespace veilvote::fedavg

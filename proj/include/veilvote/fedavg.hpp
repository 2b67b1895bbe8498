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
#include <limits>
#include <span>
#include <vector>

#include "veilvote/rng.hpp"

namespace veilvote::fedavg {

// Local objective held by one agent. The server only ever sees model deltas.
class AgentProblem {
 public:
  virtual ~AgentProblem() = default;
  virtual int dim() const = 0;
  virtual std::vector<double> gradient(std::span<const double> theta) const = 0;
};

struct ModelUpdate {
  std::vector<double> delta;
  bool clipped = false;
  double pre_clip_norm = 0.0;
};

struct FedAvgConfig {
  double participation = 1.0;  // Bernoulli sampling rate q
  double sigma = 0.0;          // noise multiplier; 0 disables the mechanism
  double clip_threshold = std::numeric_limits<double>::infinity();
  int inner_iters = 1;  // local gradient steps per round
  double eta = 0.1;
  int rounds = 1;
  bool lr_decay = false;
  uint64_t seed = 0;
  void validate() const;
};

// delta / max(1, ||delta|| / S).
ModelUpdate clip_update(std::vector<double> delta, double clip_threshold);

// Runs inner_iters full-batch gradient steps from theta, returns the offset.
std::vector<double> local_delta(const AgentProblem& agent,
                                std::span<const double> theta, double eta,
                                int inner_iters);

// One agent's clipped contribution plus its share of the round noise. Each of
// the sampled_count contributors adds N(0, (sigma * S)^2 / m_t) per
// coordinate, so the summed noise matches a single N(0, (sigma * S)^2) draw.
std::vector<double> noisy_update(const AgentProblem& agent,
                                 std::span<const double> theta,
                                 const FedAvgConfig& config, int sampled_count,
                                 rng::GaussianSampler& noise);

struct RoundResult {
  std::vector<double> theta;
  int sampled_count = 0;
};

// One synchronous round: Bernoulli-sample agents (resampling until the cohort
// is non-empty), average their noisy clipped deltas, apply to theta. Plain
// FedAvg is the special case sigma = 0, clip_threshold = infinity, q = 1.
RoundResult fedavg_round(std::span<const double> theta,
                         const std::vector<const AgentProblem*>& agents,
                         const FedAvgConfig& config, int round_index);

// ---- Piecewise-linear testbed ----------------------------------------------
//
// Convex max-of-affine objectives with a known subgradient make the
// round-equals-subgradient-step equivalence mechanically checkable.

struct LinearPiece {
  std::vector<double> coeffs;
  double offset = 0.0;
};

// F(theta) = max_j (a_j . theta + b_j), or its log-sum-exp smoothing when
// temperature > 0. Value ties at temperature 0 resolve to the lowest piece.
class PiecewiseLinearFunction {
 public:
  explicit PiecewiseLinearFunction(std::vector<LinearPiece> pieces,
                                   double temperature = 0.0);

  int dim() const { return static_cast<int>(pieces_[0].coeffs.size()); }
  double temperature() const { return temperature_; }
  int num_pieces() const { return static_cast<int>(pieces_.size()); }

  double value(std::span<const double> theta) const;
  std::vector<double> gradient(std::span<const double> theta) const;

  // L2 distance from theta to the nearest piece boundary; +infinity when a
  // single piece is active everywhere. Defined for temperature 0 only.
  double interior_margin(std::span<const double> theta) const;

  double max_piece_norm() const;

 private:
  std::vector<LinearPiece> pieces_;
  double temperature_ = 0.0;
};

class PiecewiseAgentProblem : public AgentProblem {
 public:
  explicit PiecewiseAgentProblem(PiecewiseLinearFunction function)
      : function_(std::move(function)) {}

  int dim() const override { return function_.dim(); }
  std::vector<double> gradient(std::span<const double> theta) const override {
    return function_.gradient(theta);
  }
  const PiecewiseLinearFunction& function() const { return function_; }

 private:
  PiecewiseLinearFunction function_;
};

struct PiecewiseLinearObjective {
  std::vector<PiecewiseLinearFunction> agents;
  double lipschitz = 0.0;  // max piece coefficient norm across agents
};

PiecewiseLinearObjective make_objective(std::vector<PiecewiseLinearFunction> agents);

struct EquivalenceResult {
  std::vector<double> fedavg_update;     // mean local delta, sigma=0, S=inf, q=1
  std::vector<double> subgradient_step;  // -inner_iters * eta * grad mean objective
  double max_deviation = 0.0;            // L2 gap between the two
};

// Exact-equivalence regime: every agent objective is unsmoothed, theta sits
// at least `margin` inside its active piece for every agent, and the local
// trajectory budget inner_iters * eta * lipschitz stays below that margin.
// Violated preconditions throw std::invalid_argument.
EquivalenceResult piecewise_equivalence_check(
    const PiecewiseLinearObjective& objective, std::span<const double> theta,
    double eta, int inner_iters, double margin);

// Same comparison with no preconditions. The gap is bounded by
// inner_iters * eta * lipschitz for any L-Lipschitz agent objectives.
EquivalenceResult lipschitz_equivalence_gap(
    const PiecewiseLinearObjective& objective, std::span<const double> theta,
    double eta, int inner_iters);

}  // namespace veilvote::fedavg

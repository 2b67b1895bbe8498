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

#include <vector>

#include "veilvote/accounting.hpp"
#include "veilvote/rng.hpp"

namespace veilvote::voting {

enum class VoteKind { kOneHot, kFrequency, kNoisy };

// One agent's class scores for one query. OneHot and Frequency votes lie on
// the simplex; Noisy votes carry Gaussian perturbations.
struct VoteVector {
  std::vector<double> values;
  VoteKind kind = VoteKind::kOneHot;
};

// Standard basis vector for `label` out of num_classes.
VoteVector one_hot(int label, int num_classes);

// Class frequencies of the neighbor labels; each coordinate is a multiple
// of 1/k for k = neighbor_labels.size().
VoteVector knn_frequency(const std::vector<int>& neighbor_labels, int num_classes);

// Adds N(0, sigma^2 / N) to every coordinate: one agent's share of a total
// noise budget of sigma^2 on the summed vote. sigma == 0 passes the vote
// through unchanged (degenerate, but needed for zero-noise checks).
VoteVector noisy_vote(const VoteVector& vote, double sigma, int num_agents,
                      rng::GaussianSampler& sampler);

class SecureAggregate;

// Simulated secure-computation boundary. Everything that can see per-agent
// scores, the noisy sum, or noiseless margins lives in this namespace; the
// rest of the program only ever receives the winning label.
namespace trust {

// Sums the noisy votes (ascending agent order, pairwise summation) and
// releases the argmax, ties to the lowest class index. The noiseless votes
// stay inside: only their top-1 minus top-2 mean margin is retained, and
// only the accountant hook can read it.
SecureAggregate mpc_argmax(const std::vector<VoteVector>& noisy_votes,
                           const std::vector<VoteVector>& noiseless_votes,
                           int query_id);

// The accountant's sole channel to noiseless margins.
class AccountantHook {
 public:
  accounting::MarginRecord record(const SecureAggregate& aggregate) const;
};

}  // namespace trust

// What the server side sees: the winning label and the query it answers.
class SecureAggregate {
 public:
  int released_label() const { return released_label_; }
  int query_id() const { return query_id_; }

 private:
  friend SecureAggregate trust::mpc_argmax(const std::vector<VoteVector>&,
                                           const std::vector<VoteVector>&,
                                           int);
  friend class trust::AccountantHook;

  SecureAggregate() = default;

  int released_label_ = 0;
  int query_id_ = 0;
  double noiseless_margin_ = 0.0;
};

}  // namespace veilvote::voting

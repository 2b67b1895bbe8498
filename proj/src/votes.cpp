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

#include "veilvote/votes.hpp"

#include <cmath>
#include <stdexcept>

#include "veilvote/common.hpp"

namespace veilvote::voting {

VoteVector one_hot(int label, int num_classes) {
  if (num_classes < 2) throw std::invalid_argument("one_hot: need at least 2 classes");
  if (label < 0 || label >= num_classes) {
    throw std::invalid_argument("one_hot: label out of range");
  }
  VoteVector vote;
  vote.values.assign(num_classes, 0.0);
  vote.values[label] = 1.0;
  vote.kind = VoteKind::kOneHot;
  return vote;
}

VoteVector knn_frequency(const std::vector<int>& neighbor_labels, int num_classes) {
  if (num_classes < 2) {
    throw std::invalid_argument("knn_frequency: need at least 2 classes");
  }
  if (neighbor_labels.empty()) {
    throw std::invalid_argument("knn_frequency: need at least one neighbor");
  }
  VoteVector vote;
  vote.values.assign(num_classes, 0.0);
  for (int label : neighbor_labels) {
    if (label < 0 || label >= num_classes) {
      throw std::invalid_argument("knn_frequency: label out of range");
    }
    vote.values[label] += 1.0;
  }
  const double k = static_cast<double>(neighbor_labels.size());
  for (double& value : vote.values) value /= k;
  vote.kind = VoteKind::kFrequency;
  return vote;
}

VoteVector noisy_vote(const VoteVector& vote, double sigma, int num_agents,
                      rng::GaussianSampler& sampler) {
  if (sigma < 0.0) throw std::invalid_argument("noisy_vote: sigma must be >= 0");
  if (num_agents < 1) throw std::invalid_argument("noisy_vote: need at least 1 agent");
  if (vote.values.empty()) throw std::invalid_argument("noisy_vote: empty vote");
  VoteVector noisy = vote;
  noisy.kind = VoteKind::kNoisy;
  if (sigma == 0.0) return noisy;
  const double scale = sigma / std::sqrt(static_cast<double>(num_agents));
  for (double& value : noisy.values) value += scale * sampler.next();
  return noisy;
}

namespace trust {

namespace {

void check_vote_list(const std::vector<VoteVector>& votes, size_t num_classes,
                     const char* which) {
  for (const VoteVector& vote : votes) {
    if (vote.values.size() != num_classes) {
      throw std::invalid_argument(std::string("mpc_argmax: inconsistent class count in ") + which);
    }
  }
}

}  // namespace

SecureAggregate mpc_argmax(const std::vector<VoteVector>& noisy_votes,
                           const std::vector<VoteVector>& noiseless_votes,
                           int query_id) {
  if (noisy_votes.empty() || noisy_votes.size() != noiseless_votes.size()) {
    throw std::invalid_argument("mpc_argmax: need matching non-empty vote lists");
  }
  const size_t num_classes = noiseless_votes[0].values.size();
  if (num_classes < 2) throw std::invalid_argument("mpc_argmax: need at least 2 classes");
  check_vote_list(noisy_votes, num_classes, "noisy votes");
  check_vote_list(noiseless_votes, num_classes, "noiseless votes");

  const int num_agents = static_cast<int>(noisy_votes.size());
  const std::vector<double> noisy_sum = pairwise_vector_sum(
      num_agents, [&](int agent) { return noisy_votes[agent].values; });
  std::vector<double> noiseless_mean = pairwise_vector_sum(
      num_agents, [&](int agent) { return noiseless_votes[agent].values; });
  for (double& value : noiseless_mean) value /= num_agents;

  double top1 = noiseless_mean[0];
  double top2 = noiseless_mean[1];
  if (top2 > top1) std::swap(top1, top2);
  for (size_t c = 2; c < num_classes; ++c) {
    const double value = noiseless_mean[c];
    if (value > top1) {
      top2 = top1;
      top1 = value;
    } else if (value > top2) {
      top2 = value;
    }
  }

  SecureAggregate aggregate;
  aggregate.released_label_ = argmax_lowest(noisy_sum);
  aggregate.query_id_ = query_id;
  aggregate.noiseless_margin_ = top1 - top2;
  return aggregate;
}

accounting::MarginRecord AccountantHook::record(const SecureAggregate& aggregate) const {
  accounting::MarginRecord record;
  record.query_id = aggregate.query_id_;
  record.gamma = aggregate.noiseless_margin_;
  return record;
}

}  // namespace trust

}  // namespace veilvote::voting

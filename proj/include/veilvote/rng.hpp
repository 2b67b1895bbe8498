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
#include <random>

namespace veilvote::rng {

// splitmix64 finalizer; decorrelates structured inputs like (seed, id, id).
uint64_t mix64(uint64_t x);

// Deterministic seed for a named substream of a run, e.g.
// derive_seed(run_seed, kStreamVoteNoise, agent_id, query_id).
uint64_t derive_seed(uint64_t seed, uint64_t stream, uint64_t a = 0, uint64_t b = 0);

// Stream tags keep substreams of one run seed from colliding.
inline constexpr uint64_t kStreamVoteNoise = 1;
inline constexpr uint64_t kStreamUpdateNoise = 2;
inline constexpr uint64_t kStreamSampling = 3;
inline constexpr uint64_t kStreamTraining = 4;
inline constexpr uint64_t kStreamData = 5;
inline constexpr uint64_t kStreamProjection = 6;

// Standard-normal sampler: Box-Muller over mt19937_64. Hand-rolled because
// std::normal_distribution is implementation-defined, which would break
// byte-identical reports across toolchains.
class GaussianSampler {
 public:
  explicit GaussianSampler(uint64_t seed) : engine_(seed) {}

  // One draw from N(0, 1).
  double next();

  // One draw from [0, 1), 53-bit resolution.
  double uniform01();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace veilvote::rng

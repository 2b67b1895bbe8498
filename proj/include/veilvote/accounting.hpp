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

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace veilvote::accounting {

// Orders searched by the epsilon conversion: {1 + 2^j / 16 : j = 0..14},
// topping out at 1025.
std::vector<double> conversion_alpha_grid();
inline constexpr double kAlphaMax = 1025.0;

// A Renyi-DP guarantee: order alpha (> 1) -> epsilon(alpha). Curves built by
// this module are non-decreasing in alpha.
class RdpCurve {
 public:
  RdpCurve(std::function<double(double)> eval, std::string description);
  static RdpCurve zero();

  // Evaluates the curve; orders <= 1 are rejected.
  double operator()(double alpha) const;
  const std::string& description() const { return description_; }

 private:
  std::function<double(double)> eval_;
  std::string description_;
};

enum class Granularity { kAgentLevel, kInstanceLevel };
enum class Scheme { kAe, kKnn };

struct MechanismParams {
  double sigma = 0.0;        // noise scale on the summed vote
  double sensitivity = 1.0;  // L2 sensitivity of the noiseless statistic
  int queries = 0;
  int num_agents = 0;
  int k = 1;                 // kNN neighbor count (min across agents)
  int num_classes = 0;
  Granularity granularity = Granularity::kAgentLevel;

  // Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

// Margin observed for one answered query, gamma in [0, 1].
struct MarginRecord {
  int query_id = 0;
  double gamma = 0.0;
};

struct ConversionResult {
  double epsilon = 0.0;
  double alpha_star = 0.0;
  // The grid minimum sat at the top order; the reported epsilon may be loose.
  bool at_alpha_cap = false;
};

struct PrivacyReport {
  double epsilon = 0.0;
  double delta = 0.0;
  double alpha_star = 0.0;
  std::optional<double> epsilon_data_dependent;  // absent without margins
  std::vector<std::pair<double, double>> rdp_at_orders;
  std::vector<std::string> warnings;
};

// Gaussian mechanism curve: alpha * s^2 / (2 sigma^2).
RdpCurve gaussian_rdp(double sensitivity, double sigma);

// Pointwise sum of guarantees under composition. Rejects an empty list.
RdpCurve compose(const std::vector<RdpCurve>& curves);

// min over alpha > 1 of eps(alpha) + log(1/delta) / (alpha - 1), searched on
// the dyadic grid and refined by golden section inside the best bracket.
ConversionResult rdp_to_dp(const RdpCurve& curve, double delta);

// Q-query voting curves: agent level Q a / (2 sigma^2) for both schemes;
// instance level Q a / sigma^2 for AE and Q a / (k sigma^2) for kNN.
RdpCurve scheme_curve(const MechanismParams& params, Scheme scheme);

// Lower bound on P[noisy argmax = noiseless majority] given margin gamma:
// max(0, 1 - C exp(-N^2 gamma^2 / (8 sigma^2))).
double match_probability_bound(int num_agents, double sigma, double gamma,
                               int num_classes);

// RDP at order alpha of a mechanism that deviates from a fixed outcome with
// probability at most q, where eps_at_2alpha bounds its RDP at order 2 alpha:
// -log(1-q) + log(1 + sqrt(q) (1-q)^(alpha-1) e^((alpha-1) eps)) / (alpha-1).
double amplified_rdp(double q, double eps_at_2alpha, double alpha);

// Margin-dependent per-query bound:
//   2 C e^(-A) + log(1 + e^((2a-1) a s / (2 sigma^2) - A + log(C)/2)) / (a-1)
// with A = N^2 gamma^2 / (8 sigma^2). squared_sensitivity s is the squared
// L2 sensitivity of the summed vote: 1 at agent level, 2/k for kNN at
// instance level. Evaluated in log space so large A cannot overflow.
double data_dependent_rdp(int num_agents, double sigma, double gamma,
                          int num_classes, double alpha,
                          double squared_sensitivity);

// Composes one run's margin log: per order, the sum over queries of
// min(data-dependent, data-independent per-query), converted once at the
// end. epsilon_data_dependent is clamped to never exceed epsilon. A zero
// margin falls back to the data-independent bound through the pointwise min.
PrivacyReport accumulate_data_dependent(const std::vector<MarginRecord>& margins,
                                        const MechanismParams& params,
                                        Scheme scheme, double delta);

// Report for a plain data-independent curve (no margin information).
PrivacyReport make_privacy_report(const RdpCurve& curve, double delta);

// Noise calibration for the gradient baseline:
// eta E G sqrt(2 T log(1.25/delta)) / (N epsilon).
double dp_fedavg_sigma(double eta, int inner_iters, double lipschitz,
                       int rounds, double delta, int num_agents,
                       double epsilon);

}  // namespace veilvote::accounting

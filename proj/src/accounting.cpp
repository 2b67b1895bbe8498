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

#include "veilvote/accounting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace veilvote::accounting {

namespace {

constexpr const char* kAlphaCapWarning =
    "alpha search hit the grid maximum; the reported epsilon may be loose";

// log(1 + e^x) without overflow for large positive x.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

void validate_delta(double delta) {
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
}

// Exponent of the margin bound: N^2 gamma^2 / (8 sigma^2).
double margin_exponent(int num_agents, double sigma, double gamma) {
  const double scaled = static_cast<double>(num_agents) * gamma;
  return scaled * scaled / (8.0 * sigma * sigma);
}

void validate_margin_params(int num_agents, double sigma, double gamma,
                            int num_classes) {
  require(num_agents >= 1, "num_agents must be at least 1");
  require(sigma > 0.0, "sigma must be positive");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(num_classes >= 2, "num_classes must be at least 2");
}

struct GridSearch {
  int best_index = 0;
  double best_value = 0.0;
};

GridSearch search_grid(const std::vector<double>& grid,
                       const std::function<double(double)>& objective) {
  GridSearch result;
  result.best_value = objective(grid[0]);
  for (int i = 1; i < static_cast<int>(grid.size()); ++i) {
    const double value = objective(grid[i]);
    if (value < result.best_value) {
      result.best_value = value;
      result.best_index = i;
    }
  }
  return result;
}

}  // namespace

std::vector<double> conversion_alpha_grid() {
  std::vector<double> grid;
  grid.reserve(15);
  for (int j = 0; j < 15; ++j) {
    grid.push_back(1.0 + std::ldexp(1.0, j) / 16.0);
  }
  return grid;
}

RdpCurve::RdpCurve(std::function<double(double)> eval, std::string description)
    : eval_(std::move(eval)), description_(std::move(description)) {
  require(static_cast<bool>(eval_), "RdpCurve needs an evaluator");
}

RdpCurve RdpCurve::zero() {
  return RdpCurve([](double) { return 0.0; }, "zero");
}

double RdpCurve::operator()(double alpha) const {
  require(alpha > 1.0, "RDP order must exceed 1");
  return eval_(alpha);
}

void MechanismParams::validate() const {
  require(sigma > 0.0, "sigma must be positive");
  require(sensitivity > 0.0, "sensitivity must be positive");
  require(queries >= 0, "queries must be non-negative");
  require(num_agents >= 1, "num_agents must be at least 1");
  require(k >= 1, "k must be at least 1");
  require(num_classes >= 2, "num_classes must be at least 2");
}

RdpCurve gaussian_rdp(double sensitivity, double sigma) {
  require(sensitivity > 0.0, "sensitivity must be positive");
  require(sigma > 0.0, "sigma must be positive");
  const double coefficient = sensitivity * sensitivity / (2.0 * sigma * sigma);
  std::ostringstream description;
  description << "gaussian(s=" << sensitivity << ", sigma=" << sigma << ")";
  return RdpCurve([coefficient](double alpha) { return coefficient * alpha; },
                  description.str());
}

RdpCurve compose(const std::vector<RdpCurve>& curves) {
  require(!curves.empty(), "compose needs at least one curve");
  std::ostringstream description;
  if (curves.size() <= 4) {
    for (size_t i = 0; i < curves.size(); ++i) {
      if (i > 0) description << " + ";
      description << curves[i].description();
    }
  } else {
    description << "composition of " << curves.size() << " curves";
  }
  return RdpCurve(
      [curves](double alpha) {
        double total = 0.0;
        for (const RdpCurve& curve : curves) total += curve(alpha);
        return total;
      },
      description.str());
}

ConversionResult rdp_to_dp(const RdpCurve& curve, double delta) {
  validate_delta(delta);
  const double log_inv_delta = std::log(1.0 / delta);
  const auto objective = [&](double alpha) {
    return curve(alpha) + log_inv_delta / (alpha - 1.0);
  };

  const std::vector<double> grid = conversion_alpha_grid();
  const GridSearch coarse = search_grid(grid, objective);

  // Golden-section refinement inside the winning bracket. At the low edge
  // the bracket extends the dyadic pattern one step below the grid.
  const int i = coarse.best_index;
  double a = (i == 0) ? 1.0 + 1.0 / 32.0 : grid[i - 1];
  double b = (i + 1 == static_cast<int>(grid.size())) ? grid.back() : grid[i + 1];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (int iteration = 0; iteration < 200; ++iteration) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = objective(d);
    }
    if (b - a < 1e-12 * std::max(1.0, b)) break;
  }

  ConversionResult result;
  result.alpha_star = 0.5 * (a + b);
  result.epsilon = objective(result.alpha_star);
  // A minimum at a bracket edge (e.g. the alpha cap) belongs to the grid
  // point itself.
  if (coarse.best_value < result.epsilon) {
    result.epsilon = coarse.best_value;
    result.alpha_star = grid[i];
  }
  result.at_alpha_cap = (i + 1 == static_cast<int>(grid.size()));
  return result;
}

RdpCurve scheme_curve(const MechanismParams& params, Scheme scheme) {
  params.validate();
  const double sigma_sq = params.sigma * params.sigma;
  double per_query = 0.0;
  std::string label;
  if (params.granularity == Granularity::kAgentLevel) {
    per_query = 1.0 / (2.0 * sigma_sq);
    label = "agent-level";
  } else if (scheme == Scheme::kAe) {
    per_query = 1.0 / sigma_sq;
    label = "instance-level ae";
  } else {
    per_query = 1.0 / (params.k * sigma_sq);
    label = "instance-level knn";
  }
  const double coefficient = params.queries * per_query;
  std::ostringstream description;
  description << label << " voting (Q=" << params.queries
              << ", sigma=" << params.sigma << ")";
  return RdpCurve([coefficient](double alpha) { return coefficient * alpha; },
                  description.str());
}

double match_probability_bound(int num_agents, double sigma, double gamma,
                               int num_classes) {
  validate_margin_params(num_agents, sigma, gamma, num_classes);
  const double miss = num_classes * std::exp(-margin_exponent(num_agents, sigma, gamma));
  return std::max(0.0, 1.0 - miss);
}

double amplified_rdp(double q, double eps_at_2alpha, double alpha) {
  require(q >= 0.0 && q < 1.0, "q must lie in [0, 1)");
  require(eps_at_2alpha >= 0.0, "eps_at_2alpha must be non-negative");
  require(alpha > 1.0, "alpha must exceed 1");
  if (q == 0.0) return 0.0;
  const double log_term = 0.5 * std::log(q) + (alpha - 1.0) * std::log1p(-q) +
                          (alpha - 1.0) * eps_at_2alpha;
  return -std::log1p(-q) + softplus(log_term) / (alpha - 1.0);
}

double data_dependent_rdp(int num_agents, double sigma, double gamma,
                          int num_classes, double alpha,
                          double squared_sensitivity) {
  validate_margin_params(num_agents, sigma, gamma, num_classes);
  require(alpha > 1.0, "alpha must exceed 1");
  require(squared_sensitivity > 0.0, "squared_sensitivity must be positive");
  const double exponent = margin_exponent(num_agents, sigma, gamma);
  const double mismatch_mass = 2.0 * num_classes * std::exp(-exponent);
  const double log_term = (2.0 * alpha - 1.0) * alpha * squared_sensitivity /
                              (2.0 * sigma * sigma) -
                          exponent + 0.5 * std::log(static_cast<double>(num_classes));
  return mismatch_mass + softplus(log_term) / (alpha - 1.0);
}

namespace {

double scheme_squared_sensitivity(const MechanismParams& params, Scheme scheme) {
  if (params.granularity == Granularity::kAgentLevel) return 1.0;
  if (scheme == Scheme::kKnn) return 2.0 / params.k;
  return 2.0;
}

std::vector<std::pair<double, double>> sample_orders(const RdpCurve& curve) {
  std::vector<std::pair<double, double>> samples;
  for (double alpha : conversion_alpha_grid()) {
    samples.emplace_back(alpha, curve(alpha));
  }
  return samples;
}

}  // namespace

PrivacyReport accumulate_data_dependent(const std::vector<MarginRecord>& margins,
                                        const MechanismParams& params,
                                        Scheme scheme, double delta) {
  params.validate();
  validate_delta(delta);
  if (static_cast<int>(margins.size()) != params.queries) {
    throw std::invalid_argument(
        "margin log length must equal the configured query count");
  }
  for (const MarginRecord& record : margins) {
    require(record.gamma >= 0.0 && record.gamma <= 1.0,
            "margins must lie in [0, 1]");
  }

  const RdpCurve total = scheme_curve(params, scheme);
  MechanismParams per_query_params = params;
  per_query_params.queries = 1;
  const RdpCurve per_query = scheme_curve(per_query_params, scheme);
  const double squared_sensitivity = scheme_squared_sensitivity(params, scheme);

  const int num_agents = params.num_agents;
  const double sigma = params.sigma;
  const int num_classes = params.num_classes;
  const RdpCurve combined(
      [margins, per_query, num_agents, sigma, num_classes,
       squared_sensitivity](double alpha) {
        const double independent = per_query(alpha);
        double sum = 0.0;
        for (const MarginRecord& record : margins) {
          sum += std::min(independent,
                          data_dependent_rdp(num_agents, sigma, record.gamma,
                                             num_classes, alpha,
                                             squared_sensitivity));
        }
        return sum;
      },
      "margin-dependent " + total.description());

  const ConversionResult independent = rdp_to_dp(total, delta);
  const ConversionResult dependent = rdp_to_dp(combined, delta);

  PrivacyReport report;
  report.epsilon = independent.epsilon;
  report.delta = delta;
  report.alpha_star = independent.alpha_star;
  report.epsilon_data_dependent = std::min(dependent.epsilon, independent.epsilon);
  report.rdp_at_orders = sample_orders(total);
  if (independent.at_alpha_cap || dependent.at_alpha_cap) {
    report.warnings.push_back(kAlphaCapWarning);
  }
  return report;
}

PrivacyReport make_privacy_report(const RdpCurve& curve, double delta) {
  const ConversionResult conversion = rdp_to_dp(curve, delta);
  PrivacyReport report;
  report.epsilon = conversion.epsilon;
  report.delta = delta;
  report.alpha_star = conversion.alpha_star;
  report.rdp_at_orders = sample_orders(curve);
  if (conversion.at_alpha_cap) report.warnings.push_back(kAlphaCapWarning);
  return report;
}

double dp_fedavg_sigma(double eta, int inner_iters, double lipschitz,
                       int rounds, double delta, int num_agents,
                       double epsilon) {
  require(eta > 0.0, "eta must be positive");
  require(inner_iters >= 1, "inner_iters must be at least 1");
  require(lipschitz > 0.0, "lipschitz must be positive");
  require(rounds >= 1, "rounds must be at least 1");
  validate_delta(delta);
  require(num_agents >= 1, "num_agents must be at least 1");
  require(epsilon > 0.0, "epsilon must be positive");
  return eta * inner_iters * lipschitz *
         std::sqrt(2.0 * rounds * std::log(1.25 / delta)) /
         (num_agents * epsilon);
}

}  // namespace veilvote::accounting

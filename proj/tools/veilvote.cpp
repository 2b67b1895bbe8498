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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "veilvote/accounting.hpp"
#include "veilvote/config.hpp"
#include "veilvote/harness.hpp"
#include "veilvote/report_json.hpp"

namespace {

using veilvote::accounting::Granularity;
using veilvote::accounting::MechanismParams;
using veilvote::accounting::Scheme;

std::string block_name(const veilvote::config::SchemeBlock& block) {
  std::string name = veilvote::harness::scheme_name(block.scheme);
  if (!block.label.empty()) name += ":" + block.label;
  return name;
}

veilvote::harness::RunReport run_block(const veilvote::config::RunPlan& plan,
                                       const veilvote::config::SchemeBlock& block,
                                       uint64_t seed) {
  veilvote::harness::FederationSpec spec = plan.federation;
  spec.seed = seed;
  switch (block.scheme) {
    case veilvote::harness::SchemeKind::kAeDpfl:
      return veilvote::harness::run_ae_dpfl(spec, block.voting);
    case veilvote::harness::SchemeKind::kKnnDpfl:
      return veilvote::harness::run_knn_dpfl(spec, block.voting);
    case veilvote::harness::SchemeKind::kFedAvg:
      return veilvote::harness::run_fedavg(spec, block.fedavg);
    case veilvote::harness::SchemeKind::kDpFedAvg:
      return veilvote::harness::run_dp_fedavg(spec, block.fedavg, block.delta);
  }
  throw std::invalid_argument("unknown scheme block");
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

struct Aggregate {
  std::vector<double> accuracies;
  std::vector<double> epsilons;
};

void print_summary(const std::string& name, const Aggregate& aggregate) {
  const int n = static_cast<int>(aggregate.accuracies.size());
  double mean = 0.0;
  for (double a : aggregate.accuracies) mean += a;
  mean /= n;
  double variance = 0.0;
  for (double a : aggregate.accuracies) variance += (a - mean) * (a - mean);
  std::string line = name + ": accuracy " + format_double(mean);
  if (n > 1) {
    line += " +/- " + format_double(std::sqrt(variance / (n - 1)));
  }
  line += " (" + std::to_string(n) + (n == 1 ? " run)" : " runs)");
  if (!aggregate.epsilons.empty()) {
    line += ", epsilon " + format_double(aggregate.epsilons.front());
  }
  std::cout << line << "\n";
}

int command_run(const std::string& config_path) {
  const veilvote::config::RunPlan plan =
      veilvote::config::load_run_plan(config_path);
  std::ofstream sink;
  if (!plan.output_path.empty()) {
    sink.open(plan.output_path, std::ios::app);
    if (!sink) throw std::runtime_error("cannot open " + plan.output_path);
  }
  std::vector<Aggregate> aggregates(plan.schemes.size());
  for (int repeat = 0; repeat < plan.repeats; ++repeat) {
    const uint64_t seed = plan.base_seed + static_cast<uint64_t>(repeat);
    for (size_t b = 0; b < plan.schemes.size(); ++b) {
      const veilvote::harness::RunReport report =
          run_block(plan, plan.schemes[b], seed);
      aggregates[b].accuracies.push_back(report.test_accuracy);
      if (report.privacy.has_value()) {
        aggregates[b].epsilons.push_back(report.privacy->epsilon);
      }
      if (sink.is_open()) {
        sink << veilvote::report::report_line(report) << "\n";
        if (!sink) throw std::runtime_error("failed writing " + plan.output_path);
      }
    }
  }
  for (size_t b = 0; b < plan.schemes.size(); ++b) {
    print_summary(block_name(plan.schemes[b]), aggregates[b]);
  }
  if (sink.is_open()) sink.flush();
  return 0;
}

int command_account(const std::string& scheme_name, const std::string& granularity,
                    int queries, double sigma, double delta, int k, int agents,
                    int classes, const std::string& margins_path) {
  const Scheme scheme = scheme_name == "ae" ? Scheme::kAe : Scheme::kKnn;
  MechanismParams params;
  params.sigma = sigma;
  params.sensitivity = 1.0;
  params.num_agents = agents;
  params.k = k;
  params.num_classes = classes;
  params.granularity = granularity == "agent" ? Granularity::kAgentLevel
                                              : Granularity::kInstanceLevel;
  veilvote::accounting::PrivacyReport report;
  if (!margins_path.empty()) {
    const std::vector<veilvote::accounting::MarginRecord> margins =
        veilvote::config::read_margins_csv(margins_path);
    params.queries = queries > 0 ? queries : static_cast<int>(margins.size());
    report = veilvote::accounting::accumulate_data_dependent(margins, params,
                                                             scheme, delta);
  } else {
    if (queries < 1) {
      throw std::invalid_argument("--queries is required without --margins");
    }
    params.queries = queries;
    report = veilvote::accounting::make_privacy_report(
        veilvote::accounting::scheme_curve(params, scheme), delta);
  }
  std::cout << veilvote::report::to_json(report).dump(2) << "\n";
  return 0;
}

int command_compare(const std::string& config_path, const std::string& output_path) {
  const veilvote::config::RunPlan plan =
      veilvote::config::load_run_plan(config_path);
  if (plan.schemes.size() < 2) {
    throw veilvote::config::ConfigError(
        config_path + ": compare needs at least two scheme sections");
  }
  std::ofstream out(output_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + output_path);
  out << "scheme,seed,accuracy,epsilon,epsilon_star,comm_floats\n";
  int rows = 0;
  for (const veilvote::config::SchemeBlock& block : plan.schemes) {
    for (int repeat = 0; repeat < plan.repeats; ++repeat) {
      const uint64_t seed = plan.base_seed + static_cast<uint64_t>(repeat);
      const veilvote::harness::RunReport report = run_block(plan, block, seed);
      out << block_name(block) << "," << seed << ","
          << format_double(report.test_accuracy) << ",";
      if (report.privacy.has_value()) out << format_double(report.privacy->epsilon);
      out << ",";
      if (report.privacy.has_value() &&
          report.privacy->epsilon_data_dependent.has_value()) {
        out << format_double(*report.privacy->epsilon_data_dependent);
      }
      out << "," << format_double(report.comm_upstream_floats) << "\n";
      ++rows;
    }
  }
  if (!out) throw std::runtime_error("failed writing " + output_path);
  std::cout << "wrote " << rows << " rows to " << output_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private federated learning by label voting"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "Run every scheme block in a config");
  run->add_option("--config", run_config, "Run-plan config file")->required();

  std::string account_scheme;
  std::string account_granularity = "agent";
  int account_queries = 0;
  double account_sigma = 0.0;
  double account_delta = 1e-3;
  int account_k = 1;
  int account_agents = 0;
  int account_classes = 10;
  std::string account_margins;
  CLI::App* account =
      app.add_subcommand("account", "Privacy accounting without a run");
  account->add_option("--scheme", account_scheme, "Voting scheme")
      ->required()
      ->check(CLI::IsMember({"ae", "knn"}));
  account->add_option("--granularity", account_granularity, "Neighboring level")
      ->check(CLI::IsMember({"agent", "instance"}));
  account->add_option("--queries", account_queries, "Answered queries");
  account->add_option("--sigma", account_sigma, "Noise scale")->required();
  account->add_option("--delta", account_delta, "Target delta");
  account->add_option("--k", account_k, "kNN neighbours per vote");
  account->add_option("--agents", account_agents, "Number of agents")->required();
  account->add_option("--classes", account_classes, "Number of classes");
  account->add_option("--margins", account_margins,
                      "query_id,gamma file for data-dependent accounting");

  std::string compare_config;
  std::string compare_output;
  CLI::App* compare = app.add_subcommand(
      "compare", "Run 2+ scheme blocks on one federation, write a CSV");
  compare->add_option("--config", compare_config, "Run-plan config file")
      ->required();
  compare->add_option("--output", compare_output, "CSV destination")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed()) return command_run(run_config);
    if (account->parsed()) {
      return command_account(account_scheme, account_granularity, account_queries,
                             account_sigma, account_delta, account_k,
                             account_agents, account_classes, account_margins);
    }
    if (compare->parsed()) return command_compare(compare_config, compare_output);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const veilvote::config::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

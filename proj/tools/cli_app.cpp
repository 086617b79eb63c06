// Apache License, Version 2.0, refer to LICENSE.txt

#include "cli_app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <json.hpp>
#include <map>
#include <optional>
#include <ostream>

#include "pex/classifiers.hpp"
#include "pex/config.hpp"
#include "pex/dataset.hpp"
#include "pex/enumerate.hpp"
#include "pex/error.hpp"
#include "pex/esf.hpp"
#include "pex/harness.hpp"
#include "pex/paintbox.hpp"

namespace pex::cli {

namespace {

// "3+1", "0" for the empty partition.
std::string partition_label(const PartitionStat& rho) {
  if (rho.n() == 0) return "0";
  std::string out;
  for (auto it = rho.entries().rbegin(); it != rho.entries().rend(); ++it) {
    for (std::uint64_t r = 0; r < it->second; ++r) {
      if (!out.empty()) out += '+';
      out += std::to_string(it->first);
    }
  }
  return out;
}

ClassPsi class_psi(double psi, const std::vector<double>& per_class) {
  if (per_class.empty()) return ClassPsi(Psi(psi));
  std::vector<Psi> values;
  for (double v : per_class) values.emplace_back(v);
  return ClassPsi(std::move(values));
}

std::string labeling_label(const Dataset& data, const Labeling& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) out += ';';
    out += data.class_labels.at(labels[i]);
  }
  return out;
}

struct EsfArgs {
  std::uint64_t n = 0;
  double psi = 0;
  bool list = false;
};

int cmd_esf(const EsfArgs& a, std::ostream& out) {
  const Psi psi(a.psi);
  const PartitionList parts = enumerate_partitions(a.n);
  if (a.list) out << "partition,log_prob,prob\n";
  long double total = 0;
  for (const PartitionStat& rho : parts.partitions) {
    const double lp = esf_log_prob(rho, psi);
    total += std::exp(static_cast<long double>(lp));
    if (a.list) out << fmt::format("{},{},{}\n", partition_label(rho), lp, std::exp(lp));
  }
  if (!a.list) {
    out << fmt::format("n={}\npsi={}\npartitions={}\ntotal_probability={}\n", a.n, a.psi,
                       parts.partitions.size(), static_cast<double>(total));
  }
  return kOk;
}

struct ClassifyArgs {
  std::string data;
  double psi = 0;
  std::vector<double> class_psi;
  std::string mode = "both";
  std::string search = "exact";
  std::uint64_t exact_cap = kDefaultLabelingCap;
  unsigned workers = 1;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
  const Dataset data = load_dataset(a.data);
  const ClassPsi psi = class_psi(a.psi, a.class_psi);
  const bool marginal = a.mode != "simultaneous";
  const bool joint = a.mode != "marginal";

  std::optional<Labeling> m_labels;
  std::optional<SimultaneousResult> s_result;
  if (marginal) m_labels = classify_marginal(data.train, data.test, psi);
  if (joint) {
    const SearchMode mode = a.search == "greedy" ? SearchMode::greedy : SearchMode::exact;
    s_result = classify_simultaneous(data.train, data.test, psi, mode, a.exact_cap, a.workers);
  }

  out << "item";
  for (const std::string& name : data.feature_names) out << ',' << name;
  if (marginal) out << ",marginal";
  if (joint) out << ",simultaneous";
  out << '\n';
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    out << i;
    for (std::size_t f = 0; f < data.test.features(); ++f) {
      out << ',' << data.encoder.decode(f, data.test.value(i, f));
    }
    if (marginal) out << ',' << data.class_labels.at((*m_labels)[i]);
    if (joint) out << ',' << data.class_labels.at(s_result->labeling[i]);
    out << '\n';
  }
  if (marginal) {
    out << fmt::format("# marginal log_marginal_si={} log_simultaneous={}\n",
                       marginal_si_log_pred(data.train, data.test, *m_labels, psi),
                       simultaneous_log_pred(data.train, data.test, *m_labels, psi));
  }
  if (joint) {
    out << fmt::format("# simultaneous search={} approximate={} log_simultaneous={}",
                       a.search, s_result->approximate ? 1 : 0, s_result->log_predictive);
    if (s_result->log_posterior) out << fmt::format(" log_posterior={}", *s_result->log_posterior);
    out << '\n';
  }
  return kOk;
}

struct PosteriorArgs {
  std::string data;
  double psi = 0;
  std::vector<double> class_psi;
  std::string predictive = "simultaneous";
  std::uint64_t exact_cap = kDefaultLabelingCap;
  unsigned workers = 1;
};

int cmd_posterior(const PosteriorArgs& a, std::ostream& out) {
  const Dataset data = load_dataset(a.data);
  const ClassPsi psi = class_psi(a.psi, a.class_psi);
  Predictive predictive = Predictive::simultaneous;
  if (a.predictive == "marginal_si") predictive = Predictive::marginal_si;
  if (a.predictive == "marginal_se") predictive = Predictive::marginal_se;
  const PosteriorTable table =
      posterior_over_labelings(data.train, data.test, psi, predictive, a.exact_cap, a.workers);
  out << "labeling,log_posterior,posterior\n";
  for (const PosteriorEntry& e : table.entries) {
    out << fmt::format("{},{},{}\n", labeling_label(data, e.labeling), e.log_posterior,
                       std::exp(e.log_posterior));
  }
  return kOk;
}

struct SimulateArgs {
  std::size_t n = 0;
  double psi = 0;
  double theta = 0;
  std::uint64_t seed = 0;
};

int cmd_simulate(const std::string& which, const SimulateArgs& a, std::ostream& out) {
  const std::vector<SpeciesId> trace = which == "crp"
                                           ? sample_crp(Psi(a.psi), a.n, a.seed)
                                           : sample_paintbox(geometric_paintbox(a.theta), a.n,
                                                             a.seed);
  for (SpeciesId s : trace) out << s << '\n';
  return kOk;
}

struct DiagnoseArgs {
  double theta = 0;
  std::uint64_t steps = 0;
  std::uint64_t seed = 0;
  std::string format = "kv";
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  const PaintboxSpec spec = geometric_paintbox(a.theta);
  const MarkovDiagnostics d = run_chain_diagnostics(spec, a.steps, a.seed);
  const StationaryDistribution pi = stationary_distribution(spec);
  if (a.format == "json") {
    nlohmann::ordered_json j;
    j["theta"] = a.theta;
    j["steps"] = d.steps;
    j["seed"] = d.seed;
    j["states"] = d.stationary.size();
    j["total_variation"] = d.total_variation;
    j["stationary_residual"] = pi.residual;
    j["frequent_states_visited"] = d.frequent_states_visited;
    j["stationary"] = d.stationary;
    j["frequencies"] = d.frequencies;
    j["visits"] = d.visits;
    j["returns"] = d.returns;
    out << j.dump(2) << '\n';
    return kOk;
  }
  out << fmt::format("theta={}\nsteps={}\nseed={}\nstates={}\ntotal_variation={}\n", a.theta,
                     d.steps, d.seed, d.stationary.size(), d.total_variation);
  out << fmt::format("stationary_residual={}\nfrequent_states_visited={}\n", pi.residual,
                     d.frequent_states_visited ? 1 : 0);
  for (std::size_t s = 0; s < d.stationary.size(); ++s) {
    out << fmt::format("stationary.{}={}\nfrequency.{}={}\nvisits.{}={}\nreturns.{}={}\n", s,
                       d.stationary[s], s, d.frequencies[s], s, d.visits[s], s, d.returns[s]);
  }
  return kOk;
}

struct ConvergeArgs {
  std::string config;
  // Flag values override the file; kept as text and parsed by the config layer.
  std::map<std::string, std::string> overrides;
};

int cmd_converge(const ConvergeArgs& a, std::ostream& out) {
  KeyValueConfig kv = a.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(a.config);
  for (const auto& [key, value] : a.overrides) kv.set(key, value);
  if (!kv.get("seed")) throw DomainError("converge requires an explicit seed");
  const ConvergenceConfig config = convergence_config_from(kv);
  const bool test_sweep = !config.n_grid.empty();
  const auto rows = test_sweep ? run_test_growth(config) : run_convergence(config);
  write_csv(out, rows, test_sweep ? SweepAxis::test : SweepAxis::train, config.report_argmax);
  return kOk;
}

struct EstimateArgs {
  std::uint64_t n = 0;
  std::uint64_t distinct = 0;
};

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  const PsiEstimate est = estimate_psi(a.n, a.distinct);
  out << fmt::format("psi={}\nstatus={}\n", est.value, to_string(est.status));
  if (est.status == PsiEstimateStatus::all_distinct) {
    err << "error: every observation is a distinct species; no finite maximizer\n";
    return kValidation;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Predictive classification under partition exchangeability", "pex"};
  app.require_subcommand(1);

  EsfArgs esf;
  auto* esf_cmd = app.add_subcommand("esf", "Ewens sampling formula over all partitions of n");
  esf_cmd->add_option("--n", esf.n, "Sample size")->required();
  esf_cmd->add_option("--psi", esf.psi, "Dispersion parameter")->required();
  esf_cmd->add_flag("--list", esf.list, "List every partition");

  ClassifyArgs classify;
  auto* classify_cmd = app.add_subcommand("classify", "Label the test rows of a dataset");
  classify_cmd->add_option("--data", classify.data, "CSV dataset")->required();
  classify_cmd->add_option("--psi", classify.psi, "Dispersion parameter")->required();
  classify_cmd->add_option("--class-psi", classify.class_psi, "One psi per class")
      ->delimiter(',');
  classify_cmd->add_option("--mode", classify.mode)
      ->check(CLI::IsMember({"marginal", "simultaneous", "both"}));
  classify_cmd->add_option("--search", classify.search, "Simultaneous search")
      ->check(CLI::IsMember({"exact", "greedy"}));
  classify_cmd->add_option("--exact-cap", classify.exact_cap, "Largest k^n enumerated");
  classify_cmd->add_option("--workers", classify.workers)->check(CLI::PositiveNumber);

  PosteriorArgs posterior;
  auto* posterior_cmd = app.add_subcommand("posterior", "Posterior over all test labelings");
  posterior_cmd->add_option("--data", posterior.data, "CSV dataset")->required();
  posterior_cmd->add_option("--psi", posterior.psi, "Dispersion parameter")->required();
  posterior_cmd->add_option("--class-psi", posterior.class_psi, "One psi per class")
      ->delimiter(',');
  posterior_cmd->add_option("--predictive", posterior.predictive)
      ->check(CLI::IsMember({"simultaneous", "marginal_si", "marginal_se"}));
  posterior_cmd->add_option("--exact-cap", posterior.exact_cap, "Largest k^n enumerated");
  posterior_cmd->add_option("--workers", posterior.workers)->check(CLI::PositiveNumber);

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Sample a species trace");
  simulate_cmd->require_subcommand(1);
  auto* crp_cmd = simulate_cmd->add_subcommand("crp", "Chinese restaurant process");
  crp_cmd->add_option("--n", simulate.n)->required();
  crp_cmd->add_option("--psi", simulate.psi)->required();
  crp_cmd->add_option("--seed", simulate.seed)->required();
  auto* paintbox_cmd = simulate_cmd->add_subcommand("paintbox", "Geometric paintbox");
  paintbox_cmd->add_option("--n", simulate.n)->required();
  paintbox_cmd->add_option("--theta", simulate.theta)->required();
  paintbox_cmd->add_option("--seed", simulate.seed)->required();

  DiagnoseArgs diagnose;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "Paintbox chain occupancy diagnostics");
  diagnose_cmd->add_option("--theta", diagnose.theta)->required();
  diagnose_cmd->add_option("--steps", diagnose.steps)->required();
  diagnose_cmd->add_option("--seed", diagnose.seed)->required();
  diagnose_cmd->add_option("--format", diagnose.format)->check(CLI::IsMember({"kv", "json"}));

  ConvergeArgs converge;
  auto* converge_cmd = app.add_subcommand("converge", "Simultaneous/marginal ratio sweep");
  converge_cmd->add_option("--config", converge.config, "key=value file");
  const std::vector<std::pair<std::string, std::string>> converge_flags = {
      {"--m-grid", "m_grid"}, {"--n", "n"},           {"--k", "k"},
      {"--psi", "psi"},       {"--psi-true", "psi_true"}, {"--psi-model", "psi_model"},
      {"--reps", "replicates"}, {"--seed", "seed"},   {"--generator", "generator"},
      {"--theta", "theta"},   {"--n-grid", "n_grid"}, {"--m", "m"},
      {"--class-shares", "class_shares"}, {"--workers", "workers"}};
  std::vector<std::string> flag_values(converge_flags.size());
  for (std::size_t i = 0; i < converge_flags.size(); ++i) {
    converge_cmd->add_option(converge_flags[i].first, flag_values[i]);
  }
  bool argmax = false;
  converge_cmd->add_flag("--argmax", argmax, "Add the argmax agreement column");

  EstimateArgs estimate;
  auto* estimate_cmd = app.add_subcommand("estimate-psi", "Maximum-likelihood psi");
  estimate_cmd->add_option("--n", estimate.n)->required();
  estimate_cmd->add_option("--distinct", estimate.distinct)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (esf_cmd->parsed()) return cmd_esf(esf, out);
    if (classify_cmd->parsed()) return cmd_classify(classify, out);
    if (posterior_cmd->parsed()) return cmd_posterior(posterior, out);
    if (simulate_cmd->parsed()) {
      return cmd_simulate(crp_cmd->parsed() ? "crp" : "paintbox", simulate, out);
    }
    if (diagnose_cmd->parsed()) return cmd_diagnose(diagnose, out);
    if (converge_cmd->parsed()) {
      for (std::size_t i = 0; i < converge_flags.size(); ++i) {
        if (converge_cmd->count(converge_flags[i].first) > 0) {
          converge.overrides[converge_flags[i].second] = flag_values[i];
        }
      }
      if (argmax) converge.overrides["argmax"] = "1";
      return cmd_converge(converge, out);
    }
    if (estimate_cmd->parsed()) return cmd_estimate(estimate, out, err);
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kCapExceeded;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

}  // namespace pex::cli

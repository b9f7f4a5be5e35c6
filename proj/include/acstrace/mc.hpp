#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acstrace/design.hpp"
#include "acstrace/dynamics.hpp"
#include "acstrace/population.hpp"

namespace acstrace {

enum class PopKind { person_equal, household, dynamics };

struct PopulationSpec {
  PopKind kind = PopKind::person_equal;
  std::int64_t n_units = 0;
  std::int64_t theta = 0;              // case units (dynamics: derived from setting)
  int k = 1;                           // network size (dynamics: t1 size)
  std::vector<double> size_dist;       // household mode, sizes 1..len
  std::optional<DynamicsSetting> setting;
  NetworkOptions net_opts{};

  void validate() const;
  std::int64_t theta_units() const;
  PopulationGraph build(std::uint64_t seed) const;  // base population
  bool operator==(const PopulationSpec&) const = default;
};

enum class TemporalDesign { cross_sectional, panel, pacs, iacs };

struct Scenario {
  std::string id;
  PopulationSpec population;
  InitialDesign initial;
  TracingDesign tracing{};
  TemporalDesign temporal = TemporalDesign::cross_sectional;
  std::int64_t replicates = 10000;
  std::uint64_t seed = 1;
  bool freeze_population = false;  // one transition / one size draw for all replicates

  void validate() const;
  bool operator==(const Scenario&) const = default;
};

struct McSummary {
  std::string scenario_id;
  std::string design_label;
  std::int64_t m = 0;
  double eta = 1.0;
  std::string k_or_setting;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;

  double mean_n = 0.0;
  std::optional<double> cv_mc, cv_analytic;  // cross-sectional scenarios
  std::optional<double> se_mc, se_analytic;  // change scenarios (prevalence scale)
  std::optional<double> re_mc, re_analytic;  // vs the scenario's declared baseline

  // diagnostics beyond the CSV schema
  std::optional<double> baseline_cv_mc, baseline_cv_analytic, baseline_se_mc, baseline_se_analytic;
  std::optional<double> re_mc_standard_error;
  std::optional<double> en_analytic;
  double mean_estimate = 0.0;
  double estimand = 0.0;  // true theta (expected person-case total) or nabla
  std::int64_t zero_network_replicates = 0;
};

enum class Engine { automatic, fast, reference };

// Runs R seeded replicates of the scenario and aggregates the summary.
// Deterministic for a fixed seed regardless of thread count; threads <= 0
// resolves ACSTRACE_THREADS, then hardware concurrency.
McSummary run_scenario(const Scenario& sc, int threads = 0, Engine engine = Engine::automatic);

// Closed-form E(n) for a population under a design: initial units plus the
// expected annexation of hit networks plus their edge nodes.
double expected_sample_size_analytic(const PopulationGraph& pop, const InitialDesign& design);

// Closed-form cross-sectional quantities for an equal-network spec. Household
// variances are unconditional over the size draws (E[V | pop] + Var(theta_pop)).
struct CrossAnalytics {
  double estimand = 0.0;        // expected person-case total
  double var_acs = 0.0;         // HT-under-ACS variance of the total
  double var_initial = 0.0;     // baseline initial-sample HT variance
  double cv_acs = 0.0;
  double cv_initial = 0.0;
  double re = 0.0;
  double en = 0.0;              // expected final sample size
};
CrossAnalytics cross_sectional_analytics(const PopulationSpec& spec, const InitialDesign& design);

// Analytic change-design quantities; pACS/iACS variances average the exact
// formula over transition draws when the realized structure is random.
struct ChangeAnalytics {
  double var_panel = 0.0;
  double se_panel = 0.0;
  std::optional<double> var_adaptive;
  std::optional<double> se_adaptive;
  std::optional<double> re;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double var_panel_lambda_approx = 0.0;
};
ChangeAnalytics change_analytics(const PopulationSpec& spec, const InitialDesign& design,
                                 TemporalDesign temporal, std::uint64_t seed);

struct EfficiencyResult {
  std::optional<double> analytic;
  std::optional<double> monte_carlo;
  std::optional<double> mc_standard_error;
};

// Variance ratio of a scenario against a baseline on the same population
// spec: analytic when both sides have closed forms, Monte Carlo otherwise.
EfficiencyResult relative_efficiency(const Scenario& sc, const Scenario& baseline, int threads = 0);

int resolve_threads(int requested);

}  // namespace acstrace

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "acstrace/design.hpp"
#include "acstrace/dynamics.hpp"
#include "acstrace/inclusion.hpp"
#include "acstrace/population.hpp"

// Exhaustive-enumeration oracle: probabilities and estimator moments
// obtained by walking every possible initial sample and counting. Nothing
// here uses the closed-form inclusion probabilities or variance formulas,
// so it can sit in judgement over them.
namespace acstrace::oracle {

// Visits every m-subset of {0..n-1}; ids arrive sorted.
void for_each_srs_sample(int n, int m, const std::function<void(std::span<const UnitId>)>& fn);

// Visits every subset with its Poisson sampling weight.
void for_each_poisson_sample(
    const PopulationGraph& pop, const InitialDesign& design,
    const std::function<void(std::span<const UnitId>, const Rational&)>& fn);

struct CrossEnumeration {
  Rational e_acs, var_acs;    // moments of the ACS HT total over all samples
  Rational e_init, var_init;  // moments of the initial-sample HT total
  Rational mean_n;
  std::vector<Rational> net_hit;          // P(network intersects s0)
  std::vector<Rational> net_joint;        // row-major MxM
  std::vector<Rational> unit_in_sample;   // P(unit in final sample)
  std::vector<Rational> pair_in_sample;   // row-major NxN, P(both in final sample)
};

CrossEnumeration enumerate_cross(const PopulationGraph& pop, const InitialDesign& design);

struct TwoWaveEnumeration {
  Rational e_panel, var_panel;
  Rational e_pacs, var_pacs;
  Rational e_iacs, var_iacs;
  std::vector<Rational> unit_in_st;   // P(unit in s(t))
  std::vector<Rational> pair_in_st;   // row-major NxN
};

TwoWaveEnumeration enumerate_two_wave(const TwoWavePopulation& tw, const InitialDesign& design);

// Randomized toy populations: N <= 12, networks of mixed sizes and
// topologies, optional edge nodes and isolated noncases.
PopulationGraph random_toy_population(std::uint64_t seed);

// Small two-snapshot population with growth, shrinkage and emergence. Built
// so that no unit traceable at t (edge unit) turns into a case at t+1, the
// regime in which the iACS estimator is exactly unbiased.
TwoWavePopulation random_two_wave_toy(std::uint64_t seed);

struct EnumerationOptions {
  int cross_toys = 20;
  int two_wave_toys = 8;
  std::uint64_t seed = 20250801;
  bool check_poisson = true;  // additional Poisson-design enumeration checks
};

// Runs the full oracle suite against the library's closed forms and
// estimators; prints one line per check group. Returns true when everything
// agrees (exactly, or within 1e-10 where a tolerance is stated).
bool run_enumeration_suite(const EnumerationOptions& opts, std::ostream& log);

}  // namespace acstrace::oracle

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "acstrace/population.hpp"
#include "acstrace/rng.hpp"

namespace acstrace {

class RngStream;

struct InitialDesign {
  enum class Kind { srs, poisson_size_biased };
  Kind kind = Kind::srs;
  std::int64_t m = 0;  // exact size under SRS, expected size under Poisson
  double eta = 1.0;    // odds of case selection (Poisson only)

  static InitialDesign srs(std::int64_t m) { return {Kind::srs, m, 1.0}; }
  static InitialDesign poisson(std::int64_t m, double eta) {
    return {Kind::poisson_size_biased, m, eta};
  }

  void validate(std::int64_t n_units) const;
  bool operator==(const InitialDesign&) const = default;
};

// Per-unit initial inclusion probabilities under Poisson size-biased
// sampling, solved so that the expected sample size equals m:
//   p_non = m / (N + (eta - 1) * theta_units),  p_case = eta * p_non.
struct PoissonProbs {
  double p_case = 0.0;
  double p_non = 0.0;
};
PoissonProbs poisson_probs(const InitialDesign& design, std::int64_t n_units, std::int64_t theta_units);

// Exogenous edge strengths psi_ij for DACS, keyed on the unordered pair.
class EdgeStrengths {
 public:
  void set(UnitId a, UnitId b, double psi) { map_[key(a, b)] = psi; }
  std::optional<double> get(UnitId a, UnitId b) const {
    const auto it = map_.find(key(a, b));
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }
  bool empty() const { return map_.empty(); }
  bool operator==(const EdgeStrengths&) const = default;

 private:
  static std::uint64_t key(UnitId a, UnitId b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
  }
  std::unordered_map<std::uint64_t, double> map_;
};

struct TracingDesign {
  enum class Kind { acs, dacs, qasbs };
  Kind kind = Kind::acs;
  double psi0 = 0.0;                           // dacs
  int q = 0;                                   // qasbs
  std::optional<EdgeStrengths> edge_strengths; // required for dacs

  static TracingDesign acs() { return {}; }
  static TracingDesign dacs(double psi0, EdgeStrengths strengths) {
    TracingDesign d;
    d.kind = Kind::dacs;
    d.psi0 = psi0;
    d.edge_strengths = std::move(strengths);
    return d;
  }
  static TracingDesign qasbs(int q) {
    TracingDesign d;
    d.kind = Kind::qasbs;
    d.q = q;
    return d;
  }

  void validate() const;
  bool operator==(const TracingDesign&) const = default;
};

enum class SampleTag : std::uint8_t { network_case, edge_unit, other_initial };

struct TraceSample {
  std::vector<UnitId> s0;                     // sorted
  std::vector<std::vector<UnitId>> waves;     // s_1..s_q; last wave empty for ACS/DACS
  std::vector<UnitId> final_units;            // sorted union of s0 and all waves
  std::vector<SampleTag> tags;                // parallel to final_units
  // Case units whose whole case network made it into the sample. Always true
  // for cases under ACS; under qASBS only these are usable for multiplicity
  // estimation.
  std::vector<std::uint8_t> network_fully_observed;  // parallel to final_units
  TracingDesign::Kind tracing_kind = TracingDesign::Kind::acs;
  bool network_exhaustive = true;  // true iff tracing was plain ACS

  std::int64_t n() const { return static_cast<std::int64_t>(final_units.size()); }
  bool contains(UnitId u) const;
  // Distinct network ids (w.r.t. the traced population) of sampled cases.
  std::vector<int> sampled_networks(const PopulationGraph& pop) const;
};

// Initial probability sample: exact-size uniform subset under SRS,
// independent Bernoulli with case/noncase probabilities under Poisson.
std::vector<UnitId> draw_initial(const InitialDesign& design, const PopulationGraph& pop, RngStream& rng);
std::vector<UnitId> draw_initial(const InitialDesign& design, const PopulationGraph& pop, std::uint64_t seed);

// Wave-by-wave adaptive tracing from s0: only cases are traced; a unit joins
// the earliest wave in which a traced case is adjacent to it. ACS/DACS stop
// at the first empty wave (recorded), qASBS stops after q waves regardless.
TraceSample trace(const PopulationGraph& pop, std::vector<UnitId> s0, const TracingDesign& tracing);

// Tags every final unit: network_case iff y >= 1; edge_unit iff y = 0 and
// adjacent to a sampled case; other_initial otherwise (noncase drawn in s0).
std::vector<SampleTag> classify(const TraceSample& sample, const PopulationGraph& pop);

// Debug / estimation-only workflow export: {s0, waves, final, tags}.
std::string trace_sample_to_json(const TraceSample& sample);

}  // namespace acstrace

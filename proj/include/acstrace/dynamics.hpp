#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "acstrace/population.hpp"
#include "acstrace/rng.hpp"

namespace acstrace {

struct NetworkCell {
  std::int64_t count = 0;
  int size = 0;
  bool operator==(const NetworkCell&) const = default;
};

// Two-time-point transition profile: (count, size) of networks at t=1, and
// the growing / shrinking / emerging cells at t=2. A missing shrinking cell
// means the non-growing networks get their t=2 sizes assigned randomly, one
// case at a time, subject to the target case total (the S settings).
struct DynamicsSetting {
  std::string label;
  NetworkCell t1;
  NetworkCell growing;
  std::optional<NetworkCell> shrinking;
  NetworkCell emerging;

  std::int64_t theta1() const { return t1.count * t1.size; }
  std::int64_t theta2() const { return theta1(); }  // constant case total

  void validate() const;
  bool operator==(const DynamicsSetting&) const = default;
};

// The nine presets of the simulation study: L1..L3, M1..M3, S1..S3.
DynamicsSetting table3_setting(const std::string& label);
const std::vector<std::string>& table3_labels();

// Realized t1 -> t2 move: which networks grow (annexing fresh noncases),
// which members survive a shrink, and the emerging networks' members.
struct Transition {
  struct NetOutcome {
    int net_id = 0;
    std::vector<UnitId> retained;  // members still cases at t=2
    std::vector<UnitId> annexed;   // fresh cases joining the network
  };
  std::vector<NetOutcome> outcomes;           // one per t1 network, in id order
  std::vector<std::vector<UnitId>> emerging;  // new networks' members
  std::vector<UnitId> new_cases;              // d = +1
  std::vector<UnitId> closed_cases;           // d = -1
};

// Reusable scratch for transition sampling in replicate loops.
struct TransitionWorkspace {
  explicit TransitionWorkspace(const PopulationGraph& base);
  std::vector<UnitId> noncase_ids;
  SubsetSampler net_picker;
  SubsetSampler noncase_picker;
  SubsetSampler member_picker;
  std::vector<std::int32_t> scratch;
  std::vector<std::int32_t> fill_counts;
  std::vector<std::int32_t> eligible;
};

Transition sample_transition(const PopulationGraph& base, const DynamicsSetting& setting,
                             RngStream& rng, TransitionWorkspace& ws);

// Fixed-U two-snapshot population with per-unit change values d in {-1,0,+1}.
struct TwoWavePopulation {
  PopulationGraph base;
  PopulationGraph evolved;
  std::vector<std::int8_t> d;
  std::int64_t count_plus = 0;   // units with d = +1
  std::int64_t count_minus = 0;  // units with d = -1

  double lambda_plus() const { return static_cast<double>(count_plus) / static_cast<double>(base.n_units()); }
  double lambda_minus() const { return static_cast<double>(count_minus) / static_cast<double>(base.n_units()); }
  std::int64_t theta1() const { return base.y_total(); }
  std::int64_t theta2() const { return evolved.y_total(); }
};

// Applies a Table-3-style transition to an equal-network person population.
// Growing networks keep every t=1 member; shrinking networks retain a
// uniform subset; evolved networks are rebuilt as stars (estimators under
// exhaustive tracing are topology-invariant).
TwoWavePopulation evolve_population(const PopulationGraph& base, const DynamicsSetting& setting,
                                    std::uint64_t seed);

TwoWavePopulation apply_transition(const PopulationGraph& base, const Transition& transition);

// Pairs two snapshots over the same unit set (person mode).
TwoWavePopulation make_two_wave(PopulationGraph base, PopulationGraph evolved);

}  // namespace acstrace

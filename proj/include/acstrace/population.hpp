#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace acstrace {

using UnitId = std::int32_t;

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Mode { person, household };

// Maximal set of case units mutually reachable through case-case contact
// edges. Observed in full under ACS once any member enters the sample.
struct CaseNetwork {
  int id = 0;
  std::vector<UnitId> members;  // sorted
  std::int64_t y_total = 0;     // person-case count of the network

  int size() const { return static_cast<int>(members.size()); }
  bool operator==(const CaseNetwork&) const = default;
};

enum class NetworkTopology { star, path, complete };

struct NetworkOptions {
  NetworkTopology topology = NetworkTopology::star;
  int edge_nodes_per_network = 0;
  bool operator==(const NetworkOptions&) const = default;
};

// Undirected simple contact graph over units 0..N-1 with per-unit case
// values and the derived case-network partition. Immutable once built;
// safe to share across threads.
class PopulationGraph {
 public:
  PopulationGraph() = default;

  // Builds from raw unit data; derives networks by connected components over
  // case units and case-case edges, and checks all structural invariants.
  PopulationGraph(Mode mode, std::vector<int> y, std::vector<int> household_size,
                  const std::vector<std::pair<UnitId, UnitId>>& edges);

  Mode mode() const { return mode_; }
  std::int64_t n_units() const { return static_cast<std::int64_t>(y_.size()); }
  int y(UnitId i) const { return y_[static_cast<std::size_t>(i)]; }
  int household_size(UnitId i) const { return household_size_[static_cast<std::size_t>(i)]; }
  bool is_case(UnitId i) const { return y_[static_cast<std::size_t>(i)] > 0; }
  const std::vector<int>& y_values() const { return y_; }

  std::int64_t theta_units() const { return theta_units_; }  // number of case units
  std::int64_t y_total() const { return y_total_; }          // person-case total

  std::span<const UnitId> neighbors(UnitId i) const {
    const auto b = static_cast<std::size_t>(adj_offsets_[static_cast<std::size_t>(i)]);
    const auto e = static_cast<std::size_t>(adj_offsets_[static_cast<std::size_t>(i) + 1]);
    return {adj_.data() + b, e - b};
  }

  const std::vector<CaseNetwork>& networks() const { return networks_; }
  // Network index of a case unit, -1 for noncases.
  int network_of(UnitId i) const { return network_of_[static_cast<std::size_t>(i)]; }

  std::vector<std::pair<UnitId, UnitId>> edge_list() const;  // i < j, sorted

  bool operator==(const PopulationGraph&) const = default;

 private:
  Mode mode_ = Mode::person;
  std::vector<int> y_;
  std::vector<int> household_size_;
  std::vector<std::int64_t> adj_offsets_;
  std::vector<UnitId> adj_;
  std::vector<CaseNetwork> networks_;
  std::vector<int> network_of_;
  std::int64_t theta_units_ = 0;
  std::int64_t y_total_ = 0;
};

// theta case units split into theta/k networks of exactly k, placed on
// uniformly random ids. Topology and optional attached edge nodes per the
// options; the default (star, no edge nodes) matches the simulation
// populations whose estimator distribution is topology-invariant.
PopulationGraph build_equal_network_population(std::int64_t n_units, std::int64_t theta, int k,
                                               std::uint64_t seed, const NetworkOptions& opts = {});

// Household population: units are households with sizes drawn iid from
// size_dist over sizes 1..size_dist.size(); case households carry
// y = household_size (every member infected).
PopulationGraph build_household_population(std::int64_t n_units, std::int64_t theta, int k,
                                           const std::vector<double>& size_dist, std::uint64_t seed,
                                           const NetworkOptions& opts = {});

// Snapshot schema: {mode, N, units:[{id,y,size}], edges:[[i,j]], networks:[[ids]]}.
// Export is byte-identical for a fixed population.
std::string population_to_json(const PopulationGraph& pop);
PopulationGraph population_from_json(const std::string& text);

}  // namespace acstrace

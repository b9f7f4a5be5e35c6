#include "acstrace/dynamics.hpp"

#include <algorithm>

namespace acstrace {

void DynamicsSetting::validate() const {
  if (t1.count <= 0 || t1.size <= 0) throw ConfigError("dynamics: t1 cell must be positive");
  if (growing.count < 0 || emerging.count < 0) throw ConfigError("dynamics: negative network count");
  if (growing.count > 0 && growing.size < t1.size)
    throw ConfigError("dynamics: growing networks cannot be smaller than at t=1");
  if (emerging.count > 0 && emerging.size <= 0) throw ConfigError("dynamics: emerging size must be positive");
  if (shrinking) {
    if (shrinking->count < 0) throw ConfigError("dynamics: negative shrinking count");
    if (shrinking->count > 0 && (shrinking->size < 0 || shrinking->size > t1.size))
      throw ConfigError("dynamics: shrinking size must lie in [0, k]");
    if (growing.count + shrinking->count != t1.count)
      throw ConfigError("dynamics: growing and shrinking cells must partition the t1 networks");
    const std::int64_t total =
        growing.count * growing.size + shrinking->count * shrinking->size + emerging.count * emerging.size;
    if (total != theta2()) throw ConfigError("dynamics: t2 cells do not sum to the case total");
  } else {
    if (growing.count > t1.count) throw ConfigError("dynamics: more growing networks than exist");
    const std::int64_t fixed = growing.count * growing.size + emerging.count * emerging.size;
    const std::int64_t residual = theta2() - fixed;
    const std::int64_t capacity = (t1.count - growing.count) * t1.size;
    if (residual < 0 || residual > capacity)
      throw ConfigError("dynamics: residual case total infeasible for random size assignment");
  }
}

DynamicsSetting table3_setting(const std::string& label) {
  const auto make = [&](NetworkCell t1, NetworkCell grow, std::optional<NetworkCell> shrink,
                        NetworkCell emerge) {
    DynamicsSetting s;
    s.label = label;
    s.t1 = t1;
    s.growing = grow;
    s.shrinking = shrink;
    s.emerging = emerge;
    s.validate();
    return s;
  };
  if (label == "L1") return make({10, 100}, {2, 180}, NetworkCell{8, 80}, {0, 0});
  if (label == "L2") return make({10, 100}, {0, 0}, NetworkCell{10, 80}, {2, 100});
  if (label == "L3") return make({10, 100}, {0, 0}, NetworkCell{10, 90}, {5, 20});
  if (label == "M1") return make({100, 10}, {10, 46}, NetworkCell{90, 6}, {0, 0});
  if (label == "M2") return make({100, 10}, {0, 0}, NetworkCell{100, 6}, {10, 40});
  if (label == "M3") return make({100, 10}, {0, 0}, NetworkCell{100, 9}, {10, 10});
  if (label == "S1") return make({500, 2}, {10, 42}, std::nullopt, {0, 0});
  if (label == "S2") return make({500, 2}, {0, 0}, std::nullopt, {10, 40});
  if (label == "S3") return make({500, 2}, {0, 0}, std::nullopt, {50, 2});
  throw ConfigError("dynamics: unknown setting label '" + label + "'");
}

const std::vector<std::string>& table3_labels() {
  static const std::vector<std::string> labels{"L1", "L2", "L3", "M1", "M2", "M3", "S1", "S2", "S3"};
  return labels;
}

TransitionWorkspace::TransitionWorkspace(const PopulationGraph& base)
    : net_picker(static_cast<std::int64_t>(base.networks().size())),
      noncase_picker(base.n_units() - base.theta_units()),
      member_picker(base.networks().empty() ? 1 : base.networks().front().size()) {
  noncase_ids.reserve(static_cast<std::size_t>(base.n_units() - base.theta_units()));
  for (UnitId i = 0; i < base.n_units(); ++i)
    if (!base.is_case(i)) noncase_ids.push_back(i);
}

Transition sample_transition(const PopulationGraph& base, const DynamicsSetting& setting,
                             RngStream& rng, TransitionWorkspace& ws) {
  setting.validate();
  if (base.mode() != Mode::person) throw ConfigError("dynamics: base population must be person mode");
  const auto& nets = base.networks();
  if (static_cast<std::int64_t>(nets.size()) != setting.t1.count)
    throw ConfigError("dynamics: base population network count does not match setting");
  for (const auto& net : nets)
    if (net.size() != setting.t1.size)
      throw ConfigError("dynamics: base population network size does not match setting");

  const int k = setting.t1.size;
  const std::int64_t n_nets = setting.t1.count;
  const std::int64_t n_grow = setting.growing.count;

  Transition tr;
  tr.outcomes.resize(static_cast<std::size_t>(n_nets));

  // which networks grow
  std::vector<char> grows(static_cast<std::size_t>(n_nets), 0);
  ws.net_picker.draw(n_grow, rng, ws.scratch);
  for (auto idx : ws.scratch) grows[static_cast<std::size_t>(idx)] = 1;

  // fresh case units annexed by growth plus emerging members
  const std::int64_t annex_per_grow = setting.growing.size - k;
  const std::int64_t need = n_grow * annex_per_grow + setting.emerging.count * setting.emerging.size;
  if (need > static_cast<std::int64_t>(ws.noncase_ids.size()))
    throw ConfigError("dynamics: not enough noncase units for growth and emergence");
  std::vector<std::int32_t> fresh_pos;
  ws.noncase_picker.draw(need, rng, fresh_pos);
  std::size_t fresh_at = 0;
  const auto next_fresh = [&]() { return ws.noncase_ids[static_cast<std::size_t>(fresh_pos[fresh_at++])]; };

  // per-network t2 sizes
  std::vector<int> t2_size(static_cast<std::size_t>(n_nets), 0);
  if (setting.shrinking) {
    for (std::int64_t i = 0; i < n_nets; ++i)
      t2_size[static_cast<std::size_t>(i)] = grows[static_cast<std::size_t>(i)] ? setting.growing.size : setting.shrinking->size;
  } else {
    // one case at a time to a uniformly random non-growing network below k
    ws.fill_counts.assign(static_cast<std::size_t>(n_nets), 0);
    ws.eligible.clear();
    for (std::int64_t i = 0; i < n_nets; ++i)
      if (!grows[static_cast<std::size_t>(i)]) ws.eligible.push_back(static_cast<std::int32_t>(i));
    std::int64_t residual = setting.theta2() - n_grow * setting.growing.size -
                            setting.emerging.count * setting.emerging.size;
    while (residual > 0) {
      const std::size_t pick = static_cast<std::size_t>(rng.below(ws.eligible.size()));
      const std::int32_t net = ws.eligible[pick];
      if (++ws.fill_counts[static_cast<std::size_t>(net)] == k) {
        ws.eligible[pick] = ws.eligible.back();
        ws.eligible.pop_back();
      }
      --residual;
    }
    for (std::int64_t i = 0; i < n_nets; ++i)
      t2_size[static_cast<std::size_t>(i)] =
          grows[static_cast<std::size_t>(i)] ? setting.growing.size : ws.fill_counts[static_cast<std::size_t>(i)];
  }

  for (std::int64_t i = 0; i < n_nets; ++i) {
    auto& out = tr.outcomes[static_cast<std::size_t>(i)];
    out.net_id = static_cast<int>(i);
    const auto& members = nets[static_cast<std::size_t>(i)].members;
    if (grows[static_cast<std::size_t>(i)]) {
      out.retained = members;
      out.annexed.resize(static_cast<std::size_t>(annex_per_grow));
      for (auto& u : out.annexed) u = next_fresh();
      std::sort(out.annexed.begin(), out.annexed.end());
      tr.new_cases.insert(tr.new_cases.end(), out.annexed.begin(), out.annexed.end());
    } else {
      const int keep = t2_size[static_cast<std::size_t>(i)];
      ws.member_picker.draw(keep, rng, ws.scratch);
      std::sort(ws.scratch.begin(), ws.scratch.end());
      out.retained.reserve(static_cast<std::size_t>(keep));
      std::size_t at = 0;
      for (int j = 0; j < k; ++j) {
        if (at < ws.scratch.size() && ws.scratch[at] == j) {
          out.retained.push_back(members[static_cast<std::size_t>(j)]);
          ++at;
        } else {
          tr.closed_cases.push_back(members[static_cast<std::size_t>(j)]);
        }
      }
    }
  }

  tr.emerging.resize(static_cast<std::size_t>(setting.emerging.count));
  for (auto& group : tr.emerging) {
    group.resize(static_cast<std::size_t>(setting.emerging.size));
    for (auto& u : group) u = next_fresh();
    std::sort(group.begin(), group.end());
    tr.new_cases.insert(tr.new_cases.end(), group.begin(), group.end());
  }
  std::sort(tr.new_cases.begin(), tr.new_cases.end());
  std::sort(tr.closed_cases.begin(), tr.closed_cases.end());
  return tr;
}

TwoWavePopulation apply_transition(const PopulationGraph& base, const Transition& transition) {
  std::vector<int> y2(static_cast<std::size_t>(base.n_units()), 0);
  std::vector<int> hsize(static_cast<std::size_t>(base.n_units()), 1);
  std::vector<std::pair<UnitId, UnitId>> edges;
  const auto add_star = [&](const std::vector<UnitId>& retained, const std::vector<UnitId>& annexed) {
    UnitId hub = -1;
    for (UnitId u : retained) {
      y2[static_cast<std::size_t>(u)] = 1;
      if (hub < 0)
        hub = u;
      else
        edges.emplace_back(hub, u);
    }
    for (UnitId u : annexed) {
      y2[static_cast<std::size_t>(u)] = 1;
      if (hub < 0)
        hub = u;
      else
        edges.emplace_back(hub, u);
    }
  };
  for (const auto& out : transition.outcomes) add_star(out.retained, out.annexed);
  static const std::vector<UnitId> kNone;
  for (const auto& group : transition.emerging) add_star(group, kNone);
  PopulationGraph evolved(Mode::person, std::move(y2), std::move(hsize), edges);
  return make_two_wave(base, std::move(evolved));
}

TwoWavePopulation evolve_population(const PopulationGraph& base, const DynamicsSetting& setting,
                                    std::uint64_t seed) {
  RngStream rng(seed);
  TransitionWorkspace ws(base);
  const Transition tr = sample_transition(base, setting, rng, ws);
  return apply_transition(base, tr);
}

TwoWavePopulation make_two_wave(PopulationGraph base, PopulationGraph evolved) {
  if (base.mode() != Mode::person || evolved.mode() != Mode::person)
    throw ConfigError("two-wave: person mode required");
  if (base.n_units() != evolved.n_units())
    throw ConfigError("two-wave: snapshots must share the unit set");
  TwoWavePopulation tw;
  tw.d.resize(static_cast<std::size_t>(base.n_units()));
  for (UnitId i = 0; i < base.n_units(); ++i) {
    const int di = evolved.y(i) - base.y(i);
    tw.d[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(di);
    if (di > 0) ++tw.count_plus;
    if (di < 0) ++tw.count_minus;
  }
  tw.base = std::move(base);
  tw.evolved = std::move(evolved);
  return tw;
}

}  // namespace acstrace

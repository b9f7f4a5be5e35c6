#include "acstrace/population.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "acstrace/rng.hpp"

namespace acstrace {

namespace {

using json = nlohmann::json;

void add_topology_edges(std::vector<std::pair<UnitId, UnitId>>& edges, std::span<const UnitId> members,
                        NetworkTopology topology) {
  const std::size_t k = members.size();
  switch (topology) {
    case NetworkTopology::star:
      for (std::size_t i = 1; i < k; ++i) edges.emplace_back(members[0], members[i]);
      break;
    case NetworkTopology::path:
      for (std::size_t i = 1; i < k; ++i) edges.emplace_back(members[i - 1], members[i]);
      break;
    case NetworkTopology::complete:
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) edges.emplace_back(members[i], members[j]);
      break;
  }
}

}  // namespace

PopulationGraph::PopulationGraph(Mode mode, std::vector<int> y, std::vector<int> household_size,
                                 const std::vector<std::pair<UnitId, UnitId>>& edges)
    : mode_(mode), y_(std::move(y)), household_size_(std::move(household_size)) {
  const std::int64_t n = static_cast<std::int64_t>(y_.size());
  if (household_size_.size() != y_.size())
    throw ConfigError("population: y and household_size length mismatch");
  for (std::int64_t i = 0; i < n; ++i) {
    const int s = household_size_[static_cast<std::size_t>(i)];
    const int yi = y_[static_cast<std::size_t>(i)];
    if (s < 1) throw ConfigError("population: household_size must be >= 1");
    if (mode_ == Mode::person && s != 1)
      throw ConfigError("population: person mode requires household_size 1");
    if (yi < 0) throw ConfigError("population: negative case value");
    if (mode_ == Mode::person && yi > 1)
      throw ConfigError("population: person mode requires y in {0,1}");
    if (mode_ == Mode::household && yi != 0 && yi != s)
      throw ConfigError("population: household mode requires y in {0, household_size}");
  }

  // degree counting + CSR
  std::vector<std::int64_t> deg(static_cast<std::size_t>(n), 0);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw ConfigError("population: edge endpoint out of range");
    if (a == b) throw ConfigError("population: self-loop edge");
    ++deg[static_cast<std::size_t>(a)];
    ++deg[static_cast<std::size_t>(b)];
  }
  adj_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (std::int64_t i = 0; i < n; ++i)
    adj_offsets_[static_cast<std::size_t>(i) + 1] = adj_offsets_[static_cast<std::size_t>(i)] + deg[static_cast<std::size_t>(i)];
  adj_.resize(static_cast<std::size_t>(adj_offsets_.back()));
  std::vector<std::int64_t> cursor(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (const auto& [a, b] : edges) {
    adj_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(a)]++)] = b;
    adj_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(b)]++)] = a;
  }
  for (std::int64_t i = 0; i < n; ++i) {
    auto b = adj_.begin() + adj_offsets_[static_cast<std::size_t>(i)];
    auto e = adj_.begin() + adj_offsets_[static_cast<std::size_t>(i) + 1];
    std::sort(b, e);
    if (std::adjacent_find(b, e) != e) throw ConfigError("population: duplicate edge");
  }

  // networks = connected components over case units restricted to case-case edges
  network_of_.assign(static_cast<std::size_t>(n), -1);
  std::vector<UnitId> stack;
  for (UnitId i = 0; i < n; ++i) {
    if (y_[static_cast<std::size_t>(i)] <= 0 || network_of_[static_cast<std::size_t>(i)] >= 0) continue;
    const int id = static_cast<int>(networks_.size());
    CaseNetwork net;
    net.id = id;
    stack.assign(1, i);
    network_of_[static_cast<std::size_t>(i)] = id;
    while (!stack.empty()) {
      const UnitId u = stack.back();
      stack.pop_back();
      net.members.push_back(u);
      net.y_total += y_[static_cast<std::size_t>(u)];
      for (UnitId v : neighbors(u)) {
        if (y_[static_cast<std::size_t>(v)] > 0 && network_of_[static_cast<std::size_t>(v)] < 0) {
          network_of_[static_cast<std::size_t>(v)] = id;
          stack.push_back(v);
        }
      }
    }
    std::sort(net.members.begin(), net.members.end());
    networks_.push_back(std::move(net));
  }

  theta_units_ = 0;
  y_total_ = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    if (y_[static_cast<std::size_t>(i)] > 0) ++theta_units_;
    y_total_ += y_[static_cast<std::size_t>(i)];
  }
}

std::vector<std::pair<UnitId, UnitId>> PopulationGraph::edge_list() const {
  std::vector<std::pair<UnitId, UnitId>> out;
  const std::int64_t n = n_units();
  for (UnitId i = 0; i < n; ++i)
    for (UnitId j : neighbors(i))
      if (i < j) out.emplace_back(i, j);
  return out;
}

namespace {

PopulationGraph build_networked(Mode mode, std::int64_t n_units, std::int64_t theta, int k,
                                const std::vector<double>* size_dist, std::uint64_t seed,
                                const NetworkOptions& opts) {
  if (n_units <= 0) throw ConfigError("builder: N must be positive");
  if (theta < 0 || theta > n_units) throw ConfigError("builder: theta must lie in [0, N]");
  if (k <= 0) throw ConfigError("builder: k must be positive");
  if (theta % k != 0) throw ConfigError("builder: k does not divide theta");
  if (opts.edge_nodes_per_network < 0) throw ConfigError("builder: negative edge node count");
  const std::int64_t n_networks = theta / k;
  const std::int64_t picked = theta + n_networks * opts.edge_nodes_per_network;
  if (picked > n_units) throw ConfigError("builder: not enough units for networks plus edge nodes");

  RngStream rng(seed);
  SubsetSampler sampler(n_units);
  std::vector<UnitId> chosen;
  sampler.draw(picked, rng, chosen);

  std::vector<int> y(static_cast<std::size_t>(n_units), 0);
  std::vector<int> hsize(static_cast<std::size_t>(n_units), 1);
  if (size_dist) {
    double total = 0;
    for (double p : *size_dist) {
      if (p < 0) throw ConfigError("builder: size_dist entries must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("builder: size_dist must sum to 1");
    AliasTable alias(*size_dist);
    for (std::int64_t i = 0; i < n_units; ++i)
      hsize[static_cast<std::size_t>(i)] = static_cast<int>(alias.sample(rng)) + 1;
  }

  std::vector<std::pair<UnitId, UnitId>> edges;
  std::vector<UnitId> members(static_cast<std::size_t>(k));
  std::int64_t pos = theta;  // edge nodes follow the case block in `chosen`
  for (std::int64_t g = 0; g < n_networks; ++g) {
    for (int j = 0; j < k; ++j) members[static_cast<std::size_t>(j)] = chosen[static_cast<std::size_t>(g * k + j)];
    for (UnitId u : members) y[static_cast<std::size_t>(u)] = size_dist ? hsize[static_cast<std::size_t>(u)] : 1;
    add_topology_edges(edges, members, opts.topology);
    for (int e = 0; e < opts.edge_nodes_per_network; ++e) {
      const UnitId node = chosen[static_cast<std::size_t>(pos++)];
      const UnitId attach = members[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(k)))];
      edges.emplace_back(node, attach);
    }
  }
  return PopulationGraph(mode, std::move(y), std::move(hsize), edges);
}

}  // namespace

PopulationGraph build_equal_network_population(std::int64_t n_units, std::int64_t theta, int k,
                                               std::uint64_t seed, const NetworkOptions& opts) {
  return build_networked(Mode::person, n_units, theta, k, nullptr, seed, opts);
}

PopulationGraph build_household_population(std::int64_t n_units, std::int64_t theta, int k,
                                           const std::vector<double>& size_dist, std::uint64_t seed,
                                           const NetworkOptions& opts) {
  if (size_dist.empty()) throw ConfigError("builder: empty size_dist");
  return build_networked(Mode::household, n_units, theta, k, &size_dist, seed, opts);
}

std::string population_to_json(const PopulationGraph& pop) {
  json units = json::array();
  for (UnitId i = 0; i < pop.n_units(); ++i)
    units.push_back({{"id", i}, {"y", pop.y(i)}, {"size", pop.household_size(i)}});
  json edges = json::array();
  for (const auto& [a, b] : pop.edge_list()) edges.push_back({a, b});
  json nets = json::array();
  for (const auto& net : pop.networks()) nets.push_back(net.members);
  json doc{{"mode", pop.mode() == Mode::person ? "person" : "household"},
           {"N", pop.n_units()},
           {"units", std::move(units)},
           {"edges", std::move(edges)},
           {"networks", std::move(nets)}};
  return doc.dump();
}

PopulationGraph population_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("population json: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("population json: document must be an object");
  for (const auto& [key, _] : doc.items())
    if (key != "mode" && key != "N" && key != "units" && key != "edges" && key != "networks")
      throw ConfigError("population json: unknown key '" + key + "'");
  const std::string mode_s = doc.at("mode").get<std::string>();
  if (mode_s != "person" && mode_s != "household")
    throw ConfigError("population json: mode must be 'person' or 'household'");
  const Mode mode = mode_s == "person" ? Mode::person : Mode::household;
  const std::int64_t n = doc.at("N").get<std::int64_t>();
  if (n <= 0) throw ConfigError("population json: N must be positive");
  std::vector<int> y(static_cast<std::size_t>(n), -1);
  std::vector<int> hsize(static_cast<std::size_t>(n), 0);
  for (const auto& u : doc.at("units")) {
    const std::int64_t id = u.at("id").get<std::int64_t>();
    if (id < 0 || id >= n) throw ConfigError("population json: unit id out of range");
    if (y[static_cast<std::size_t>(id)] >= 0) throw ConfigError("population json: duplicate unit id");
    y[static_cast<std::size_t>(id)] = u.at("y").get<int>();
    hsize[static_cast<std::size_t>(id)] = u.at("size").get<int>();
  }
  for (std::int64_t i = 0; i < n; ++i)
    if (y[static_cast<std::size_t>(i)] < 0) throw ConfigError("population json: missing unit record");
  std::vector<std::pair<UnitId, UnitId>> edges;
  for (const auto& e : doc.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("population json: edge must be a pair");
    edges.emplace_back(e[0].get<UnitId>(), e[1].get<UnitId>());
  }
  PopulationGraph pop(mode, std::move(y), std::move(hsize), edges);
  // the stored partition must equal the derived one
  if (doc.contains("networks")) {
    std::vector<std::vector<UnitId>> declared;
    for (const auto& net : doc.at("networks")) declared.push_back(net.get<std::vector<UnitId>>());
    for (auto& d : declared) std::sort(d.begin(), d.end());
    std::sort(declared.begin(), declared.end());
    std::vector<std::vector<UnitId>> derived;
    for (const auto& net : pop.networks()) derived.push_back(net.members);
    std::sort(derived.begin(), derived.end());
    if (declared != derived)
      throw ConfigError("population json: declared networks do not match connected components");
  }
  return pop;
}

}  // namespace acstrace

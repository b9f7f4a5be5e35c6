#include <doctest.h>

#include <set>

#include <json.hpp>

#include "acstrace/population.hpp"
#include "acstrace/rng.hpp"

using namespace acstrace;

TEST_CASE("equal network builder produces the requested partition") {
  const auto pop = build_equal_network_population(100000, 1000, 100, 7);
  CHECK(pop.n_units() == 100000);
  CHECK(pop.theta_units() == 1000);
  CHECK(pop.y_total() == 1000);
  REQUIRE(pop.networks().size() == 10);
  for (const auto& net : pop.networks()) {
    CHECK(net.size() == 100);
    CHECK(net.y_total == 100);
  }
}

TEST_CASE("single network holding every case") {
  const auto pop = build_equal_network_population(6, 3, 3, 11);
  REQUIRE(pop.networks().size() == 1);
  CHECK(pop.networks()[0].size() == 3);
}

TEST_CASE("singleton networks carry no edges") {
  const auto pop = build_equal_network_population(6, 3, 1, 3);
  REQUIRE(pop.networks().size() == 3);
  for (UnitId i = 0; i < pop.n_units(); ++i) CHECK(pop.neighbors(i).empty());
}

TEST_CASE("builder rejects invalid configurations") {
  CHECK_THROWS_AS(build_equal_network_population(100, 9, 2, 1), ConfigError);
  CHECK_THROWS_AS(build_equal_network_population(8, 10, 2, 1), ConfigError);
  CHECK_THROWS_AS(build_household_population(100, 10, 2, {0.5, 0.6}, 1), ConfigError);
}

TEST_CASE("topologies stay within their network") {
  for (auto topo : {NetworkTopology::star, NetworkTopology::path, NetworkTopology::complete}) {
    NetworkOptions opts;
    opts.topology = topo;
    const auto pop = build_equal_network_population(40, 12, 4, 99, opts);
    REQUIRE(pop.networks().size() == 3);
    for (const auto& net : pop.networks()) {
      CHECK(net.size() == 4);
      for (UnitId u : net.members)
        for (UnitId v : pop.neighbors(u)) CHECK(pop.network_of(v) == net.id);
    }
  }
}

TEST_CASE("edge nodes attach to exactly one network and stay noncase") {
  NetworkOptions opts;
  opts.edge_nodes_per_network = 2;
  const auto pop = build_equal_network_population(60, 9, 3, 5, opts);
  int edge_nodes = 0;
  for (UnitId i = 0; i < pop.n_units(); ++i) {
    if (pop.is_case(i)) continue;
    std::set<int> nets;
    for (UnitId v : pop.neighbors(i))
      if (pop.is_case(v)) nets.insert(pop.network_of(v));
    if (!nets.empty()) {
      ++edge_nodes;
      CHECK(nets.size() == 1);
    }
  }
  CHECK(edge_nodes == 6);
}

TEST_CASE("household builder sizes and case rule") {
  const std::vector<double> dist{0.38, 0.30, 0.12, 0.20};
  const auto pop = build_household_population(5000, 100, 10, dist, 17);
  CHECK(pop.mode() == Mode::household);
  CHECK(pop.theta_units() == 100);
  for (UnitId i = 0; i < pop.n_units(); ++i) {
    CHECK(pop.household_size(i) >= 1);
    CHECK(pop.household_size(i) <= 4);
    if (pop.is_case(i)) CHECK(pop.y(i) == pop.household_size(i));
  }
  // person-case total = sum of case household sizes
  std::int64_t total = 0;
  for (const auto& net : pop.networks()) total += net.y_total;
  CHECK(total == pop.y_total());
}

TEST_CASE("household person-case expectation tracks the size distribution") {
  // E[sum y] = theta * (0.38 + 0.60 + 0.36 + 0.80) = 2.14 * theta
  const std::vector<double> dist{0.38, 0.30, 0.12, 0.20};
  double total = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s)
    total += static_cast<double>(build_household_population(2000, 1000, 10, dist, 1000 + s).y_total());
  const double mean = total / seeds;
  CHECK(mean == doctest::Approx(2140.0).epsilon(0.01));
}

TEST_CASE("degenerate size distribution reduces to person-like values") {
  const auto pop = build_household_population(50, 10, 2, {1.0, 0.0, 0.0, 0.0}, 23);
  for (UnitId i = 0; i < pop.n_units(); ++i) CHECK(pop.household_size(i) == 1);
  CHECK(pop.y_total() == 10);
}

TEST_CASE("forced household sizes") {
  const auto pop = build_household_population(10, 2, 2, {0.0, 1.0, 0.0, 0.0}, 41);
  REQUIRE(pop.networks().size() == 1);
  CHECK(pop.networks()[0].y_total == 4);
}

TEST_CASE("network partition equals connected components of case units") {
  // direct construction with a path network and separate singleton
  std::vector<int> y{1, 1, 1, 0, 1, 0};
  std::vector<int> h(6, 1);
  std::vector<std::pair<UnitId, UnitId>> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  const PopulationGraph pop(Mode::person, y, h, edges);
  REQUIRE(pop.networks().size() == 2);
  CHECK(pop.networks()[0].members == std::vector<UnitId>{0, 1, 2});
  CHECK(pop.networks()[1].members == std::vector<UnitId>{4});
  CHECK(pop.network_of(3) == -1);
}

TEST_CASE("population graph invariant violations throw") {
  std::vector<int> h(4, 1);
  CHECK_THROWS_AS(PopulationGraph(Mode::person, {0, 1, 0, 2}, h, {}), ConfigError);
  CHECK_THROWS_AS(PopulationGraph(Mode::person, {0, 1, 0, 1}, h, {{0, 0}}), ConfigError);
  CHECK_THROWS_AS(PopulationGraph(Mode::person, {0, 1, 0, 1}, h, {{0, 1}, {1, 0}}), ConfigError);
  CHECK_THROWS_AS(PopulationGraph(Mode::household, {0, 2, 0, 0}, {1, 3, 1, 1}, {}), ConfigError);
}

TEST_CASE("json snapshot round-trips byte-identically") {
  NetworkOptions opts;
  opts.edge_nodes_per_network = 1;
  const auto pop = build_equal_network_population(40, 8, 4, 9, opts);
  const std::string text = population_to_json(pop);
  const auto back = population_from_json(text);
  CHECK(back == pop);
  CHECK(population_to_json(back) == text);
}

TEST_CASE("json import rejects inconsistent network partitions") {
  const auto pop = build_equal_network_population(12, 4, 2, 9);
  auto doc = nlohmann::json::parse(population_to_json(pop));
  REQUIRE(doc.at("networks").size() == 2);
  // merge the two declared networks into one: no longer a connected component
  nlohmann::json merged = nlohmann::json::array();
  for (const auto& net : doc.at("networks"))
    for (const auto& id : net) merged.push_back(id);
  doc["networks"] = nlohmann::json::array({merged});
  CHECK_THROWS_AS(population_from_json(doc.dump()), ConfigError);
}

TEST_CASE("builder is deterministic in the seed") {
  const auto a = build_equal_network_population(500, 40, 4, 77);
  const auto b = build_equal_network_population(500, 40, 4, 77);
  CHECK(a == b);
  const auto c = build_equal_network_population(500, 40, 4, 78);
  CHECK(population_to_json(a) != population_to_json(c));
}

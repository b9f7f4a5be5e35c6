#include <doctest.h>

#include <algorithm>

#include <json.hpp>

#include "acstrace/design.hpp"
#include "acstrace/population.hpp"

using namespace acstrace;

namespace {

// Population mirroring the illustrative network figure as the spec reads it:
// a 3-case path network B-C-G with four attached edge nodes, one singleton
// case network J, and two outer noncases hanging off edge nodes.
//   ids: 0=A(edge) 1=B(case) 2=C(case) 3=G(case) 4=F(edge) 5=D(edge)
//        6=H(edge) 7=E(other) 8=I(other) 9=J(case, singleton)
PopulationGraph figure_population() {
  std::vector<int> y{0, 1, 1, 1, 0, 0, 0, 0, 0, 1};
  std::vector<int> h(10, 1);
  std::vector<std::pair<UnitId, UnitId>> edges{
      {0, 1},          // A-B
      {1, 2}, {2, 3},  // the case path B-C-G
      {4, 1}, {4, 2}, {4, 3},  // F touches all three cases
      {5, 2},          // D-C
      {6, 3},          // H-G
      {7, 5},          // E-D
      {8, 6},          // I-H
  };
  return PopulationGraph(Mode::person, y, h, edges);
}

int count_tag(const TraceSample& ts, SampleTag tag) {
  int n = 0;
  for (auto t : ts.tags) n += t == tag ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("figure population: tracing one star of the 3-network observes it fully") {
  const auto pop = figure_population();
  REQUIRE(pop.networks().size() == 2);
  for (UnitId start : {1, 2, 3}) {
    const auto ts = trace(pop, {start}, TracingDesign::acs());
    CHECK(count_tag(ts, SampleTag::network_case) == 3);
    CHECK(count_tag(ts, SampleTag::edge_unit) == 4);
    CHECK(count_tag(ts, SampleTag::other_initial) == 0);
    CHECK(ts.final_units == std::vector<UnitId>{0, 1, 2, 3, 4, 5, 6});
    CHECK(ts.waves.back().empty());
  }
}

TEST_CASE("noncase-only initial sample triggers no tracing") {
  const auto pop = figure_population();
  const auto ts = trace(pop, {0, 7}, TracingDesign::acs());
  CHECK(ts.final_units == std::vector<UnitId>{0, 7});
  CHECK(count_tag(ts, SampleTag::other_initial) == 2);
  CHECK(ts.n() == 2);
}

TEST_CASE("empty initial sample yields an empty final sample") {
  const auto pop = figure_population();
  const auto ts = trace(pop, {}, TracingDesign::acs());
  CHECK(ts.final_units.empty());
  CHECK(ts.n() == 0);
}

TEST_CASE("full-network s0 with no edge nodes tags everything network_case") {
  const auto pop = build_equal_network_population(20, 4, 4, 3);
  const auto& members = pop.networks()[0].members;
  const auto ts = trace(pop, members, TracingDesign::acs());
  CHECK(count_tag(ts, SampleTag::network_case) == 4);
  CHECK(count_tag(ts, SampleTag::edge_unit) == 0);
}

TEST_CASE("qASBS truncates: leaf hit on a star with q=1 sees only leaf and hub") {
  // star of size 5: hub h, leaves l1..l4
  std::vector<int> y{1, 1, 1, 1, 1, 0};
  std::vector<int> h(6, 1);
  std::vector<std::pair<UnitId, UnitId>> edges{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  const PopulationGraph pop(Mode::person, y, h, edges);
  const auto ts = trace(pop, {1}, TracingDesign::qasbs(1));
  CHECK(ts.final_units == std::vector<UnitId>{0, 1});
  CHECK(ts.network_exhaustive == false);
  // hub and leaf are flagged as partially observed network members
  for (std::size_t i = 0; i < ts.final_units.size(); ++i) CHECK(ts.network_fully_observed[i] == 0);
  // q=2 exhausts the star from any leaf
  const auto ts2 = trace(pop, {1}, TracingDesign::qasbs(2));
  CHECK(ts2.final_units == std::vector<UnitId>{0, 1, 2, 3, 4});
  for (std::size_t i = 0; i < ts2.final_units.size(); ++i) CHECK(ts2.network_fully_observed[i] == 1);
}

TEST_CASE("qASBS monotonicity in q and against ACS") {
  const auto pop = figure_population();
  const std::vector<UnitId> s0{1, 8};
  std::vector<UnitId> prev;
  for (int q = 0; q <= 4; ++q) {
    const auto ts = trace(pop, s0, TracingDesign::qasbs(q));
    CHECK(std::includes(ts.final_units.begin(), ts.final_units.end(), prev.begin(), prev.end()));
    prev = ts.final_units;
  }
  const auto acs = trace(pop, s0, TracingDesign::acs());
  CHECK(std::includes(acs.final_units.begin(), acs.final_units.end(), prev.begin(), prev.end()));
  CHECK(acs.final_units == prev);  // q=4 exhausts this population
}

TEST_CASE("ACS idempotence: re-tracing the sampled cases adds nothing") {
  const auto pop = figure_population();
  const auto ts = trace(pop, {2, 9}, TracingDesign::acs());
  std::vector<UnitId> cases;
  for (std::size_t i = 0; i < ts.final_units.size(); ++i)
    if (ts.tags[i] == SampleTag::network_case) cases.push_back(ts.final_units[i]);
  const auto again = trace(pop, cases, TracingDesign::acs());
  for (UnitId u : again.final_units) CHECK(ts.contains(u));
}

TEST_CASE("network exhaustiveness under ACS") {
  const auto pop = build_equal_network_population(60, 12, 3, 21);
  const auto ts = trace(pop, {pop.networks()[1].members[0], 2}, TracingDesign::acs());
  for (std::size_t i = 0; i < ts.final_units.size(); ++i) {
    if (ts.tags[i] != SampleTag::network_case) continue;
    const auto& net = pop.networks()[static_cast<std::size_t>(pop.network_of(ts.final_units[i]))];
    for (UnitId v : net.members) CHECK(ts.contains(v));
    CHECK(ts.network_fully_observed[i] == 1);
  }
}

TEST_CASE("DACS thresholds") {
  const auto pop = figure_population();
  EdgeStrengths strengths;
  for (const auto& [a, b] : pop.edge_list()) strengths.set(a, b, 0.5);
  // threshold below every strength: identical to ACS
  auto low = trace(pop, {1}, TracingDesign::dacs(0.1, strengths));
  auto acs = trace(pop, {1}, TracingDesign::acs());
  CHECK(low.final_units == acs.final_units);
  // threshold at/above every strength: no expansion at all
  auto high = trace(pop, {1}, TracingDesign::dacs(0.5, strengths));
  CHECK(high.final_units == std::vector<UnitId>{1});
  // selective: cut the C-G link, keep the rest
  strengths.set(2, 3, 0.05);
  auto cut = trace(pop, {1}, TracingDesign::dacs(0.1, strengths));
  CHECK(!cut.contains(3));
  CHECK(cut.contains(2));
}

TEST_CASE("trace rejects out-of-range ids and DACS without strengths") {
  const auto pop = figure_population();
  CHECK_THROWS_AS(trace(pop, {42}, TracingDesign::acs()), ConfigError);
  TracingDesign d;
  d.kind = TracingDesign::Kind::dacs;
  CHECK_THROWS_AS(trace(pop, {1}, d), ConfigError);
}

TEST_CASE("classification of an all-noncase sample") {
  const auto pop = figure_population();
  const auto ts = trace(pop, {7, 8}, TracingDesign::acs());
  for (auto t : ts.tags) CHECK(t == SampleTag::other_initial);
}

TEST_CASE("draw_initial SRS: exact size, case count near expectation") {
  const auto pop = build_equal_network_population(2000, 100, 10, 3);
  const InitialDesign d = InitialDesign::srs(200);
  double cases = 0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(derive_seed(5, 0, static_cast<std::uint64_t>(r)));
    const auto s0 = draw_initial(d, pop, rng);
    REQUIRE(static_cast<std::int64_t>(s0.size()) == d.m);
    for (UnitId u : s0) cases += pop.is_case(u) ? 1 : 0;
  }
  // E = m * theta / N = 10
  CHECK(cases / reps == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("draw_initial Poisson: case odds eta and expected size") {
  const auto pop = build_equal_network_population(2000, 100, 10, 3);
  const InitialDesign d = InitialDesign::poisson(200, 2.0);
  const auto pp = poisson_probs(d, pop.n_units(), pop.theta_units());
  CHECK(pp.p_case == doctest::Approx(2.0 * pp.p_non));
  CHECK(pp.p_non == doctest::Approx(200.0 / 2100.0));
  double total = 0, cases = 0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(derive_seed(6, 0, static_cast<std::uint64_t>(r)));
    const auto s0 = draw_initial(d, pop, rng);
    total += static_cast<double>(s0.size());
    for (UnitId u : s0) cases += pop.is_case(u) ? 1 : 0;
  }
  CHECK(total / reps == doctest::Approx(200.0).epsilon(0.02));
  CHECK(cases / reps == doctest::Approx(100.0 * pp.p_case).epsilon(0.05));
}

TEST_CASE("poisson with eta=1 collapses to equal probabilities") {
  const auto pop = build_equal_network_population(100, 10, 2, 3);
  const auto pp = poisson_probs(InitialDesign::poisson(10, 1.0), pop.n_units(), pop.theta_units());
  CHECK(pp.p_case == doctest::Approx(0.1));
  CHECK(pp.p_non == doctest::Approx(0.1));
}

TEST_CASE("trace sample exports json with tags") {
  const auto pop = figure_population();
  const auto ts = trace(pop, {1}, TracingDesign::acs());
  const auto doc = nlohmann::json::parse(trace_sample_to_json(ts));
  CHECK(doc.at("s0").size() == 1);
  CHECK(doc.at("final").size() == 7);
  int edge = 0;
  for (const auto& t : doc.at("tags"))
    if (t.at("tag") == "edge_unit") ++edge;
  CHECK(edge == 4);
}

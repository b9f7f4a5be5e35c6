#include <doctest.h>

#include <cmath>

#include "acstrace/inclusion.hpp"
#include "acstrace/oracle.hpp"

using namespace acstrace;

namespace {

// N=6 with networks {1,2} and {3}; units 0, 4, 5 noncase.
PopulationGraph six_unit_population() {
  std::vector<int> y{0, 1, 1, 1, 0, 0};
  std::vector<int> h(6, 1);
  std::vector<std::pair<UnitId, UnitId>> edges{{1, 2}};
  return PopulationGraph(Mode::person, y, h, edges);
}

}  // namespace

TEST_CASE("srs exclusion: C(4,2)/C(6,2) = 0.4") {
  const auto pop = six_unit_population();
  const InitialDesign d = InitialDesign::srs(2);
  const std::vector<UnitId> b{1, 2};
  CHECK(exclusion_prob<double>(d, pop, b) == doctest::Approx(6.0 / 15.0));
  CHECK(exclusion_prob<Rational>(d, pop, b) == Rational(6, 15));
}

TEST_CASE("empty set is excluded with probability one; census excludes nothing") {
  const auto pop = six_unit_population();
  CHECK(exclusion_prob<double>(InitialDesign::srs(2), pop, {}) == 1.0);
  const std::vector<UnitId> b{1};
  CHECK(exclusion_prob<double>(InitialDesign::srs(6), pop, b) == 0.0);
  // |B| > N - m forces inclusion
  const std::vector<UnitId> big{0, 1, 2, 3, 4};
  CHECK(exclusion_prob<double>(InitialDesign::srs(2), pop, big) == 0.0);
}

TEST_CASE("duplicate ids in B are collapsed") {
  const auto pop = six_unit_population();
  const std::vector<UnitId> b{1, 1, 2, 2};
  CHECK(exclusion_prob<Rational>(InitialDesign::srs(2), pop, b) == Rational(6, 15));
}

TEST_CASE("network inclusion at the simulation scale") {
  // N=1e5, m=1000, k=100: 1 - prod_{j<100} (99000-j)/(100000-j), about 0.632
  const auto pop = build_equal_network_population(100000, 1000, 100, 3);
  const double pi = network_inclusion<double>(InitialDesign::srs(1000), pop, pop.networks()[0]);
  double expect = 1.0;
  for (int j = 0; j < 100; ++j) expect *= (99000.0 - j) / (100000.0 - j);
  expect = 1.0 - expect;
  CHECK(pi == doctest::Approx(expect).epsilon(1e-12));
  CHECK(pi == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(0.02));
}

TEST_CASE("poisson network inclusion: 1-(1-p_case)^k") {
  const auto pop = build_equal_network_population(100000, 1000, 100, 3);
  const InitialDesign d = InitialDesign::poisson(1000, 2.0);
  const auto pp = poisson_probs(d, pop.n_units(), pop.theta_units());
  CHECK(pp.p_non == doctest::Approx(1000.0 / 101000.0));
  const double pi = network_inclusion<double>(d, pop, pop.networks()[0]);
  CHECK(pi == doctest::Approx(1.0 - std::pow(1.0 - pp.p_case, 100)).epsilon(1e-12));
  CHECK(pi == doctest::Approx(0.8647).epsilon(1e-3));
}

TEST_CASE("singleton network inclusion reduces to m/N") {
  const auto pop = six_unit_population();
  CHECK(network_inclusion<Rational>(InitialDesign::srs(2), pop, pop.networks()[1]) == Rational(2, 6));
}

TEST_CASE("joint network inclusion by inclusion-exclusion") {
  const auto pop = six_unit_population();
  const InitialDesign d = InitialDesign::srs(2);
  const auto& nets = pop.networks();
  // 1 - 6/15 - 10/15 + 3/15 = 2/15
  CHECK(network_joint_inclusion<Rational>(d, pop, nets[0].members, nets[1].members) == Rational(2, 15));
  // kappa = ell degenerates to the first-order probability
  CHECK(network_joint_inclusion<Rational>(d, pop, nets[0].members, nets[0].members) ==
        network_inclusion<Rational>(d, pop, nets[0]));
}

TEST_CASE("poisson joint factorizes for disjoint networks") {
  const auto pop = build_equal_network_population(1000, 20, 5, 7);
  const InitialDesign d = InitialDesign::poisson(100, 2.0);
  const auto& nets = pop.networks();
  const double joint = network_joint_inclusion<double>(d, pop, nets[0].members, nets[1].members);
  const double pa = network_inclusion<double>(d, pop, nets[0]);
  const double pb = network_inclusion<double>(d, pop, nets[1]);
  CHECK(std::abs(joint - pa * pb) < 1e-12);
}

TEST_CASE("iacs joint inclusion: noncase pair equals m(m-1)/(N(N-1))") {
  const auto pop = six_unit_population();
  const InitialDesign d = InitialDesign::srs(2);
  CHECK(iacs_joint_inclusion<Rational>(d, pop, 4, 5) == Rational(2 * 1, 6 * 5));
  CHECK_THROWS_AS(iacs_joint_inclusion<Rational>(d, pop, 4, 4), ConfigError);
}

TEST_CASE("iacs joint inclusion: mixed pair matches enumeration") {
  const auto pop = six_unit_population();
  const InitialDesign d = InitialDesign::srs(2);
  // i=0 noncase, j=1 in the 2-case network: pi_i + pi_(j) + ex({i} u beta) - 1
  const std::vector<UnitId> u{0, 1, 2};
  CHECK(exclusion_prob<Rational>(d, pop, u) == Rational(3, 15));
  const Rational want = Rational(2, 6) + Rational(9, 15) + Rational(3, 15) - Rational(1);
  CHECK(iacs_joint_inclusion<Rational>(d, pop, 0, 1) == want);
  // both cases in the same network: equals the network inclusion probability
  CHECK(iacs_joint_inclusion<Rational>(d, pop, 1, 2) ==
        network_inclusion<Rational>(d, pop, pop.networks()[0]));
}

TEST_CASE("pi_(i) exceeds pi_i exactly when the network has company") {
  const auto pop = six_unit_population();
  const InitialDesign d = InitialDesign::srs(2);
  const auto incl = build_inclusion_table<Rational>(d, pop, false);
  // two-case network: strict improvement
  CHECK(incl.network_first[0] > incl.unit_initial[1]);
  // singleton: equality
  CHECK(incl.network_first[1] == incl.unit_initial[3]);
}

TEST_CASE("inclusion table equals enumeration frequencies on a toy") {
  const auto pop = oracle::random_toy_population(99);
  const InitialDesign d = InitialDesign::srs(3);
  const auto incl = build_inclusion_table<Rational>(d, pop, true);
  const auto en = oracle::enumerate_cross(pop, d);
  for (std::size_t a = 0; a < incl.n_networks(); ++a) {
    CHECK(en.net_hit[a] == incl.network_first[a]);
    for (std::size_t b = 0; b < incl.n_networks(); ++b)
      CHECK(en.net_joint[a * incl.n_networks() + b] == incl.joint(a, b));
  }
}

TEST_CASE("joint inclusion bounds") {
  const auto pop = oracle::random_toy_population(1234);
  const InitialDesign d = InitialDesign::srs(4);
  const auto incl = build_inclusion_table<double>(d, pop, true);
  for (std::size_t a = 0; a < incl.n_networks(); ++a)
    for (std::size_t b = 0; b < incl.n_networks(); ++b) {
      const double pab = incl.joint(a, b);
      const double pa = incl.network_first[a];
      const double pb = incl.network_first[b];
      CHECK(pab <= std::min(pa, pb) + 1e-12);
      CHECK(pab >= std::max(0.0, pa + pb - 1.0) - 1e-12);
    }
}

TEST_CASE("poisson approximates srs for low sampling fractions") {
  // |pi_srs - pi_poisson(eta=1)| / pi_srs <= 2% for k <= 100, f <= 0.1
  for (int k : {2, 10, 100}) {
    const auto pop = build_equal_network_population(100000, 1000, k, 5);
    for (std::int64_t m : {1000, 5000, 10000}) {
      const double srs = network_inclusion<double>(InitialDesign::srs(m), pop, pop.networks()[0]);
      const double poisson =
          network_inclusion<double>(InitialDesign::poisson(m, 1.0), pop, pop.networks()[0]);
      CHECK(std::abs(srs - poisson) / srs <= 0.02);
    }
  }
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "acstrace/config.hpp"
#include "acstrace/mc.hpp"

using namespace acstrace;

namespace {

Scenario small_cross(std::int64_t replicates = 20000) {
  Scenario sc;
  sc.id = "cross-small";
  sc.population.kind = PopKind::person_equal;
  sc.population.n_units = 5000;
  sc.population.theta = 100;
  sc.population.k = 10;
  sc.initial = InitialDesign::srs(250);
  sc.temporal = TemporalDesign::cross_sectional;
  sc.replicates = replicates;
  sc.seed = 7;
  return sc;
}

Scenario small_change(TemporalDesign temporal, std::int64_t replicates = 20000) {
  Scenario sc;
  sc.id = "change-small";
  sc.population.kind = PopKind::dynamics;
  sc.population.n_units = 5000;
  DynamicsSetting s;
  s.label = "toy";
  s.t1 = {20, 5};
  s.growing = {4, 10};
  s.shrinking = NetworkCell{16, 3};
  s.emerging = {2, 6};
  sc.population.setting = s;
  sc.population.theta = s.theta1();
  sc.population.k = s.t1.size;
  sc.initial = InitialDesign::srs(250);
  sc.tracing = TracingDesign::acs();
  sc.temporal = temporal;
  sc.replicates = replicates;
  sc.seed = 11;
  return sc;
}

}  // namespace

TEST_CASE("determinism: summaries are identical across thread counts") {
  const Scenario sc = small_cross(4000);
  const auto a = run_scenario(sc, 1);
  const auto b = run_scenario(sc, 3);
  const auto c = run_scenario(sc, 1);
  CHECK(a.mean_n == b.mean_n);
  CHECK(*a.cv_mc == *b.cv_mc);
  CHECK(*a.re_mc == *b.re_mc);
  CHECK(a.mean_estimate == b.mean_estimate);
  CHECK(a.mean_n == c.mean_n);
  CHECK(*a.cv_mc == *c.cv_mc);
}

TEST_CASE("fast and reference engines agree statistically") {
  Scenario sc = small_cross(20000);
  const auto fast = run_scenario(sc, 0, Engine::fast);
  sc.replicates = 4000;  // reference engine is slower
  const auto ref = run_scenario(sc, 0, Engine::reference);
  // unbiased mean in both engines
  CHECK(fast.mean_estimate == doctest::Approx(100.0).epsilon(0.02));
  CHECK(ref.mean_estimate == doctest::Approx(100.0).epsilon(0.04));
  // both track the analytic CV
  REQUIRE(fast.cv_analytic.has_value());
  CHECK(*fast.cv_mc == doctest::Approx(*fast.cv_analytic).epsilon(0.05));
  CHECK(*ref.cv_mc == doctest::Approx(*fast.cv_analytic).epsilon(0.10));
  CHECK(fast.mean_n == doctest::Approx(ref.mean_n).epsilon(0.01));
}

TEST_CASE("monte carlo tracks analytic values for cross-sectional scenarios") {
  const auto out = run_scenario(small_cross(40000));
  REQUIRE(out.cv_analytic.has_value());
  REQUIRE(out.en_analytic.has_value());
  CHECK(*out.cv_mc == doctest::Approx(*out.cv_analytic).epsilon(0.03));
  CHECK(out.mean_n == doctest::Approx(*out.en_analytic).epsilon(0.005));
  CHECK(*out.re_mc == doctest::Approx(*out.re_analytic).epsilon(0.08));
  CHECK(out.mean_estimate == doctest::Approx(out.estimand).epsilon(0.02));
}

TEST_CASE("expected sample size closed forms match the paper's E(n) column") {
  const auto pop10 = build_equal_network_population(100000, 1000, 10, 3);
  CHECK(expected_sample_size_analytic(pop10, InitialDesign::srs(1000)) ==
        doctest::Approx(1085.6).epsilon(0.001));
  CHECK(expected_sample_size_analytic(pop10, InitialDesign::srs(10000)) ==
        doctest::Approx(10551.0).epsilon(0.001));
  const auto pop2 = build_equal_network_population(100000, 1000, 2, 3);
  CHECK(expected_sample_size_analytic(pop2, InitialDesign::srs(1000)) ==
        doctest::Approx(1010.0).epsilon(0.001));
  const auto pop100 = build_equal_network_population(100000, 1000, 100, 3);
  CHECK(expected_sample_size_analytic(pop100, InitialDesign::poisson(1000, 2.0)) ==
        doctest::Approx(1844.9).epsilon(0.001));
  // census
  const auto toy = build_equal_network_population(50, 10, 2, 3);
  CHECK(expected_sample_size_analytic(toy, InitialDesign::srs(50)) == doctest::Approx(50.0));
}

TEST_CASE("household scenario reproduces unconditional analytics") {
  Scenario sc;
  sc.id = "household-small";
  sc.population.kind = PopKind::household;
  sc.population.n_units = 20000;
  sc.population.theta = 200;
  sc.population.k = 10;
  sc.population.size_dist = {0.38, 0.30, 0.12, 0.20};
  sc.initial = InitialDesign::srs(1000);
  sc.replicates = 30000;
  sc.seed = 3;
  const auto out = run_scenario(sc);
  CHECK(out.estimand == doctest::Approx(428.0));  // 200 * 2.14
  CHECK(*out.cv_mc == doctest::Approx(*out.cv_analytic).epsilon(0.03));
  CHECK(*out.baseline_cv_mc == doctest::Approx(*out.baseline_cv_analytic).epsilon(0.03));
}

TEST_CASE("frozen household population uses conditional analytics") {
  Scenario sc;
  sc.id = "household-frozen";
  sc.population.kind = PopKind::household;
  sc.population.n_units = 10000;
  sc.population.theta = 100;
  sc.population.k = 5;
  sc.population.size_dist = {0.5, 0.5};
  sc.initial = InitialDesign::srs(500);
  sc.replicates = 30000;
  sc.seed = 5;
  sc.freeze_population = true;
  const auto out = run_scenario(sc);
  CHECK(*out.cv_mc == doctest::Approx(*out.cv_analytic).epsilon(0.03));
}

TEST_CASE("change designs: unbiased around zero and matching panel analytics") {
  for (auto temporal : {TemporalDesign::panel, TemporalDesign::pacs, TemporalDesign::iacs}) {
    const auto out = run_scenario(small_change(temporal, 30000));
    REQUIRE(out.se_mc.has_value());
    REQUIRE(out.se_analytic.has_value());
    CHECK(out.mean_estimate == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(std::abs(out.mean_estimate) <= 4.0 * *out.se_mc / std::sqrt(30000.0));
    CHECK(*out.se_mc == doctest::Approx(*out.se_analytic).epsilon(0.05));
    if (temporal != TemporalDesign::panel) {
      REQUIRE(out.re_mc.has_value());
      REQUIRE(out.re_analytic.has_value());
      CHECK(*out.re_mc == doctest::Approx(*out.re_analytic).epsilon(0.10));
    }
  }
}

TEST_CASE("change design determinism across thread counts") {
  const auto a = run_scenario(small_change(TemporalDesign::iacs, 3000), 1);
  const auto b = run_scenario(small_change(TemporalDesign::iacs, 3000), 4);
  CHECK(*a.se_mc == *b.se_mc);
  CHECK(*a.re_mc == *b.re_mc);
  CHECK(a.mean_n == b.mean_n);
}

TEST_CASE("frozen transition matches the spec flag") {
  auto sc = small_change(TemporalDesign::pacs, 2000);
  sc.freeze_population = true;
  const auto out = run_scenario(sc);
  CHECK(out.se_mc.has_value());  // runs cleanly with one fixed transition
}

TEST_CASE("qasbs(0) scenario reports the initial-sample estimator") {
  Scenario sc = small_cross(20000);
  sc.tracing = TracingDesign::qasbs(0);
  const auto out = run_scenario(sc);
  CHECK(out.design_label == "initial");
  CHECK(out.mean_n == doctest::Approx(250.0));
  CHECK(*out.re_mc == 1.0);
  CHECK(*out.cv_mc == doctest::Approx(*out.cv_analytic).epsilon(0.05));
}

TEST_CASE("truncated tracing scenarios report sample sizes only") {
  Scenario sc = small_cross(500);
  sc.tracing = TracingDesign::qasbs(1);
  const auto out = run_scenario(sc);
  CHECK(out.design_label == "qasbs1");
  CHECK(!out.cv_mc.has_value());
  CHECK(out.mean_n > 250.0);
}

TEST_CASE("relative efficiency: identical scenarios and analytic ratios") {
  const Scenario sc = small_cross(2000);
  const auto self = relative_efficiency(sc, sc);
  REQUIRE(self.analytic.has_value());
  CHECK(*self.analytic == doctest::Approx(1.0));
  // ACS vs initial-sample baseline on the same population
  Scenario baseline = sc;
  baseline.id = "baseline";
  baseline.tracing = TracingDesign::qasbs(0);
  const auto re = relative_efficiency(sc, baseline);
  REQUIRE(re.analytic.has_value());
  CHECK(*re.analytic < 1.0);
  // k=1: ACS degenerates to initial sampling, RE = 1
  Scenario k1 = sc;
  k1.population.k = 1;
  Scenario k1base = baseline;
  k1base.population.k = 1;
  const auto re1 = relative_efficiency(k1, k1base);
  CHECK(*re1.analytic == doctest::Approx(1.0).epsilon(1e-9));
  // mismatched specs are rejected
  Scenario other = sc;
  other.population.theta = 200;
  CHECK_THROWS_AS(relative_efficiency(sc, other), ConfigError);
}

TEST_CASE("scenario validation rejects inconsistent combinations") {
  Scenario sc = small_cross();
  sc.population.kind = PopKind::dynamics;
  sc.population.setting = table3_setting("M3");
  sc.population.n_units = 100000;
  CHECK_THROWS_AS(sc.validate(), ConfigError);  // dynamics + cross-sectional
  Scenario ch = small_change(TemporalDesign::pacs);
  ch.tracing = TracingDesign::qasbs(1);
  CHECK_THROWS_AS(ch.validate(), ConfigError);  // change design needs ACS
  Scenario bad = small_cross();
  bad.replicates = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("zero-network replicates are counted, not errors") {
  Scenario sc;
  sc.id = "sparse";
  sc.population.kind = PopKind::person_equal;
  sc.population.n_units = 10000;
  sc.population.theta = 10;
  sc.population.k = 5;
  sc.initial = InitialDesign::srs(20);
  sc.replicates = 2000;
  sc.seed = 9;
  const auto out = run_scenario(sc);
  CHECK(out.zero_network_replicates > 0);
  CHECK(out.mean_estimate == doctest::Approx(10.0).epsilon(0.25));
}

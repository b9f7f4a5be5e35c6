#include "acstrace/presets.hpp"

namespace acstrace {

namespace {

constexpr std::uint64_t kDefaultSeed = 20250801;

Scenario cross_scenario(std::string id, PopulationSpec pop, InitialDesign initial,
                        std::int64_t replicates) {
  Scenario sc;
  sc.id = std::move(id);
  sc.population = std::move(pop);
  sc.initial = initial;
  sc.tracing = TracingDesign::acs();
  sc.temporal = TemporalDesign::cross_sectional;
  sc.replicates = replicates;
  sc.seed = kDefaultSeed;
  return sc;
}

struct Block {
  const char* name;
  InitialDesign initial;
};

}  // namespace

RunConfig table1_config() {
  RunConfig config;
  config.output.path = "table1.csv";
  PopulationSpec pop;
  pop.kind = PopKind::person_equal;
  pop.n_units = 100000;
  pop.theta = 1000;
  const int ks[] = {100, 10, 2};
  const std::int64_t srs_ms[] = {1000, 1630, 2420, 5000, 10000};
  const std::int64_t eta_ms[] = {1000, 5000, 10000};
  for (std::int64_t m : srs_ms)
    for (int k : ks) {
      pop.k = k;
      config.scenarios.push_back(cross_scenario(
          "t1-srs-m" + std::to_string(m) + "-k" + std::to_string(k), pop, InitialDesign::srs(m), 20000));
    }
  for (std::int64_t m : eta_ms)
    for (int k : ks) {
      pop.k = k;
      config.scenarios.push_back(cross_scenario("t1-eta2-m" + std::to_string(m) + "-k" + std::to_string(k),
                                                pop, InitialDesign::poisson(m, 2.0), 20000));
    }
  return config;
}

RunConfig table2_config() {
  RunConfig config;
  config.output.path = "table2.csv";
  PopulationSpec pop;
  pop.kind = PopKind::household;
  pop.n_units = 100000;
  pop.theta = 1000;
  pop.size_dist = {0.38, 0.30, 0.12, 0.20};
  const int ks[] = {100, 10, 2};
  const std::int64_t ms[] = {1000, 5000, 10000};
  for (std::int64_t m : ms)
    for (int k : ks) {
      pop.k = k;
      config.scenarios.push_back(cross_scenario(
          "t2-srs-m" + std::to_string(m) + "-k" + std::to_string(k), pop, InitialDesign::srs(m), 100000));
    }
  for (std::int64_t m : ms)
    for (int k : ks) {
      pop.k = k;
      config.scenarios.push_back(cross_scenario("t2-eta2-m" + std::to_string(m) + "-k" + std::to_string(k),
                                                pop, InitialDesign::poisson(m, 2.0), 100000));
    }
  return config;
}

RunConfig table4_config(const std::string& block) {
  RunConfig config;
  config.output.path = "table4.csv";
  const Block blocks[] = {
      {"srs-m1000", InitialDesign::srs(1000)},
      {"srs-m5000", InitialDesign::srs(5000)},
      {"eta2-m1000", InitialDesign::poisson(1000, 2.0)},
  };
  bool matched = false;
  for (const auto& b : blocks) {
    if (!block.empty() && block != b.name) continue;
    matched = true;
    for (const auto& label : table3_labels()) {
      PopulationSpec pop;
      pop.kind = PopKind::dynamics;
      pop.n_units = 100000;
      pop.setting = table3_setting(label);
      pop.theta = pop.setting->theta1();
      pop.k = pop.setting->t1.size;
      for (TemporalDesign temporal :
           {TemporalDesign::panel, TemporalDesign::pacs, TemporalDesign::iacs}) {
        Scenario sc;
        sc.id = std::string("t4-") + b.name + "-" + label + "-" +
                (temporal == TemporalDesign::panel  ? "panel"
                 : temporal == TemporalDesign::pacs ? "pacs"
                                                    : "iacs");
        sc.population = pop;
        sc.initial = b.initial;
        sc.tracing = TracingDesign::acs();
        sc.temporal = temporal;
        sc.replicates = 10000;
        sc.seed = kDefaultSeed;
        config.scenarios.push_back(std::move(sc));
      }
    }
  }
  if (!matched)
    throw ConfigError("reproduce: unknown table 4 block '" + block +
                      "' (expected srs-m1000 | srs-m5000 | eta2-m1000)");
  return config;
}

RunConfig table_config(int table, const std::string& block) {
  switch (table) {
    case 1:
      if (!block.empty()) throw ConfigError("reproduce: table 1 has no blocks");
      return table1_config();
    case 2:
      if (!block.empty()) throw ConfigError("reproduce: table 2 has no blocks");
      return table2_config();
    case 4:
      return table4_config(block);
    default:
      throw ConfigError("reproduce: table must be 1, 2 or 4");
  }
}

}  // namespace acstrace

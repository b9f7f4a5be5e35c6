#include "acstrace/design.hpp"

#include <algorithm>

#include <json.hpp>

namespace acstrace {

void InitialDesign::validate(std::int64_t n_units) const {
  if (m < 0) throw ConfigError("initial design: m must be nonnegative");
  if (m > n_units) throw ConfigError("initial design: m exceeds population size");
  if (kind == Kind::poisson_size_biased && eta < 1.0)
    throw ConfigError("initial design: eta must be >= 1");
}

PoissonProbs poisson_probs(const InitialDesign& design, std::int64_t n_units, std::int64_t theta_units) {
  if (design.kind != InitialDesign::Kind::poisson_size_biased)
    throw ConfigError("poisson_probs: not a Poisson design");
  const double denom = static_cast<double>(n_units) + (design.eta - 1.0) * static_cast<double>(theta_units);
  const double p_non = static_cast<double>(design.m) / denom;
  const double p_case = design.eta * p_non;
  if (p_case > 1.0) throw ConfigError("poisson_probs: case inclusion probability exceeds 1");
  return {p_case, p_non};
}

void TracingDesign::validate() const {
  if (kind == Kind::dacs && (!edge_strengths || edge_strengths->empty()))
    throw ConfigError("tracing design: DACS requires edge strengths");
  if (kind == Kind::qasbs && q < 0) throw ConfigError("tracing design: qASBS requires q >= 0");
}

bool TraceSample::contains(UnitId u) const {
  return std::binary_search(final_units.begin(), final_units.end(), u);
}

std::vector<int> TraceSample::sampled_networks(const PopulationGraph& pop) const {
  std::vector<int> nets;
  for (UnitId u : final_units)
    if (pop.is_case(u)) nets.push_back(pop.network_of(u));
  std::sort(nets.begin(), nets.end());
  nets.erase(std::unique(nets.begin(), nets.end()), nets.end());
  return nets;
}

std::vector<UnitId> draw_initial(const InitialDesign& design, const PopulationGraph& pop, RngStream& rng) {
  design.validate(pop.n_units());
  const std::int64_t n = pop.n_units();
  std::vector<UnitId> s0;
  if (design.kind == InitialDesign::Kind::srs) {
    SubsetSampler sampler(n);
    sampler.draw(design.m, rng, s0);
    std::sort(s0.begin(), s0.end());
  } else {
    const PoissonProbs p = poisson_probs(design, n, pop.theta_units());
    for (UnitId i = 0; i < n; ++i)
      if (rng.bernoulli(pop.is_case(i) ? p.p_case : p.p_non)) s0.push_back(i);
  }
  return s0;
}

std::vector<UnitId> draw_initial(const InitialDesign& design, const PopulationGraph& pop, std::uint64_t seed) {
  RngStream rng(seed);
  return draw_initial(design, pop, rng);
}

TraceSample trace(const PopulationGraph& pop, std::vector<UnitId> s0, const TracingDesign& tracing) {
  tracing.validate();
  const std::int64_t n = pop.n_units();
  std::sort(s0.begin(), s0.end());
  s0.erase(std::unique(s0.begin(), s0.end()), s0.end());
  for (UnitId u : s0)
    if (u < 0 || u >= n) throw ConfigError("trace: s0 contains an id outside the population");

  TraceSample out;
  out.tracing_kind = tracing.kind;
  out.network_exhaustive = tracing.kind == TracingDesign::Kind::acs;
  out.s0 = std::move(s0);

  std::vector<char> sampled(static_cast<std::size_t>(n), 0);
  for (UnitId u : out.s0) sampled[static_cast<std::size_t>(u)] = 1;

  const auto eligible = [&](UnitId i, UnitId j) {
    if (tracing.kind != TracingDesign::Kind::dacs) return true;
    const auto psi = tracing.edge_strengths->get(i, j);
    return psi && *psi > tracing.psi0;
  };

  std::vector<UnitId> frontier;  // cases whose contacts get traced next
  for (UnitId u : out.s0)
    if (pop.is_case(u)) frontier.push_back(u);

  const bool capped = tracing.kind == TracingDesign::Kind::qasbs;
  for (int wave = 0; !capped || wave < tracing.q; ++wave) {
    std::vector<UnitId> next;
    for (UnitId i : frontier)
      for (UnitId j : pop.neighbors(i))
        if (eligible(i, j) && !sampled[static_cast<std::size_t>(j)]) {
          sampled[static_cast<std::size_t>(j)] = 1;
          next.push_back(j);
        }
    std::sort(next.begin(), next.end());
    const bool empty = next.empty();
    frontier.clear();
    for (UnitId u : next)
      if (pop.is_case(u)) frontier.push_back(u);
    out.waves.push_back(std::move(next));
    if (empty) break;  // ACS/DACS terminate on the empty wave; it stays recorded
  }

  out.final_units = out.s0;
  for (const auto& wave : out.waves) out.final_units.insert(out.final_units.end(), wave.begin(), wave.end());
  std::sort(out.final_units.begin(), out.final_units.end());

  out.tags = classify(out, pop);

  // per-network sampled-member counts decide full observation
  std::vector<int> seen(pop.networks().size(), 0);
  for (UnitId u : out.final_units)
    if (pop.is_case(u)) ++seen[static_cast<std::size_t>(pop.network_of(u))];
  out.network_fully_observed.assign(out.final_units.size(), 0);
  for (std::size_t i = 0; i < out.final_units.size(); ++i) {
    const UnitId u = out.final_units[i];
    if (!pop.is_case(u)) continue;
    const auto& net = pop.networks()[static_cast<std::size_t>(pop.network_of(u))];
    out.network_fully_observed[i] = seen[static_cast<std::size_t>(net.id)] == net.size() ? 1 : 0;
  }
  return out;
}

std::vector<SampleTag> classify(const TraceSample& sample, const PopulationGraph& pop) {
  std::vector<char> sampled_case(static_cast<std::size_t>(pop.n_units()), 0);
  for (UnitId u : sample.final_units)
    if (pop.is_case(u)) sampled_case[static_cast<std::size_t>(u)] = 1;
  std::vector<SampleTag> tags(sample.final_units.size(), SampleTag::other_initial);
  for (std::size_t i = 0; i < sample.final_units.size(); ++i) {
    const UnitId u = sample.final_units[i];
    if (pop.is_case(u)) {
      tags[i] = SampleTag::network_case;
      continue;
    }
    bool edge = false;
    for (UnitId v : pop.neighbors(u))
      if (sampled_case[static_cast<std::size_t>(v)]) {
        edge = true;
        break;
      }
    tags[i] = edge ? SampleTag::edge_unit : SampleTag::other_initial;
  }
  return tags;
}

std::string trace_sample_to_json(const TraceSample& sample) {
  nlohmann::json doc;
  doc["s0"] = sample.s0;
  doc["waves"] = sample.waves;
  doc["final"] = sample.final_units;
  nlohmann::json tags = nlohmann::json::array();
  for (std::size_t i = 0; i < sample.final_units.size(); ++i) {
    const char* t = sample.tags[i] == SampleTag::network_case   ? "network_case"
                    : sample.tags[i] == SampleTag::edge_unit    ? "edge_unit"
                                                                : "other_initial";
    tags.push_back({{"id", sample.final_units[i]},
                    {"tag", t},
                    {"network_fully_observed", sample.network_fully_observed[i] != 0}});
  }
  doc["tags"] = std::move(tags);
  return doc.dump();
}

}  // namespace acstrace

#include "acstrace/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "acstrace/estimate.hpp"
#include "acstrace/rng.hpp"

namespace acstrace::oracle {

namespace {

Rational binomial_coefficient(int n, int m) {
  Rational c(1);
  for (int i = 0; i < m; ++i) c *= Rational(n - i, i + 1);
  return c;
}

struct MomentAcc {
  Rational sum, sum_sq, weight;
  void add(const Rational& w, const Rational& v) {
    sum += w * v;
    sum_sq += w * v * v;
    weight += w;
  }
  Rational mean() const { return sum / weight; }
  Rational variance() const { return sum_sq / weight - mean() * mean(); }
};

}  // namespace

void for_each_srs_sample(int n, int m, const std::function<void(std::span<const UnitId>)>& fn) {
  if (m > n) throw ConfigError("enumeration: m exceeds N");
  std::vector<UnitId> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), 0);
  if (m == 0) {
    fn(idx);
    return;
  }
  for (;;) {
    fn(idx);
    int j = m - 1;
    while (j >= 0 && idx[static_cast<std::size_t>(j)] == n - m + j) --j;
    if (j < 0) break;
    ++idx[static_cast<std::size_t>(j)];
    for (int t = j + 1; t < m; ++t) idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
  }
}

void for_each_poisson_sample(
    const PopulationGraph& pop, const InitialDesign& design,
    const std::function<void(std::span<const UnitId>, const Rational&)>& fn) {
  const int n = static_cast<int>(pop.n_units());
  if (n > 20) throw ConfigError("enumeration: Poisson enumeration limited to N <= 20");
  const auto probs = InitialProbs<Rational>::make(design, pop);
  std::vector<Rational> pi(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pi[static_cast<std::size_t>(i)] = probs.unit_pi(pop.is_case(i));
  std::vector<UnitId> ids;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    ids.clear();
    Rational w(1);
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        ids.push_back(i);
        w *= pi[static_cast<std::size_t>(i)];
      } else {
        w *= Rational(1) - pi[static_cast<std::size_t>(i)];
      }
    }
    fn(ids, w);
  }
}

namespace {

// walks every initial sample of the design (uniform weights under SRS)
void for_each_initial(const PopulationGraph& pop, const InitialDesign& design,
                      const std::function<void(std::span<const UnitId>, const Rational&)>& fn) {
  if (design.kind == InitialDesign::Kind::srs) {
    const Rational w = Rational(1) / binomial_coefficient(static_cast<int>(pop.n_units()),
                                                          static_cast<int>(design.m));
    for_each_srs_sample(static_cast<int>(pop.n_units()), static_cast<int>(design.m),
                        [&](std::span<const UnitId> ids) { fn(ids, w); });
  } else {
    for_each_poisson_sample(pop, design, fn);
  }
}

}  // namespace

CrossEnumeration enumerate_cross(const PopulationGraph& pop, const InitialDesign& design) {
  const std::size_t n = static_cast<std::size_t>(pop.n_units());
  const std::size_t m_nets = pop.networks().size();
  const auto incl = build_inclusion_table<Rational>(design, pop, false);
  const TracingDesign acs = TracingDesign::acs();

  CrossEnumeration out;
  out.net_hit.assign(m_nets, Rational(0));
  out.net_joint.assign(m_nets * m_nets, Rational(0));
  out.unit_in_sample.assign(n, Rational(0));
  out.pair_in_sample.assign(n * n, Rational(0));
  MomentAcc acs_acc, init_acc, n_acc;

  std::vector<UnitId> s0;
  for_each_initial(pop, design, [&](std::span<const UnitId> ids, const Rational& w) {
    s0.assign(ids.begin(), ids.end());
    const TraceSample ts = trace(pop, s0, acs);
    const auto est = ht_acs_total<Rational>(ts, pop, incl);
    const auto init = ht_initial_total<Rational>(ids, pop, design);
    acs_acc.add(w, est.value);
    init_acc.add(w, init.value);
    n_acc.add(w, Rational(ts.n()));
    const auto nets = ts.sampled_networks(pop);
    for (std::size_t a = 0; a < nets.size(); ++a) {
      out.net_hit[static_cast<std::size_t>(nets[a])] += w;
      for (std::size_t b = 0; b < nets.size(); ++b)
        out.net_joint[static_cast<std::size_t>(nets[a]) * m_nets + static_cast<std::size_t>(nets[b])] += w;
    }
    for (std::size_t a = 0; a < ts.final_units.size(); ++a) {
      out.unit_in_sample[static_cast<std::size_t>(ts.final_units[a])] += w;
      for (std::size_t b = a + 1; b < ts.final_units.size(); ++b) {
        const auto i = static_cast<std::size_t>(ts.final_units[a]);
        const auto j = static_cast<std::size_t>(ts.final_units[b]);
        out.pair_in_sample[i * n + j] += w;
        out.pair_in_sample[j * n + i] += w;
      }
    }
  });
  out.e_acs = acs_acc.mean();
  out.var_acs = acs_acc.variance();
  out.e_init = init_acc.mean();
  out.var_init = init_acc.variance();
  out.mean_n = n_acc.mean();
  return out;
}

TwoWaveEnumeration enumerate_two_wave(const TwoWavePopulation& tw, const InitialDesign& design) {
  const std::size_t n = static_cast<std::size_t>(tw.base.n_units());
  const auto incl_t = build_inclusion_table<Rational>(design, tw.base, false);
  const auto incl_t1 =
      build_inclusion_table_cross_time<Rational>(design, tw.base, tw.evolved);
  const TracingDesign acs = TracingDesign::acs();

  TwoWaveEnumeration out;
  out.unit_in_st.assign(n, Rational(0));
  out.pair_in_st.assign(n * n, Rational(0));
  MomentAcc panel_acc, pacs_acc, iacs_acc;

  std::vector<UnitId> s0;
  for_each_initial(tw.base, design, [&](std::span<const UnitId> ids, const Rational& w) {
    s0.assign(ids.begin(), ids.end());
    const TraceSample st = trace(tw.base, s0, acs);
    const TraceSample st1 = trace(tw.evolved, s0, acs);
    panel_acc.add(w, panel_change<Rational>(ids, tw, design).value);
    pacs_acc.add(w, pacs_change<Rational>(st, st1, tw, incl_t, incl_t1).value);
    iacs_acc.add(w, iacs_change<Rational>(st, tw, incl_t).value);
    for (std::size_t a = 0; a < st.final_units.size(); ++a) {
      out.unit_in_st[static_cast<std::size_t>(st.final_units[a])] += w;
      for (std::size_t b = a + 1; b < st.final_units.size(); ++b) {
        const auto i = static_cast<std::size_t>(st.final_units[a]);
        const auto j = static_cast<std::size_t>(st.final_units[b]);
        out.pair_in_st[i * n + j] += w;
        out.pair_in_st[j * n + i] += w;
      }
    }
  });
  out.e_panel = panel_acc.mean();
  out.var_panel = panel_acc.variance();
  out.e_pacs = pacs_acc.mean();
  out.var_pacs = pacs_acc.variance();
  out.e_iacs = iacs_acc.mean();
  out.var_iacs = iacs_acc.variance();
  return out;
}

PopulationGraph random_toy_population(std::uint64_t seed) {
  RngStream rng(seed);
  const int n = 6 + static_cast<int>(rng.below(7));  // 6..12
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);

  std::vector<int> y(static_cast<std::size_t>(n), 0);
  std::vector<std::pair<UnitId, UnitId>> edges;
  std::size_t at = 0;
  const auto remaining = [&] { return static_cast<int>(ids.size() - at); };

  // case networks of sizes 1..3 over at most half the units
  const int budget = std::max(2, n / 2);
  int used = 0;
  std::vector<std::vector<UnitId>> nets;
  while (used < budget && remaining() > budget - used) {
    const int size = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(3, budget - used))));
    std::vector<UnitId> members;
    for (int j = 0; j < size; ++j) members.push_back(ids[at++]);
    for (UnitId u : members) y[static_cast<std::size_t>(u)] = 1;
    // random connected topology: star, path, or complete
    const auto topo = rng.below(3);
    for (std::size_t j = 1; j < members.size(); ++j) {
      if (topo == 0)
        edges.emplace_back(members[0], members[j]);
      else if (topo == 1)
        edges.emplace_back(members[j - 1], members[j]);
      else
        for (std::size_t i2 = 0; i2 < j; ++i2) edges.emplace_back(members[i2], members[j]);
    }
    nets.push_back(std::move(members));
    used += size;
  }
  // edge nodes on some networks
  for (const auto& net : nets) {
    if (remaining() <= 1 || !rng.bernoulli(0.5)) continue;
    const UnitId node = ids[at++];
    const UnitId attach = net[static_cast<std::size_t>(rng.below(net.size()))];
    edges.emplace_back(node, attach);
  }
  // an occasional noncase-noncase contact among leftovers
  if (remaining() >= 2 && rng.bernoulli(0.5)) {
    edges.emplace_back(ids[at], ids[at + 1]);
  }
  return PopulationGraph(Mode::person, std::move(y), std::vector<int>(static_cast<std::size_t>(n), 1), edges);
}

TwoWavePopulation random_two_wave_toy(std::uint64_t seed) {
  RngStream rng(seed);
  const int n = 9 + static_cast<int>(rng.below(4));  // 9..12
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(i + 1)))]);
  std::size_t at = 0;

  // base: one network of 3 (may shrink), one of 2 (may grow), rest noncase
  std::vector<int> y1(static_cast<std::size_t>(n), 0);
  std::vector<std::pair<UnitId, UnitId>> e1;
  std::vector<UnitId> shrinker{ids[at], ids[at + 1], ids[at + 2]};
  at += 3;
  std::vector<UnitId> grower{ids[at], ids[at + 1]};
  at += 2;
  for (UnitId u : shrinker) y1[static_cast<std::size_t>(u)] = 1;
  for (UnitId u : grower) y1[static_cast<std::size_t>(u)] = 1;
  e1.emplace_back(shrinker[0], shrinker[1]);
  e1.emplace_back(shrinker[1], shrinker[2]);
  e1.emplace_back(grower[0], grower[1]);
  PopulationGraph base(Mode::person, y1, std::vector<int>(static_cast<std::size_t>(n), 1), e1);

  // evolved: shrinker loses a random member, grower annexes a fresh unit,
  // and sometimes a fresh network of 2 emerges
  std::vector<int> y2(static_cast<std::size_t>(n), 0);
  std::vector<std::pair<UnitId, UnitId>> e2;
  const std::size_t drop = static_cast<std::size_t>(rng.below(3));
  std::vector<UnitId> kept;
  for (std::size_t i = 0; i < shrinker.size(); ++i)
    if (i != drop) kept.push_back(shrinker[i]);
  for (UnitId u : kept) y2[static_cast<std::size_t>(u)] = 1;
  e2.emplace_back(kept[0], kept[1]);
  const UnitId annexed = ids[at++];
  for (UnitId u : grower) y2[static_cast<std::size_t>(u)] = 1;
  y2[static_cast<std::size_t>(annexed)] = 1;
  e2.emplace_back(grower[0], grower[1]);
  e2.emplace_back(grower[1], annexed);
  if (static_cast<int>(at) + 2 <= n && rng.bernoulli(0.6)) {
    const UnitId a = ids[at++];
    const UnitId b = ids[at++];
    y2[static_cast<std::size_t>(a)] = 1;
    y2[static_cast<std::size_t>(b)] = 1;
    e2.emplace_back(a, b);
  }
  PopulationGraph evolved(Mode::person, y2, std::vector<int>(static_cast<std::size_t>(n), 1), e2);
  return make_two_wave(std::move(base), std::move(evolved));
}

namespace {

bool close(const Rational& a, const Rational& b) {
  const Rational diff = a >= b ? a - b : b - a;
  return diff == 0 || to_double(diff) <= 1e-10;
}

}  // namespace

bool run_enumeration_suite(const EnumerationOptions& opts, std::ostream& log) {
  bool ok = true;
  const auto report = [&](const char* what, bool pass) {
    log << (pass ? "  ok  " : "  FAIL") << "  " << what << "\n";
    ok = ok && pass;
  };

  for (int t = 0; t < opts.cross_toys; ++t) {
    const std::uint64_t seed = derive_seed(opts.seed, 0xc105, static_cast<std::uint64_t>(t));
    const PopulationGraph pop = random_toy_population(seed);
    const int n = static_cast<int>(pop.n_units());
    const int m = 1 + static_cast<int>(splitmix64(seed) % 4);
    const InitialDesign design = InitialDesign::srs(m);
    const auto en = enumerate_cross(pop, design);
    const auto incl = build_inclusion_table<Rational>(design, pop, true);

    bool exact_mean = en.e_acs == Rational(pop.y_total());
    bool exact_init = en.e_init == Rational(pop.y_total());
    const Rational var_an = acs_variance_analytic<Rational>(design, pop);
    bool var_match = close(en.var_acs, var_an);
    bool var_init_match = close(en.var_init, initial_ht_variance<Rational>(design, pop));
    bool first_ok = true, second_ok = true, piecewise_ok = true;
    const std::size_t m_nets = pop.networks().size();
    for (std::size_t a = 0; a < m_nets; ++a) {
      first_ok = first_ok && en.net_hit[a] == incl.network_first[a];
      for (std::size_t b = 0; b < m_nets; ++b)
        second_ok = second_ok && en.net_joint[a * m_nets + b] == incl.joint(a, b);
    }
    // unit-level: case units enter the sample with their network probability
    for (UnitId i = 0; i < n; ++i)
      if (pop.is_case(i))
        first_ok = first_ok &&
                   en.unit_in_sample[static_cast<std::size_t>(i)] ==
                       incl.network_first[static_cast<std::size_t>(pop.network_of(i))];
    // piecewise joint over s: exact except for edge units, whose sample
    // inclusion has no closed form
    const auto is_edge = [&](UnitId u) {
      if (pop.is_case(u)) return false;
      for (UnitId v : pop.neighbors(u))
        if (pop.is_case(v)) return true;
      return false;
    };
    for (UnitId i = 0; i < n; ++i) {
      if (is_edge(i)) continue;
      for (UnitId j = i + 1; j < n; ++j) {
        if (is_edge(j)) continue;
        const Rational want = iacs_joint_inclusion<Rational>(design, pop, i, j);
        piecewise_ok = piecewise_ok &&
                       en.pair_in_sample[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                                         static_cast<std::size_t>(j)] == want;
      }
    }
    char line[160];
    std::snprintf(line, sizeof line,
                  "cross toy %2d (N=%d, m=%d, nets=%zu): E exact, V exact, pi tables exact", t, n, m,
                  m_nets);
    report(line, exact_mean && exact_init && var_match && var_init_match && first_ok && second_ok &&
                     piecewise_ok);

    if (opts.check_poisson && n <= 10) {
      const InitialDesign pd = InitialDesign::poisson(m, 2.0);
      const auto enp = enumerate_cross(pop, pd);
      const auto inclp = build_inclusion_table<Rational>(pd, pop, true);
      bool pmean = enp.e_acs == Rational(pop.y_total());
      bool pfirst = true;
      for (std::size_t a = 0; a < m_nets; ++a) pfirst = pfirst && enp.net_hit[a] == inclp.network_first[a];
      bool pvar = close(enp.var_acs, acs_variance_analytic<Rational>(pd, pop));
      std::snprintf(line, sizeof line, "cross toy %2d poisson eta=2: E exact, V exact, pi exact", t);
      report(line, pmean && pfirst && pvar);
    }
  }

  for (int t = 0; t < opts.two_wave_toys; ++t) {
    const std::uint64_t seed = derive_seed(opts.seed, 0x2a7e, static_cast<std::uint64_t>(t));
    const TwoWavePopulation tw = random_two_wave_toy(seed);
    const int n = static_cast<int>(tw.base.n_units());
    const int m = 2 + static_cast<int>(splitmix64(seed ^ 0x11) % 3);
    const InitialDesign design = InitialDesign::srs(m);
    const auto en = enumerate_two_wave(tw, design);
    const Rational nabla = Rational(tw.theta2() - tw.theta1(), tw.base.n_units());

    bool means = en.e_panel == nabla && en.e_pacs == nabla && en.e_iacs == nabla;
    bool vars = close(en.var_panel, panel_variance_analytic<Rational>(tw, design)) &&
                close(en.var_pacs, pacs_variance_analytic<Rational>(tw, design)) &&
                close(en.var_iacs, iacs_variance_analytic<Rational>(tw, design));
    bool piecewise_ok = true;
    for (UnitId i = 0; i < n; ++i)
      for (UnitId j = i + 1; j < n; ++j) {
        const Rational want = iacs_joint_inclusion<Rational>(design, tw.base, i, j);
        piecewise_ok = piecewise_ok &&
                       en.pair_in_st[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                                     static_cast<std::size_t>(j)] == want;
      }
    char line[160];
    std::snprintf(line, sizeof line,
                  "two-wave toy %2d (N=%d, m=%d): panel/pACS/iACS unbiased, variances exact", t, n, m);
    report(line, means && vars && piecewise_ok);
  }
  return ok;
}

}  // namespace acstrace::oracle

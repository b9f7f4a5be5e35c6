#include "acstrace/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "acstrace/estimate.hpp"
#include "acstrace/inclusion.hpp"

namespace acstrace {

namespace {

constexpr std::uint64_t kPopSalt = 0x706f70756c617465ULL;
constexpr std::uint64_t kAnalyticSalt = 0x616e616c79746963ULL;

struct RepStats {
  double adaptive = 0.0;
  double baseline = 0.0;
  double n = 0.0;
  std::uint8_t zero_networks = 0;
};

template <class MakeWorker>
void run_parallel(std::int64_t replicates, int threads, MakeWorker&& make) {
  constexpr std::int64_t kChunk = 256;
  std::atomic<std::int64_t> next{0};
  auto body = [&]() {
    auto worker = make();
    for (;;) {
      const std::int64_t begin = next.fetch_add(kChunk);
      if (begin >= replicates) break;
      const std::int64_t end = std::min(replicates, begin + kChunk);
      for (std::int64_t r = begin; r < end; ++r) worker(r);
    }
  };
  if (threads <= 1) {
    body();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
}

struct Moments {
  double mean_adaptive = 0.0, var_adaptive = 0.0;
  double mean_baseline = 0.0, var_baseline = 0.0;
  double mean_n = 0.0;
  double re = 0.0, re_se = 0.0;
  std::int64_t zero_networks = 0;
};

// Sequential reduction in replicate order: bit-identical for any thread count.
Moments reduce(const std::vector<RepStats>& slots) {
  Moments mo;
  const std::int64_t r = static_cast<std::int64_t>(slots.size());
  if (r == 0) return mo;
  long double sa = 0, sb = 0, sn = 0;
  for (const auto& s : slots) {
    sa += s.adaptive;
    sb += s.baseline;
    sn += s.n;
    mo.zero_networks += s.zero_networks;
  }
  mo.mean_adaptive = static_cast<double>(sa / r);
  mo.mean_baseline = static_cast<double>(sb / r);
  mo.mean_n = static_cast<double>(sn / r);
  if (r < 2) return mo;
  long double su = 0, sv = 0, suu = 0, svv = 0, suv = 0;
  for (const auto& s : slots) {
    const long double u = (s.adaptive - mo.mean_adaptive) * (s.adaptive - mo.mean_adaptive);
    const long double v = (s.baseline - mo.mean_baseline) * (s.baseline - mo.mean_baseline);
    su += u;
    sv += v;
    suu += u * u;
    svv += v * v;
    suv += u * v;
  }
  mo.var_adaptive = static_cast<double>(su / (r - 1));
  mo.var_baseline = static_cast<double>(sv / (r - 1));
  if (sv > 0) {
    mo.re = static_cast<double>(su / sv);
    const long double mu = su / r, mv = sv / r;
    const long double vu = suu / r - mu * mu;
    const long double vv = svv / r - mv * mv;
    const long double cuv = suv / r - mu * mv;
    const long double rel = vu / (mu * mu) + vv / (mv * mv) - 2 * cuv / (mu * mv);
    mo.re_se = mo.re * std::sqrt(std::max(0.0, static_cast<double>(rel / r)));
  }
  return mo;
}

struct SizeMoments {
  double mean = 1.0;
  double second = 1.0;  // E[s^2]
  double var = 0.0;
};

SizeMoments size_moments(const std::vector<double>& dist) {
  SizeMoments sm;
  if (dist.empty()) return sm;
  sm.mean = 0;
  sm.second = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double s = static_cast<double>(i + 1);
    sm.mean += dist[i] * s;
    sm.second += dist[i] * s * s;
  }
  sm.var = sm.second - sm.mean * sm.mean;
  return sm;
}

// ----------------------------------------------------------------------
// cross-sectional kernel
// ----------------------------------------------------------------------

struct CrossShared {
  const Scenario* sc = nullptr;
  PopulationGraph pop;
  std::vector<UnitId> case_units;
  std::vector<std::int32_t> case_index_of;  // unit -> case slot, -1
  std::vector<std::int32_t> net_of_case;    // case slot -> network id
  std::vector<UnitId> edge_nodes;
  std::vector<std::int32_t> edge_net_of;    // unit -> attached network, -1
  std::vector<std::int32_t> net_size;
  std::vector<std::int32_t> net_edge_count;
  std::vector<double> net_pi;
  std::vector<double> base_ytot;
  bool household = false;
  bool redraw_sizes = false;
  AliasTable alias;
  bool srs = true;
  PoissonProbs pp{};
  bool initial_only = false;  // qASBS with q = 0: no tracing
  std::uint64_t salt = 0;
  std::vector<RepStats>* slots = nullptr;
};

CrossShared make_cross_shared(const Scenario& sc) {
  CrossShared sh;
  sh.sc = &sc;
  sh.pop = sc.population.build(derive_seed(sc.seed, kPopSalt, fnv1a64(sc.id)));
  const std::int64_t n = sh.pop.n_units();
  sh.case_index_of.assign(static_cast<std::size_t>(n), -1);
  sh.edge_net_of.assign(static_cast<std::size_t>(n), -1);
  for (UnitId i = 0; i < n; ++i) {
    if (!sh.pop.is_case(i)) continue;
    sh.case_index_of[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(sh.case_units.size());
    sh.case_units.push_back(i);
    sh.net_of_case.push_back(sh.pop.network_of(i));
  }
  const auto& nets = sh.pop.networks();
  sh.net_size.resize(nets.size());
  sh.net_edge_count.assign(nets.size(), 0);
  sh.base_ytot.resize(nets.size());
  for (std::size_t a = 0; a < nets.size(); ++a) {
    sh.net_size[a] = nets[a].size();
    sh.base_ytot[a] = static_cast<double>(nets[a].y_total);
  }
  // noncase adjacent to exactly one network by construction
  for (UnitId i = 0; i < n; ++i) {
    if (sh.pop.is_case(i)) continue;
    for (UnitId v : sh.pop.neighbors(i))
      if (sh.pop.is_case(v)) {
        sh.edge_net_of[static_cast<std::size_t>(i)] = sh.pop.network_of(v);
        break;
      }
    if (sh.edge_net_of[static_cast<std::size_t>(i)] >= 0) {
      sh.edge_nodes.push_back(i);
      ++sh.net_edge_count[static_cast<std::size_t>(sh.edge_net_of[static_cast<std::size_t>(i)])];
    }
  }
  sh.household = sh.pop.mode() == Mode::household;
  sh.redraw_sizes = sh.household && !sc.freeze_population;
  if (sh.household) sh.alias = AliasTable(sc.population.size_dist);
  sh.srs = sc.initial.kind == InitialDesign::Kind::srs;
  if (!sh.srs) sh.pp = poisson_probs(sc.initial, n, sh.pop.theta_units());
  sh.initial_only = sc.tracing.kind == TracingDesign::Kind::qasbs && sc.tracing.q == 0;

  ExclusionCache<double> cache(InitialProbs<double>::make(sc.initial, sh.pop));
  sh.net_pi.resize(nets.size());
  for (std::size_t a = 0; a < nets.size(); ++a)
    sh.net_pi[a] = 1.0 - cache.exclusion(sh.net_size[a], 0);
  sh.salt = fnv1a64(sc.id);
  return sh;
}

struct CrossWorker {
  const CrossShared& sh;
  SubsetSampler sampler;
  BinomialSampler rest;
  std::vector<UnitId> s0;
  std::vector<int> case_y;
  std::vector<double> ytot;
  std::vector<std::int64_t> net_epoch, edge_epoch;
  std::vector<std::int32_t> hit_cnt, edge_cnt;
  std::vector<std::int32_t> hit_list;
  std::int64_t epoch = 0;

  explicit CrossWorker(const CrossShared& shared)
      : sh(shared), sampler(shared.pop.n_units()) {
    const std::size_t m = shared.net_size.size();
    net_epoch.assign(m, -1);
    edge_epoch.assign(m, -1);
    hit_cnt.assign(m, 0);
    edge_cnt.assign(m, 0);
    ytot = shared.base_ytot;
    case_y.assign(shared.case_units.size(), 1);
    if (sh.household)
      for (std::size_t c = 0; c < sh.case_units.size(); ++c)
        case_y[c] = sh.pop.y(sh.case_units[c]);
    if (!sh.srs) {
      const std::int64_t others =
          sh.pop.n_units() - static_cast<std::int64_t>(sh.case_units.size() + sh.edge_nodes.size());
      rest = BinomialSampler(others, sh.pp.p_non);
    }
  }

  void operator()(std::int64_t r) {
    RngStream rng(derive_seed(sh.sc->seed, sh.salt, static_cast<std::uint64_t>(r)));
    ++epoch;
    if (sh.redraw_sizes) {
      std::fill(ytot.begin(), ytot.end(), 0.0);
      for (std::size_t c = 0; c < sh.case_units.size(); ++c) {
        const int s = static_cast<int>(sh.alias.sample(rng)) + 1;
        case_y[c] = s;
        ytot[static_cast<std::size_t>(sh.net_of_case[c])] += s;
      }
    }
    double init_sum = 0.0;
    std::int64_t s0_size = 0;
    hit_list.clear();
    const auto visit = [&](UnitId u) {
      const std::int32_t ci = sh.case_index_of[static_cast<std::size_t>(u)];
      if (ci >= 0) {
        init_sum += case_y[static_cast<std::size_t>(ci)];
        const std::int32_t net = sh.net_of_case[static_cast<std::size_t>(ci)];
        if (net_epoch[static_cast<std::size_t>(net)] != epoch) {
          net_epoch[static_cast<std::size_t>(net)] = epoch;
          hit_cnt[static_cast<std::size_t>(net)] = 0;
          hit_list.push_back(net);
        }
        ++hit_cnt[static_cast<std::size_t>(net)];
        return;
      }
      const std::int32_t en = sh.edge_net_of[static_cast<std::size_t>(u)];
      if (en >= 0) {
        if (edge_epoch[static_cast<std::size_t>(en)] != epoch) {
          edge_epoch[static_cast<std::size_t>(en)] = epoch;
          edge_cnt[static_cast<std::size_t>(en)] = 0;
        }
        ++edge_cnt[static_cast<std::size_t>(en)];
      }
    };
    const std::int64_t m = sh.sc->initial.m;
    if (sh.srs) {
      sampler.draw(m, rng, s0);
      for (UnitId u : s0) visit(u);
      s0_size = m;
    } else {
      for (UnitId u : sh.case_units)
        if (rng.bernoulli(sh.pp.p_case)) {
          visit(u);
          ++s0_size;
        }
      for (UnitId u : sh.edge_nodes)
        if (rng.bernoulli(sh.pp.p_non)) {
          visit(u);
          ++s0_size;
        }
      s0_size += rest.sample(rng);
    }
    double acs = 0.0;
    double n_final = static_cast<double>(s0_size);
    if (!sh.initial_only) {
      for (std::int32_t net : hit_list) {
        acs += ytot[static_cast<std::size_t>(net)] / sh.net_pi[static_cast<std::size_t>(net)];
        n_final += sh.net_size[static_cast<std::size_t>(net)] - hit_cnt[static_cast<std::size_t>(net)];
        const std::int32_t in_s0 =
            edge_epoch[static_cast<std::size_t>(net)] == epoch ? edge_cnt[static_cast<std::size_t>(net)] : 0;
        n_final += sh.net_edge_count[static_cast<std::size_t>(net)] - in_s0;
      }
    }
    const double init_est =
        sh.srs ? (m > 0 ? static_cast<double>(sh.pop.n_units()) / static_cast<double>(m) * init_sum : 0.0)
               : init_sum / sh.pp.p_case;
    auto& slot = (*sh.slots)[static_cast<std::size_t>(r)];
    slot.adaptive = sh.initial_only ? init_est : acs;
    slot.baseline = init_est;
    slot.n = n_final;
    slot.zero_networks = hit_list.empty() ? 1 : 0;
  }
};

// ----------------------------------------------------------------------
// change-design kernel (panel / pACS / iACS on dynamics populations)
// ----------------------------------------------------------------------

struct ChangeShared {
  const Scenario* sc = nullptr;
  DynamicsSetting setting;
  PopulationGraph base;
  std::vector<std::int32_t> net1_of;  // unit -> t1 network, -1
  std::vector<UnitId> case_units;
  int k = 1;
  std::int64_t n_new = 0;  // deterministic count of fresh cases per transition
  std::vector<double> pi1;
  bool srs = true;
  PoissonProbs pp{};
  std::optional<Transition> frozen;
  std::uint64_t salt = 0;
  TemporalDesign temporal = TemporalDesign::panel;
  std::vector<RepStats>* slots = nullptr;
};

ChangeShared make_change_shared(const Scenario& sc) {
  ChangeShared sh;
  sh.sc = &sc;
  sh.setting = *sc.population.setting;
  sh.base = sc.population.build(derive_seed(sc.seed, kPopSalt, fnv1a64(sc.id)));
  const std::int64_t n = sh.base.n_units();
  sh.net1_of.assign(static_cast<std::size_t>(n), -1);
  for (UnitId i = 0; i < n; ++i)
    if (sh.base.is_case(i)) {
      sh.net1_of[static_cast<std::size_t>(i)] = sh.base.network_of(i);
      sh.case_units.push_back(i);
    }
  sh.k = sh.setting.t1.size;
  sh.n_new = sh.setting.growing.count * (sh.setting.growing.size - sh.setting.t1.size) +
             sh.setting.emerging.count * sh.setting.emerging.size;
  sh.srs = sc.initial.kind == InitialDesign::Kind::srs;
  if (!sh.srs) sh.pp = poisson_probs(sc.initial, n, sh.base.theta_units());
  ExclusionCache<double> cache(InitialProbs<double>::make(sc.initial, sh.base));
  sh.pi1.resize(sh.base.networks().size());
  for (std::size_t a = 0; a < sh.pi1.size(); ++a)
    sh.pi1[a] = 1.0 - cache.exclusion(sh.base.networks()[a].size(), 0);
  sh.salt = fnv1a64(sc.id);
  sh.temporal = sc.temporal;
  if (sc.freeze_population) {
    RngStream rng(derive_seed(sc.seed, kPopSalt ^ kAnalyticSalt, fnv1a64(sc.id)));
    TransitionWorkspace ws(sh.base);
    sh.frozen = sample_transition(sh.base, sh.setting, rng, ws);
  }
  return sh;
}

struct ChangeWorker {
  const ChangeShared& sh;
  TransitionWorkspace tws;
  SubsetSampler sampler;
  ExclusionCache<double> excl;
  BinomialSampler rest;
  std::vector<UnitId> s0;
  std::vector<std::int64_t> y2_ver, net2_ver;
  std::vector<std::int8_t> y2_delta;
  std::vector<std::int32_t> net2_of;
  std::vector<std::int64_t> hit1_ver, hit2_ver;
  std::vector<std::int32_t> hit1_cnt, hit1_list, hit2_list;
  std::vector<std::int32_t> surv1;
  std::vector<std::int32_t> n2_size;
  std::vector<double> pi2, ytot2;
  std::int64_t epoch = 0;

  explicit ChangeWorker(const ChangeShared& shared)
      : sh(shared),
        tws(shared.base),
        sampler(shared.base.n_units()),
        excl(InitialProbs<double>::make(shared.sc->initial, shared.base)) {
    const std::size_t n = static_cast<std::size_t>(sh.base.n_units());
    y2_ver.assign(n, -1);
    net2_ver.assign(n, -1);
    y2_delta.assign(n, 0);
    net2_of.assign(n, -1);
    const std::size_t m1 = sh.base.networks().size();
    hit1_ver.assign(m1, -1);
    hit1_cnt.assign(m1, 0);
    surv1.assign(m1, 0);
    const std::size_t max_t2 =
        m1 + static_cast<std::size_t>(std::max<std::int64_t>(0, sh.setting.emerging.count));
    hit2_ver.assign(max_t2, -1);
    n2_size.assign(max_t2, 0);
    pi2.assign(max_t2, 0.0);
    ytot2.assign(max_t2, 0.0);
    if (!sh.srs)
      rest = BinomialSampler(
          sh.base.n_units() - static_cast<std::int64_t>(sh.case_units.size()) - sh.n_new, sh.pp.p_non);
  }

  void operator()(std::int64_t r) {
    RngStream rng(derive_seed(sh.sc->seed, sh.salt, static_cast<std::uint64_t>(r)));
    ++epoch;
    Transition local;
    const Transition& tr =
        sh.frozen ? *sh.frozen : (local = sample_transition(sh.base, sh.setting, rng, tws), local);

    // overlay t2 structure
    std::int32_t n2 = 0;
    for (const auto& out : tr.outcomes) {
      surv1[static_cast<std::size_t>(out.net_id)] = static_cast<std::int32_t>(out.retained.size());
      const std::size_t sz = out.retained.size() + out.annexed.size();
      if (sz == 0) continue;
      const std::int32_t idx = n2++;
      n2_size[static_cast<std::size_t>(idx)] = static_cast<std::int32_t>(sz);
      ytot2[static_cast<std::size_t>(idx)] = static_cast<double>(sz);
      pi2[static_cast<std::size_t>(idx)] =
          1.0 - excl.exclusion(static_cast<std::int64_t>(out.retained.size()),
                               static_cast<std::int64_t>(out.annexed.size()));
      for (UnitId u : out.retained) {
        net2_ver[static_cast<std::size_t>(u)] = epoch;
        net2_of[static_cast<std::size_t>(u)] = idx;
      }
      for (UnitId u : out.annexed) {
        net2_ver[static_cast<std::size_t>(u)] = epoch;
        net2_of[static_cast<std::size_t>(u)] = idx;
      }
    }
    for (const auto& group : tr.emerging) {
      const std::int32_t idx = n2++;
      n2_size[static_cast<std::size_t>(idx)] = static_cast<std::int32_t>(group.size());
      ytot2[static_cast<std::size_t>(idx)] = static_cast<double>(group.size());
      pi2[static_cast<std::size_t>(idx)] =
          1.0 - excl.exclusion(0, static_cast<std::int64_t>(group.size()));
      for (UnitId u : group) {
        net2_ver[static_cast<std::size_t>(u)] = epoch;
        net2_of[static_cast<std::size_t>(u)] = idx;
      }
    }
    for (UnitId u : tr.new_cases) {
      y2_ver[static_cast<std::size_t>(u)] = epoch;
      y2_delta[static_cast<std::size_t>(u)] = 1;
    }
    for (UnitId u : tr.closed_cases) {
      y2_ver[static_cast<std::size_t>(u)] = epoch;
      y2_delta[static_cast<std::size_t>(u)] = -1;
    }

    // initial sample and per-unit bookkeeping
    std::int64_t s0_size = 0;
    std::int64_t new_sampled = 0, closed_sampled = 0;
    hit1_list.clear();
    hit2_list.clear();
    const auto visit = [&](UnitId u) {
      const int d = y2_ver[static_cast<std::size_t>(u)] == epoch ? y2_delta[static_cast<std::size_t>(u)] : 0;
      const std::int32_t net1 = sh.net1_of[static_cast<std::size_t>(u)];
      if (net1 >= 0) {
        if (hit1_ver[static_cast<std::size_t>(net1)] != epoch) {
          hit1_ver[static_cast<std::size_t>(net1)] = epoch;
          hit1_cnt[static_cast<std::size_t>(net1)] = 0;
          hit1_list.push_back(net1);
        }
        ++hit1_cnt[static_cast<std::size_t>(net1)];
      }
      if (d > 0) ++new_sampled;
      if (d < 0) ++closed_sampled;
      const bool y2 = net1 >= 0 ? d >= 0 : d > 0;
      if (y2) {
        const std::int32_t j = net2_of[static_cast<std::size_t>(u)];
        if (hit2_ver[static_cast<std::size_t>(j)] != epoch) {
          hit2_ver[static_cast<std::size_t>(j)] = epoch;
          hit2_list.push_back(j);
        }
      }
    };
    const std::int64_t m = sh.sc->initial.m;
    const double n_units = static_cast<double>(sh.base.n_units());
    if (sh.srs) {
      sampler.draw(m, rng, s0);
      for (UnitId u : s0) visit(u);
      s0_size = m;
    } else {
      for (UnitId u : sh.case_units)
        if (rng.bernoulli(sh.pp.p_case)) {
          visit(u);
          ++s0_size;
        }
      for (UnitId u : tr.new_cases)
        if (rng.bernoulli(sh.pp.p_non)) {
          visit(u);
          ++s0_size;
        }
      s0_size += rest.sample(rng);
    }

    double acs1 = 0.0;
    double n_t = static_cast<double>(s0_size);
    double hh_case = 0.0;
    for (std::int32_t net : hit1_list) {
      const double pi = sh.pi1[static_cast<std::size_t>(net)];
      const double size1 = static_cast<double>(sh.base.networks()[static_cast<std::size_t>(net)].size());
      acs1 += size1 / pi;
      hh_case += static_cast<double>(surv1[static_cast<std::size_t>(net)]) / pi;
      n_t += size1 - hit1_cnt[static_cast<std::size_t>(net)];
    }
    double acs2 = 0.0;
    for (std::int32_t j : hit2_list) acs2 += ytot2[static_cast<std::size_t>(j)] / pi2[static_cast<std::size_t>(j)];

    double panel, hh_new;
    if (sh.srs) {
      panel = m > 0 ? static_cast<double>(new_sampled - closed_sampled) / static_cast<double>(m) : 0.0;
      hh_new = m > 0 ? static_cast<double>(new_sampled) * n_units / static_cast<double>(m) : 0.0;
    } else {
      panel = (static_cast<double>(new_sampled) / sh.pp.p_non -
               static_cast<double>(closed_sampled) / sh.pp.p_case) /
              n_units;
      hh_new = static_cast<double>(new_sampled) / sh.pp.p_non;
    }
    const double pacs = (acs2 - acs1) / n_units;
    const double iacs = (hh_case + hh_new - acs1) / n_units;

    auto& slot = (*sh.slots)[static_cast<std::size_t>(r)];
    slot.baseline = panel;
    slot.adaptive = sh.temporal == TemporalDesign::panel  ? panel
                    : sh.temporal == TemporalDesign::pacs ? pacs
                                                          : iacs;
    slot.n = sh.temporal == TemporalDesign::panel ? static_cast<double>(s0_size) : n_t;
    slot.zero_networks = hit1_list.empty() ? 1 : 0;
  }
};

// ----------------------------------------------------------------------
// reference kernel: library draw + trace + estimators, cross-sectional only
// ----------------------------------------------------------------------

struct RefShared {
  const Scenario* sc = nullptr;
  PopulationGraph pop;
  InclusionTable<double> incl;
  bool acs = false;
  std::uint64_t salt = 0;
  std::vector<RepStats>* slots = nullptr;
};

RefShared make_ref_shared(const Scenario& sc) {
  RefShared sh;
  sh.sc = &sc;
  sh.pop = sc.population.build(derive_seed(sc.seed, kPopSalt, fnv1a64(sc.id)));
  sh.incl = build_inclusion_table<double>(sc.initial, sh.pop, false);
  sh.acs = sc.tracing.kind == TracingDesign::Kind::acs;
  sh.salt = fnv1a64(sc.id);
  return sh;
}

struct RefWorker {
  const RefShared& sh;
  explicit RefWorker(const RefShared& shared) : sh(shared) {}

  void operator()(std::int64_t r) {
    RngStream rng(derive_seed(sh.sc->seed, sh.salt, static_cast<std::uint64_t>(r)));
    auto s0 = draw_initial(sh.sc->initial, sh.pop, rng);
    const TraceSample ts = trace(sh.pop, s0, sh.sc->tracing);
    auto& slot = (*sh.slots)[static_cast<std::size_t>(r)];
    slot.baseline = to_double(ht_initial_total<double>(s0, sh.pop, sh.sc->initial).value);
    slot.adaptive = sh.acs ? to_double(ht_acs_total<double>(ts, sh.pop, sh.incl).value) : slot.baseline;
    slot.n = static_cast<double>(ts.n());
    slot.zero_networks = ts.sampled_networks(sh.pop).empty() ? 1 : 0;
  }
};

std::string design_label(const Scenario& sc) {
  switch (sc.temporal) {
    case TemporalDesign::panel:
      return "panel";
    case TemporalDesign::pacs:
      return "pacs";
    case TemporalDesign::iacs:
      return "iacs";
    case TemporalDesign::cross_sectional:
      break;
  }
  switch (sc.tracing.kind) {
    case TracingDesign::Kind::acs:
      return "acs";
    case TracingDesign::Kind::dacs:
      return "dacs";
    case TracingDesign::Kind::qasbs:
      return sc.tracing.q == 0 ? "initial" : "qasbs" + std::to_string(sc.tracing.q);
  }
  return "acs";
}

}  // namespace

void PopulationSpec::validate() const {
  if (n_units <= 0) throw ConfigError("population spec: N must be positive");
  switch (kind) {
    case PopKind::person_equal:
      if (!size_dist.empty()) throw ConfigError("population spec: size_dist is household-only");
      if (setting) throw ConfigError("population spec: setting is dynamics-only");
      break;
    case PopKind::household:
      if (size_dist.empty()) throw ConfigError("population spec: household mode requires size_dist");
      if (setting) throw ConfigError("population spec: setting is dynamics-only");
      break;
    case PopKind::dynamics:
      if (!setting) throw ConfigError("population spec: dynamics mode requires a setting");
      setting->validate();
      if (!size_dist.empty()) throw ConfigError("population spec: size_dist is household-only");
      break;
  }
  if (kind != PopKind::dynamics) {
    if (theta < 0 || theta > n_units) throw ConfigError("population spec: theta must lie in [0, N]");
    if (k <= 0 || theta % k != 0) throw ConfigError("population spec: k must divide theta");
  }
}

std::int64_t PopulationSpec::theta_units() const {
  return kind == PopKind::dynamics ? setting->theta1() : theta;
}

PopulationGraph PopulationSpec::build(std::uint64_t seed) const {
  validate();
  switch (kind) {
    case PopKind::person_equal:
      return build_equal_network_population(n_units, theta, k, seed, net_opts);
    case PopKind::household:
      return build_household_population(n_units, theta, k, size_dist, seed, net_opts);
    case PopKind::dynamics:
      return build_equal_network_population(n_units, setting->theta1(), setting->t1.size, seed, net_opts);
  }
  throw ConfigError("population spec: unknown kind");
}

void Scenario::validate() const {
  population.validate();
  initial.validate(population.n_units);
  tracing.validate();
  if (replicates < 1) throw ConfigError("scenario '" + id + "': replicates must be >= 1");
  if (temporal == TemporalDesign::cross_sectional) {
    if (population.kind == PopKind::dynamics)
      throw ConfigError("scenario '" + id + "': dynamics populations need a change design");
  } else {
    if (population.kind != PopKind::dynamics)
      throw ConfigError("scenario '" + id + "': change designs need a dynamics population");
    if (tracing.kind != TracingDesign::Kind::acs)
      throw ConfigError("scenario '" + id + "': change designs require ACS tracing");
  }
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ACSTRACE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

double expected_sample_size_analytic(const PopulationGraph& pop, const InitialDesign& design) {
  ExclusionCache<double> cache(InitialProbs<double>::make(design, pop));
  const auto& probs = cache.probs();
  double en = 0.0;
  std::int64_t plain_noncases = pop.n_units() - pop.theta_units();
  for (const auto& net : pop.networks())
    en += static_cast<double>(net.size()) * (1.0 - cache.exclusion(net.size(), 0));
  // edge nodes: in the sample iff drawn directly or any adjacent network hit
  std::vector<int> adjacent;
  for (UnitId i = 0; i < pop.n_units(); ++i) {
    if (pop.is_case(i)) continue;
    adjacent.clear();
    for (UnitId v : pop.neighbors(i))
      if (pop.is_case(v)) adjacent.push_back(pop.network_of(v));
    if (adjacent.empty()) continue;
    std::sort(adjacent.begin(), adjacent.end());
    adjacent.erase(std::unique(adjacent.begin(), adjacent.end()), adjacent.end());
    std::int64_t cases = 0;
    for (int netid : adjacent) cases += pop.networks()[static_cast<std::size_t>(netid)].size();
    en += 1.0 - cache.exclusion(cases, 1);
    --plain_noncases;
  }
  en += static_cast<double>(plain_noncases) * to_double(probs.unit_pi(false));
  return en;
}

CrossAnalytics cross_sectional_analytics(const PopulationSpec& spec, const InitialDesign& design) {
  spec.validate();
  if (spec.kind == PopKind::dynamics)
    throw ConfigError("cross_sectional_analytics: dynamics specs use change_analytics");
  design.validate(spec.n_units);
  const PopulationGraph pop = spec.build(derive_seed(0xace5, kPopSalt, 0));
  CrossAnalytics out;
  out.en = expected_sample_size_analytic(pop, design);
  const SizeMoments sm = size_moments(spec.size_dist);
  const double theta = static_cast<double>(spec.theta);
  out.estimand = theta * sm.mean;
  const double pop_var = theta * sm.var;  // Var of the realized person-case total

  ExclusionCache<double> cache(InitialProbs<double>::make(design, pop));
  const double n = static_cast<double>(spec.n_units);
  const double m = static_cast<double>(design.m);
  if (design.kind == InitialDesign::Kind::srs) {
    const double es2 = (theta * sm.second - (pop_var + theta * theta * sm.mean * sm.mean) / n) / (n - 1.0);
    out.var_initial = n * n * (1.0 - m / n) * es2 / m + pop_var;
  } else {
    const auto pp = poisson_probs(design, spec.n_units, spec.theta);
    out.var_initial = theta * sm.second * (1.0 - pp.p_case) / pp.p_case + pop_var;
  }
  const double k = static_cast<double>(spec.k);
  const double n_nets = theta / k;
  const double ex_k = cache.exclusion(spec.k, 0);
  const double pi_k = 1.0 - ex_k;
  const double w_diag = (1.0 - pi_k) / pi_k;
  const double e_net2 = k * sm.var + k * k * sm.mean * sm.mean;
  double var_acs = n_nets * w_diag * e_net2;
  if (design.kind == InitialDesign::Kind::srs && n_nets > 1) {
    const double ex_2k = cache.exclusion(2 * spec.k, 0);
    const double w_off = (ex_2k - ex_k * ex_k) / (pi_k * pi_k);
    var_acs += n_nets * (n_nets - 1.0) * w_off * (k * sm.mean) * (k * sm.mean);
  }
  out.var_acs = var_acs + pop_var;
  out.cv_acs = std::sqrt(out.var_acs) / out.estimand;
  out.cv_initial = std::sqrt(out.var_initial) / out.estimand;
  out.re = out.var_acs / out.var_initial;
  return out;
}

ChangeAnalytics change_analytics(const PopulationSpec& spec, const InitialDesign& design,
                                 TemporalDesign temporal, std::uint64_t seed) {
  spec.validate();
  if (spec.kind != PopKind::dynamics)
    throw ConfigError("change_analytics: requires a dynamics population spec");
  const PopulationGraph base = spec.build(derive_seed(seed, kPopSalt, 1));
  const auto& setting = *spec.setting;
  const int draws = temporal == TemporalDesign::panel ? 1 : (setting.shrinking ? 1 : 64);
  ChangeAnalytics out;
  double acc = 0.0;
  for (int t = 0; t < draws; ++t) {
    const TwoWavePopulation tw =
        evolve_population(base, setting, derive_seed(seed, kAnalyticSalt, static_cast<std::uint64_t>(t)));
    if (t == 0) {
      out.var_panel = panel_variance_analytic<double>(tw, design);
      out.se_panel = std::sqrt(out.var_panel);
      out.lambda_plus = tw.lambda_plus();
      out.lambda_minus = tw.lambda_minus();
      out.var_panel_lambda_approx = panel_variance_lambda_approx(tw, design.m);
    }
    if (temporal == TemporalDesign::pacs)
      acc += pacs_variance_analytic<double>(tw, design);
    else if (temporal == TemporalDesign::iacs)
      acc += iacs_variance_analytic<double>(tw, design);
  }
  if (temporal == TemporalDesign::panel) {
    out.var_adaptive = out.var_panel;
    out.se_adaptive = out.se_panel;
    out.re = 1.0;
  } else {
    out.var_adaptive = acc / draws;
    out.se_adaptive = std::sqrt(*out.var_adaptive);
    out.re = *out.var_adaptive / out.var_panel;
  }
  return out;
}

McSummary run_scenario(const Scenario& sc, int threads, Engine engine) {
  sc.validate();
  const int n_threads = resolve_threads(threads);
  std::vector<RepStats> slots(static_cast<std::size_t>(sc.replicates));

  bool reference = engine == Engine::reference;
  if (engine == Engine::automatic && sc.temporal == TemporalDesign::cross_sectional &&
      sc.tracing.kind != TracingDesign::Kind::acs &&
      !(sc.tracing.kind == TracingDesign::Kind::qasbs && sc.tracing.q == 0))
    reference = true;  // truncated/thresholded tracing has no fast kernel

  McSummary out;
  out.scenario_id = sc.id;
  out.design_label = design_label(sc);
  out.m = sc.initial.m;
  out.eta = sc.initial.kind == InitialDesign::Kind::poisson_size_biased ? sc.initial.eta : 1.0;
  out.k_or_setting = sc.population.kind == PopKind::dynamics ? sc.population.setting->label
                                                             : std::to_string(sc.population.k);
  out.replicates = sc.replicates;
  out.seed = sc.seed;

  if (sc.temporal == TemporalDesign::cross_sectional) {
    const SizeMoments sm = size_moments(sc.population.size_dist);
    if (reference) {
      RefShared sh = make_ref_shared(sc);
      sh.slots = &slots;
      run_parallel(sc.replicates, n_threads, [&sh] { return RefWorker(sh); });
      out.estimand = static_cast<double>(sh.pop.y_total());
      const bool acs = sh.acs;
      const Moments mo = reduce(slots);
      out.mean_n = mo.mean_n;
      out.mean_estimate = mo.mean_adaptive;
      out.zero_network_replicates = mo.zero_networks;
      if (acs) {
        out.cv_mc = std::sqrt(mo.var_adaptive) / out.estimand;
        out.baseline_cv_mc = std::sqrt(mo.var_baseline) / out.estimand;
        out.re_mc = mo.re;
        out.re_mc_standard_error = mo.re_se;
      }
      return out;
    }
    CrossShared sh = make_cross_shared(sc);
    sh.slots = &slots;
    run_parallel(sc.replicates, n_threads, [&sh] { return CrossWorker(sh); });
    out.estimand = sh.redraw_sizes ? static_cast<double>(sc.population.theta) * sm.mean
                                   : static_cast<double>(sh.pop.y_total());
    const Moments mo = reduce(slots);
    out.mean_n = mo.mean_n;
    out.mean_estimate = mo.mean_adaptive;
    out.zero_network_replicates = mo.zero_networks;
    out.cv_mc = std::sqrt(mo.var_adaptive) / out.estimand;
    out.baseline_cv_mc = std::sqrt(mo.var_baseline) / out.estimand;
    out.re_mc = mo.re;
    out.re_mc_standard_error = mo.re_se;

    if (sh.redraw_sizes || sh.pop.mode() == Mode::person) {
      const CrossAnalytics an = cross_sectional_analytics(sc.population, sc.initial);
      out.en_analytic = sc.tracing.kind == TracingDesign::Kind::acs ? std::optional<double>(an.en)
                                                                    : std::nullopt;
      out.baseline_cv_analytic = an.cv_initial;
      if (sh.initial_only) {
        out.cv_analytic = an.cv_initial;
        out.re_analytic = 1.0;
      } else {
        out.cv_analytic = an.cv_acs;
        out.re_analytic = an.re;
      }
    } else {
      // frozen household population: conditional analytic variances
      const double var_acs = acs_variance_analytic<double>(sc.initial, sh.pop);
      const double var_init = initial_ht_variance<double>(sc.initial, sh.pop);
      out.en_analytic = expected_sample_size_analytic(sh.pop, sc.initial);
      out.baseline_cv_analytic = std::sqrt(var_init) / out.estimand;
      out.cv_analytic = sh.initial_only ? *out.baseline_cv_analytic : std::sqrt(var_acs) / out.estimand;
      out.re_analytic = sh.initial_only ? 1.0 : var_acs / var_init;
    }
    if (sh.initial_only) {
      out.re_mc = 1.0;
      out.re_mc_standard_error = 0.0;
    }
    return out;
  }

  // change designs
  ChangeShared sh = make_change_shared(sc);
  sh.slots = &slots;
  run_parallel(sc.replicates, n_threads, [&sh] { return ChangeWorker(sh); });
  out.estimand = 0.0;  // constant case total in the Table 3 settings
  const Moments mo = reduce(slots);
  out.mean_n = mo.mean_n;
  out.mean_estimate = mo.mean_adaptive;
  out.zero_network_replicates = mo.zero_networks;
  out.se_mc = std::sqrt(mo.var_adaptive);
  out.baseline_se_mc = std::sqrt(mo.var_baseline);
  out.re_mc = sc.temporal == TemporalDesign::panel ? 1.0 : mo.re;
  out.re_mc_standard_error = sc.temporal == TemporalDesign::panel ? 0.0 : mo.re_se;
  const ChangeAnalytics an = change_analytics(sc.population, sc.initial, sc.temporal, sc.seed);
  out.se_analytic = an.se_adaptive;
  out.baseline_se_analytic = an.se_panel;
  out.re_analytic = an.re;
  return out;
}

EfficiencyResult relative_efficiency(const Scenario& sc, const Scenario& baseline, int threads) {
  if (!(sc.population == baseline.population))
    throw ConfigError("relative_efficiency: population specs must match");
  const bool sc_change = sc.temporal != TemporalDesign::cross_sectional;
  const bool bl_change = baseline.temporal != TemporalDesign::cross_sectional;
  if (sc_change != bl_change)
    throw ConfigError("relative_efficiency: scenarios estimate different quantities");

  const auto analytic_variance = [](const Scenario& s) -> std::optional<double> {
    if (s.temporal == TemporalDesign::cross_sectional) {
      const bool initial_only = s.tracing.kind == TracingDesign::Kind::qasbs && s.tracing.q == 0;
      if (s.tracing.kind != TracingDesign::Kind::acs && !initial_only) return std::nullopt;
      const CrossAnalytics an = cross_sectional_analytics(s.population, s.initial);
      return initial_only ? an.var_initial : an.var_acs;
    }
    const ChangeAnalytics an = change_analytics(s.population, s.initial, s.temporal, s.seed);
    return an.var_adaptive;
  };

  EfficiencyResult res;
  const auto va = analytic_variance(sc);
  const auto vb = analytic_variance(baseline);
  if (va && vb && *vb > 0) {
    res.analytic = *va / *vb;
    return res;
  }
  const McSummary a = run_scenario(sc, threads);
  const McSummary b = run_scenario(baseline, threads);
  const auto variance_of = [](const McSummary& s) {
    if (s.se_mc) return *s.se_mc * *s.se_mc;
    const double sd = s.cv_mc.value_or(0.0) * s.estimand;
    return sd * sd;
  };
  const double den = variance_of(b);
  if (den > 0) {
    res.monte_carlo = variance_of(a) / den;
    // independent scenario streams: delta-method standard error
    res.mc_standard_error =
        *res.monte_carlo * std::sqrt(2.0 / static_cast<double>(a.replicates) +
                                     2.0 / static_cast<double>(b.replicates));
  }
  return res;
}

}  // namespace acstrace

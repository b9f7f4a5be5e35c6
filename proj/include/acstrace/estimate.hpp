#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "acstrace/design.hpp"
#include "acstrace/dynamics.hpp"
#include "acstrace/inclusion.hpp"
#include "acstrace/population.hpp"

namespace acstrace {

enum class EstimateKind { cross_sectional, panel, pacs, iacs };

// Point estimate with its analytic design variance when one is computable.
// Totals are on the case-total scale; change estimators on the prevalence
// scale (the estimand nabla = mu_{t+1} - mu_t).
template <class S>
struct Estimate {
  S value{};
  std::optional<S> variance;
  EstimateKind kind = EstimateKind::cross_sectional;

  double se() const { return variance ? std::sqrt(to_double(*variance)) : 0.0; }
};

namespace detail {

template <class S>
std::pair<std::int64_t, std::int64_t> net_composition(const PopulationGraph& prob_base,
                                                      const CaseNetwork& net) {
  return composition<S>(prob_base, std::span<const UnitId>(net.members));
}

}  // namespace detail

// Variance of the network-form HT estimator of the case total:
//   sum_{k,l} (pi_(kl) / (pi_(k) pi_(l)) - 1) * n_k * n_l.
// prob_base fixes the initial-draw probabilities (the t=1 population for
// cross-time uses); nets may come from either time point.
template <class S = double>
S acs_variance_analytic(const InitialDesign& design, const PopulationGraph& prob_base,
                        const std::vector<CaseNetwork>& nets) {
  ExclusionCache<S> cache(InitialProbs<S>::make(design, prob_base));
  const std::size_t m = nets.size();
  std::vector<std::pair<std::int64_t, std::int64_t>> comp(m);
  std::vector<S> pi(m);
  for (std::size_t a = 0; a < m; ++a) {
    comp[a] = detail::net_composition<S>(prob_base, nets[a]);
    pi[a] = S(1) - cache.exclusion(comp[a].first, comp[a].second);
    if (!(to_double(pi[a]) > 0.0)) throw EstimationError("acs variance: network with zero inclusion probability");
  }
  S total(0);
  for (std::size_t a = 0; a < m; ++a) {
    const S ya = S(nets[a].y_total);
    total += (S(1) / pi[a] - S(1)) * ya * ya;
    for (std::size_t b = a + 1; b < m; ++b) {
      // distinct same-time networks are disjoint
      const S exu = cache.exclusion(comp[a].first + comp[b].first, comp[a].second + comp[b].second);
      const S exa = cache.exclusion(comp[a].first, comp[a].second);
      const S exb = cache.exclusion(comp[b].first, comp[b].second);
      const S joint = S(1) - exa - exb + exu;
      total += S(2) * (joint / (pi[a] * pi[b]) - S(1)) * ya * S(nets[b].y_total);
    }
  }
  return total;
}

template <class S = double>
S acs_variance_analytic(const InitialDesign& design, const PopulationGraph& pop) {
  return acs_variance_analytic<S>(design, pop, pop.networks());
}

// Cross-time covariance term of the pACS variance (case-total scale):
//   sum_{k in t, l in t+1} (pi_(kl) / (pi_(k) pi_(l)) - 1) * n_{k,t} * n_{l,t+1},
// with member overlap between the two time points handled by the union.
template <class S = double>
S acs_cross_covariance(const InitialDesign& design, const PopulationGraph& prob_base,
                       const std::vector<CaseNetwork>& nets_t, const std::vector<CaseNetwork>& nets_t1) {
  ExclusionCache<S> cache(InitialProbs<S>::make(design, prob_base));
  S total(0);
  for (const auto& a : nets_t) {
    const auto [ca, na] = detail::net_composition<S>(prob_base, a);
    const S pia = S(1) - cache.exclusion(ca, na);
    for (const auto& b : nets_t1) {
      const auto [cb, nb] = detail::net_composition<S>(prob_base, b);
      const S pib = S(1) - cache.exclusion(cb, nb);
      const auto [cu, nu] = detail::union_composition<S>(prob_base, a.members, b.members);
      const S joint = S(1) - cache.exclusion(ca, na) - cache.exclusion(cb, nb) + cache.exclusion(cu, nu);
      total += (joint / (pia * pib) - S(1)) * S(a.y_total) * S(b.y_total);
    }
  }
  return total;
}

// Eq.-(1) HT estimator of the case total from a network-exhaustive sample:
// sampled networks weighted by their inclusion probabilities, edge units and
// other initial noncases contribute zero.
template <class S = double>
Estimate<S> ht_acs_total(const TraceSample& sample, const PopulationGraph& pop,
                         const InclusionTable<S>& incl) {
  if (!sample.network_exhaustive)
    throw EstimationError("ht_acs_total: sample was not produced by network-exhaustive (ACS) tracing");
  Estimate<S> est;
  est.kind = EstimateKind::cross_sectional;
  est.value = S(0);
  for (int net : sample.sampled_networks(pop)) {
    const S pi = incl.network_first[static_cast<std::size_t>(net)];
    if (!(to_double(pi) > 0.0))
      throw EstimationError("ht_acs_total: sampled network has zero inclusion probability");
    est.value += S(pop.networks()[static_cast<std::size_t>(net)].y_total) / pi;
  }
  if (incl.has_second_order()) {
    S total(0);
    const auto& nets = pop.networks();
    for (std::size_t a = 0; a < nets.size(); ++a)
      for (std::size_t b = 0; b < nets.size(); ++b) {
        const S term = incl.joint(a, b) / (incl.network_first[a] * incl.network_first[b]) - S(1);
        total += term * S(nets[a].y_total) * S(nets[b].y_total);
      }
    est.variance = total;
  }
  return est;
}

// Baseline HT estimator of the case total from the initial sample alone.
template <class S = double>
Estimate<S> ht_initial_total(std::span<const UnitId> s0, const PopulationGraph& pop,
                             const InitialDesign& design) {
  const auto probs = InitialProbs<S>::make(design, pop);
  Estimate<S> est;
  est.kind = EstimateKind::cross_sectional;
  est.value = S(0);
  if (design.kind == InitialDesign::Kind::srs) {
    std::int64_t sum = 0;
    for (UnitId u : s0) sum += pop.y(u);
    est.value = design.m > 0 ? scalar_ratio<S>(pop.n_units(), design.m) * S(sum) : S(0);
    // N^2 (1 - f) S_y^2 / m with S_y^2 over the finite population
    if (design.m > 0 && pop.n_units() > 1) {
      std::int64_t sum_y = 0, sum_y2 = 0;
      for (UnitId i = 0; i < pop.n_units(); ++i) {
        sum_y += pop.y(i);
        sum_y2 += static_cast<std::int64_t>(pop.y(i)) * pop.y(i);
      }
      const S n = S(pop.n_units());
      const S s2 = (S(sum_y2) - S(sum_y) * S(sum_y) / n) / (n - S(1));
      est.variance = n * n * (S(1) - scalar_ratio<S>(design.m, pop.n_units())) * s2 / S(design.m);
    }
  } else {
    for (UnitId u : s0)
      if (pop.is_case(u)) est.value += S(pop.y(u)) / probs.p_case;
    S var(0);
    for (UnitId i = 0; i < pop.n_units(); ++i)
      if (pop.is_case(i)) {
        const S y = S(pop.y(i));
        var += y * y * (S(1) - probs.p_case) / probs.p_case;
      }
    est.variance = var;
  }
  return est;
}

// Analytic variance of the initial-sample HT total (no sample needed).
template <class S = double>
S initial_ht_variance(const InitialDesign& design, const PopulationGraph& pop) {
  const auto est = ht_initial_total<S>(std::span<const UnitId>{}, pop, design);
  return est.variance ? *est.variance : S(0);
}

template <class S = double>
S panel_variance_analytic(const TwoWavePopulation& tw, const InitialDesign& design) {
  const auto probs = InitialProbs<S>::make(design, tw.base);
  const S n = S(tw.base.n_units());
  if (design.kind == InitialDesign::Kind::srs) {
    if (design.m == 0) return S(0);
    const std::int64_t sum_d2 = tw.count_plus + tw.count_minus;
    const std::int64_t sum_d = tw.count_plus - tw.count_minus;
    const S s2 = (S(sum_d2) - S(sum_d) * S(sum_d) / n) / (n - S(1));
    return (S(1) - scalar_ratio<S>(design.m, tw.base.n_units())) * s2 / S(design.m);
  }
  // d = +1 units were noncases at t, d = -1 units were cases at t
  const S wp = (S(1) - probs.p_non) / probs.p_non;
  const S wm = (S(1) - probs.p_case) / probs.p_case;
  return (S(tw.count_plus) * wp + S(tw.count_minus) * wm) / (n * n);
}

// The first-order approximation V approx (lambda+ + lambda-) / n of the
// panel variance, for cross-checking against the exact finite-population form.
inline double panel_variance_lambda_approx(const TwoWavePopulation& tw, std::int64_t panel_size) {
  return (tw.lambda_plus() + tw.lambda_minus()) / static_cast<double>(panel_size);
}

// Panel estimator of nabla = mu_{t+1} - mu_t over the fixed sample s0.
template <class S = double>
Estimate<S> panel_change(std::span<const UnitId> s0, const TwoWavePopulation& tw,
                         const InitialDesign& design) {
  const auto probs = InitialProbs<S>::make(design, tw.base);
  Estimate<S> est;
  est.kind = EstimateKind::panel;
  const S inv_n = S(1) / S(tw.base.n_units());
  S sum(0);
  for (UnitId u : s0) {
    const int d = tw.d[static_cast<std::size_t>(u)];
    if (d != 0) sum += S(d) / probs.unit_pi(tw.base.is_case(u));
  }
  est.value = inv_n * sum;
  est.variance = panel_variance_analytic<S>(tw, design);
  return est;
}

template <class S = double>
S pacs_variance_analytic(const TwoWavePopulation& tw, const InitialDesign& design) {
  const S v1 = acs_variance_analytic<S>(design, tw.base, tw.base.networks());
  const S v2 = acs_variance_analytic<S>(design, tw.base, tw.evolved.networks());
  const S cov = acs_cross_covariance<S>(design, tw.base, tw.base.networks(), tw.evolved.networks());
  const S n = S(tw.base.n_units());
  return (v1 + v2 - S(2) * cov) / (n * n);
}

// Panel-ACS estimator: the difference of the per-time HT prevalence
// estimates, both traced from the same s0.
template <class S = double>
Estimate<S> pacs_change(const TraceSample& s_t, const TraceSample& s_t1, const TwoWavePopulation& tw,
                        const InclusionTable<S>& incl_t, const InclusionTable<S>& incl_t1) {
  if (!s_t.network_exhaustive || !s_t1.network_exhaustive)
    throw EstimationError("pacs_change: both samples must come from ACS tracing");
  Estimate<S> est;
  est.kind = EstimateKind::pacs;
  const S n = S(tw.base.n_units());
  S at_t(0), at_t1(0);
  for (int net : s_t.sampled_networks(tw.base))
    at_t += S(tw.base.networks()[static_cast<std::size_t>(net)].y_total) /
            incl_t.network_first[static_cast<std::size_t>(net)];
  for (int net : s_t1.sampled_networks(tw.evolved))
    at_t1 += S(tw.evolved.networks()[static_cast<std::size_t>(net)].y_total) /
             incl_t1.network_first[static_cast<std::size_t>(net)];
  est.value = at_t1 / n - at_t / n;
  est.variance = pacs_variance_analytic<S>(tw, incl_t.design);
  return est;
}

// Variance of the iACS estimator viewed as an HT estimator over s(t) with
// values v_i = y_{i,t+1}/N - y_{i,t}/N; only changed units contribute.
template <class S = double>
S iacs_variance_analytic(const TwoWavePopulation& tw, const InitialDesign& design) {
  ExclusionCache<S> cache(InitialProbs<S>::make(design, tw.base));
  const auto& probs = cache.probs();
  struct Changed {
    UnitId id;
    int v;           // +-1
    bool was_case;   // status at t
    int net;         // t1 network id for cases
    std::int64_t c;  // composition of beta
    std::int64_t nc;
  };
  std::vector<Changed> ch;
  for (UnitId i = 0; i < tw.base.n_units(); ++i) {
    const int d = tw.d[static_cast<std::size_t>(i)];
    if (d == 0) continue;
    Changed c;
    c.id = i;
    c.v = d;
    c.was_case = tw.base.is_case(i);
    c.net = c.was_case ? tw.base.network_of(i) : -1;
    if (c.was_case) {
      const auto& net = tw.base.networks()[static_cast<std::size_t>(c.net)];
      const auto comp = detail::composition<S>(tw.base, std::span<const UnitId>(net.members));
      c.c = comp.first;
      c.nc = comp.second;
    } else {
      c.c = 0;
      c.nc = 1;
    }
    ch.push_back(c);
  }
  const auto pi_of = [&](const Changed& x) -> S {
    if (x.was_case) return S(1) - cache.exclusion(x.c, x.nc);
    return probs.unit_pi(false);
  };
  S total(0);
  for (std::size_t i = 0; i < ch.size(); ++i) {
    const S pi = pi_of(ch[i]);
    total += (S(1) / pi - S(1));  // v_i^2 = 1
  }
  for (std::size_t i = 0; i < ch.size(); ++i) {
    const S pi_i = pi_of(ch[i]);
    for (std::size_t j = i + 1; j < ch.size(); ++j) {
      const S pi_j = pi_of(ch[j]);
      S joint;
      if (ch[i].was_case && ch[j].was_case && ch[i].net == ch[j].net) {
        joint = pi_i;  // co-network cases are sampled together
      } else {
        // the beta sets are disjoint here, so the union composition adds
        const S exu = cache.exclusion(ch[i].c + ch[j].c, ch[i].nc + ch[j].nc);
        if (!ch[i].was_case && !ch[j].was_case)
          joint = S(1) - cache.exclusion(0, 1) - cache.exclusion(0, 1) + exu;
        else
          joint = pi_of(ch[i]) + pi_of(ch[j]) + exu - S(1);
      }
      const S term = (joint / (pi_i * pi_j) - S(1)) * S(ch[i].v) * S(ch[j].v);
      total += S(2) * term;
    }
  }
  const S n = S(tw.base.n_units());
  return total / (n * n);
}

// Iterated-ACS estimator of nabla. The bracketed Hansen-Hurwitz term
// estimates theta_{t+1} from y_{t+1} observed on s(t): time-t cases carry
// their network inclusion probability at t, time-t noncases their initial
// probability. y_next must align with s_t.final_units.
template <class S = double>
Estimate<S> iacs_change(const TraceSample& s_t, std::span<const int> y_next,
                        const TwoWavePopulation& tw, const InclusionTable<S>& incl_t) {
  if (!s_t.network_exhaustive) throw EstimationError("iacs_change: s(t) must come from ACS tracing");
  if (y_next.size() != s_t.final_units.size())
    throw ConfigError("iacs_change: y_next must cover every unit of s(t)");
  Estimate<S> est;
  est.kind = EstimateKind::iacs;
  const S n = S(tw.base.n_units());
  S hh(0), ht_t(0);
  for (std::size_t i = 0; i < s_t.final_units.size(); ++i) {
    const UnitId u = s_t.final_units[i];
    if (tw.base.is_case(u)) {
      const S pi = incl_t.network_first[static_cast<std::size_t>(tw.base.network_of(u))];
      hh += S(y_next[i]) / pi;
      ht_t += S(tw.base.y(u)) / pi;
    } else {
      hh += S(y_next[i]) / incl_t.unit_initial[static_cast<std::size_t>(u)];
    }
  }
  est.value = hh / n - ht_t / n;
  est.variance = iacs_variance_analytic<S>(tw, incl_t.design);
  return est;
}

template <class S = double>
Estimate<S> iacs_change(const TraceSample& s_t, const TwoWavePopulation& tw,
                        const InclusionTable<S>& incl_t) {
  std::vector<int> y_next;
  y_next.reserve(s_t.final_units.size());
  for (UnitId u : s_t.final_units) y_next.push_back(tw.evolved.y(u));
  return iacs_change<S>(s_t, y_next, tw, incl_t);
}

}  // namespace acstrace

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "acstrace/design.hpp"
#include "acstrace/population.hpp"

namespace acstrace {

// Probability computations are templated on the scalar: double for
// production, Rational for the exact enumeration mode (N <= 64 toys).
using Rational = boost::multiprecision::cpp_rational;

template <class S>
inline S scalar_ratio(std::int64_t num, std::int64_t den) {
  if constexpr (std::is_floating_point_v<S>)
    return static_cast<S>(num) / static_cast<S>(den);
  else
    return S(num, den);
}

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.template convert_to<double>(); }

// SRS exclusion probability of a b-element set:
//   C(N-b, m) / C(N, m) = prod_{i=0}^{b-1} (N - m - i) / (N - i).
// The product form is overflow-free for any N, m and exact for rationals.
template <class S>
S srs_exclusion(std::int64_t n_units, std::int64_t m, std::int64_t b) {
  if (b <= 0) return S(1);
  if (b > n_units - m) return S(0);
  S r(1);
  for (std::int64_t i = 0; i < b; ++i) r *= scalar_ratio<S>(n_units - m - i, n_units - i);
  return r;
}

// Initial-design probabilities resolved against the population the sample is
// drawn from. Under Poisson designs every unit keeps the inclusion
// probability of its case status at draw time, which is what cross-time
// exclusion probabilities must use.
template <class S>
struct InitialProbs {
  InitialDesign::Kind kind = InitialDesign::Kind::srs;
  std::int64_t n_units = 0;
  std::int64_t m = 0;
  S p_case{};  // Poisson only
  S p_non{};

  static InitialProbs make(const InitialDesign& design, const PopulationGraph& base) {
    design.validate(base.n_units());
    InitialProbs p;
    p.kind = design.kind;
    p.n_units = base.n_units();
    p.m = design.m;
    if (design.kind == InitialDesign::Kind::poisson_size_biased) {
      S eta;
      if constexpr (std::is_floating_point_v<S>)
        eta = design.eta;
      else
        eta = Rational(design.eta);  // exact binary expansion of the double
      const S denom = S(p.n_units) + (eta - S(1)) * S(base.theta_units());
      p.p_non = S(design.m) / denom;
      p.p_case = eta * p.p_non;
      if (to_double(p.p_case) > 1.0) throw ConfigError("initial design: case probability exceeds 1");
    }
    return p;
  }

  S unit_pi(bool is_case) const {
    if (kind == InitialDesign::Kind::srs) return scalar_ratio<S>(m, n_units);
    return is_case ? p_case : p_non;
  }

  // Exclusion probability of a set with the given case/noncase composition.
  S exclusion(std::int64_t cases, std::int64_t noncases) const {
    if (kind == InitialDesign::Kind::srs) return srs_exclusion<S>(n_units, m, cases + noncases);
    S r(1);
    const S qc = S(1) - p_case;
    const S qn = S(1) - p_non;
    for (std::int64_t i = 0; i < cases; ++i) r *= qc;
    for (std::int64_t i = 0; i < noncases; ++i) r *= qn;
    return r;
  }
};

// Grow-on-demand exclusion table for hot loops; one instance per thread.
template <class S>
class ExclusionCache {
 public:
  ExclusionCache() = default;
  explicit ExclusionCache(InitialProbs<S> probs) : probs_(std::move(probs)) {
    by_size_.push_back(S(1));
    case_pow_.push_back(S(1));
    non_pow_.push_back(S(1));
  }

  const InitialProbs<S>& probs() const { return probs_; }

  // SRS: exclusion by |B|; Poisson: exclusion of (cases, noncases).
  S exclusion(std::int64_t cases, std::int64_t noncases) {
    if (probs_.kind == InitialDesign::Kind::srs) return srs_by_size(cases + noncases);
    return pow_case(cases) * pow_non(noncases);
  }

  S srs_by_size(std::int64_t b) {
    if (b < 0) b = 0;
    while (static_cast<std::int64_t>(by_size_.size()) <= b) {
      const std::int64_t s = static_cast<std::int64_t>(by_size_.size());
      const std::int64_t num = probs_.n_units - probs_.m - (s - 1);
      if (num <= 0)
        by_size_.push_back(S(0));
      else
        by_size_.push_back(by_size_.back() * scalar_ratio<S>(num, probs_.n_units - (s - 1)));
    }
    return by_size_[static_cast<std::size_t>(b)];
  }

 private:
  S pow_case(std::int64_t e) {
    while (static_cast<std::int64_t>(case_pow_.size()) <= e)
      case_pow_.push_back(case_pow_.back() * (S(1) - probs_.p_case));
    return case_pow_[static_cast<std::size_t>(e)];
  }
  S pow_non(std::int64_t e) {
    while (static_cast<std::int64_t>(non_pow_.size()) <= e)
      non_pow_.push_back(non_pow_.back() * (S(1) - probs_.p_non));
    return non_pow_[static_cast<std::size_t>(e)];
  }

  InitialProbs<S> probs_;
  std::vector<S> by_size_;
  std::vector<S> case_pow_;
  std::vector<S> non_pow_;
};

namespace detail {

// case/noncase composition of a unit set w.r.t. the draw-time population
template <class S>
std::pair<std::int64_t, std::int64_t> composition(const PopulationGraph& base, std::span<const UnitId> b) {
  std::int64_t cases = 0, noncases = 0;
  for (UnitId u : b) {
    if (u < 0 || u >= base.n_units()) throw ConfigError("inclusion: unit id out of range");
    (base.is_case(u) ? cases : noncases) += 1;
  }
  return {cases, noncases};
}

inline std::vector<UnitId> sorted_unique(std::span<const UnitId> b) {
  std::vector<UnitId> v(b.begin(), b.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// |union| composition of two sorted-unique sets
template <class S>
std::pair<std::int64_t, std::int64_t> union_composition(const PopulationGraph& base,
                                                        std::span<const UnitId> a,
                                                        std::span<const UnitId> b) {
  std::int64_t cases = 0, noncases = 0;
  std::size_t i = 0, j = 0;
  auto take = [&](UnitId u) { (base.is_case(u) ? cases : noncases) += 1; };
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i] < b[j]))
      take(a[i++]);
    else if (i == a.size() || b[j] < a[i])
      take(b[j++]);
    else {
      take(a[i]);
      ++i;
      ++j;
    }
  }
  return {cases, noncases};
}

}  // namespace detail

// Probability that none of B enters the initial sample.
template <class S = double>
S exclusion_prob(const InitialDesign& design, const PopulationGraph& base, std::span<const UnitId> b) {
  const auto probs = InitialProbs<S>::make(design, base);
  const auto uniq = detail::sorted_unique(b);
  const auto [c, n] = detail::composition<S>(base, uniq);
  return probs.exclusion(c, n);
}

// pi_(kappa) = 1 - exclusion(beta_kappa): probability the network intersects s0.
template <class S = double>
S network_inclusion(const InitialDesign& design, const PopulationGraph& base,
                    std::span<const UnitId> members) {
  return S(1) - exclusion_prob<S>(design, base, members);
}

template <class S = double>
S network_inclusion(const InitialDesign& design, const PopulationGraph& base, const CaseNetwork& net) {
  return network_inclusion<S>(design, base, std::span<const UnitId>(net.members));
}

// pi_(kappa ell) = 1 - ex(beta_k) - ex(beta_l) + ex(beta_k u beta_l).
// Members may overlap (cross-time networks); the union handles it.
template <class S = double>
S network_joint_inclusion(const InitialDesign& design, const PopulationGraph& base,
                          std::span<const UnitId> members_a, std::span<const UnitId> members_b) {
  const auto probs = InitialProbs<S>::make(design, base);
  const auto a = detail::sorted_unique(members_a);
  const auto b = detail::sorted_unique(members_b);
  const auto [ca, na] = detail::composition<S>(base, a);
  const auto [cb, nb] = detail::composition<S>(base, b);
  const auto [cu, nu] = detail::union_composition<S>(base, a, b);
  return S(1) - probs.exclusion(ca, na) - probs.exclusion(cb, nb) + probs.exclusion(cu, nu);
}

// Joint inclusion probability of two units in the ACS sample s(t), by the
// four-branch formula on their time-t case statuses. pop_t must be the
// population the initial design drew from.
template <class S = double>
S iacs_joint_inclusion(const InitialDesign& design, const PopulationGraph& pop_t, UnitId i, UnitId j) {
  if (i == j) throw ConfigError("iacs_joint_inclusion: i and j must differ");
  const auto probs = InitialProbs<S>::make(design, pop_t);
  const bool yi = pop_t.is_case(i);
  const bool yj = pop_t.is_case(j);
  const auto beta = [&](UnitId u, bool is_case) -> std::vector<UnitId> {
    if (!is_case) return {u};
    return pop_t.networks()[static_cast<std::size_t>(pop_t.network_of(u))].members;
  };
  const auto bi = beta(i, yi);
  const auto bj = beta(j, yj);
  const auto [ci, ni] = detail::composition<S>(pop_t, bi);
  const auto [cj, nj] = detail::composition<S>(pop_t, bj);
  const auto [cu, nu] = detail::union_composition<S>(pop_t, bi, bj);
  const S pi_i = yi ? S(1) - probs.exclusion(ci, ni) : probs.unit_pi(false);
  const S pi_j = yj ? S(1) - probs.exclusion(cj, nj) : probs.unit_pi(false);
  if (!yi && !yj) {
    // plain second-order initial inclusion of {i, j}
    return S(1) - probs.exclusion(0, 1) - probs.exclusion(0, 1) + probs.exclusion(cu, nu);
  }
  return pi_i + pi_j + probs.exclusion(cu, nu) - S(1);
}

// First- and second-order inclusion probabilities for one (design,
// population) pair; built once and shared read-only.
template <class S>
struct InclusionTable {
  InitialDesign design;
  std::vector<S> unit_initial;    // pi_i
  std::vector<S> network_first;   // pi_(kappa)
  std::vector<S> network_second;  // row-major MxM, empty unless requested

  bool has_second_order() const { return !network_second.empty(); }
  std::size_t n_networks() const { return network_first.size(); }
  const S& joint(std::size_t a, std::size_t b) const {
    return network_second[a * n_networks() + b];
  }
};

// Networks and probabilities from the same snapshot (prob_base == network
// source). The cross-time variant below reads the networks from a later
// snapshot while keeping the draw-time probabilities.
template <class S = double>
InclusionTable<S> build_inclusion_table_cross_time(const InitialDesign& design,
                                                   const PopulationGraph& prob_base,
                                                   const PopulationGraph& network_pop,
                                                   bool second_order = false) {
  const auto probs = InitialProbs<S>::make(design, prob_base);
  ExclusionCache<S> cache(probs);
  InclusionTable<S> table;
  table.design = design;
  table.unit_initial.reserve(static_cast<std::size_t>(prob_base.n_units()));
  for (UnitId i = 0; i < prob_base.n_units(); ++i)
    table.unit_initial.push_back(probs.unit_pi(prob_base.is_case(i)));
  const auto& nets = network_pop.networks();
  std::vector<std::pair<std::int64_t, std::int64_t>> comp;
  comp.reserve(nets.size());
  table.network_first.reserve(nets.size());
  for (const auto& net : nets) {
    comp.push_back(detail::composition<S>(prob_base, std::span<const UnitId>(net.members)));
    table.network_first.push_back(S(1) - cache.exclusion(comp.back().first, comp.back().second));
  }
  if (second_order) {
    const std::size_t m = nets.size();
    table.network_second.assign(m * m, S(0));
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a; b < m; ++b) {
        S v;
        if (a == b) {
          v = table.network_first[a];
        } else {
          const S exa = cache.exclusion(comp[a].first, comp[a].second);
          const S exb = cache.exclusion(comp[b].first, comp[b].second);
          // distinct same-time networks are disjoint
          const S exu = cache.exclusion(comp[a].first + comp[b].first, comp[a].second + comp[b].second);
          v = S(1) - exa - exb + exu;
        }
        table.network_second[a * m + b] = v;
        table.network_second[b * m + a] = v;
      }
    }
  }
  return table;
}

template <class S = double>
InclusionTable<S> build_inclusion_table(const InitialDesign& design, const PopulationGraph& pop,
                                        bool second_order = false) {
  return build_inclusion_table_cross_time<S>(design, pop, pop, second_order);
}

}  // namespace acstrace

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace acstrace {

// All randomness in the library flows through RngStream. The engine is
// std::mt19937_64 (bit-exact across platforms by the standard); every
// distribution on top of it is implemented here, because the std
// distribution classes are implementation-defined and would break
// reproducibility guarantees.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stable sub-stream seed from (master seed, stream salt, index). Replicates
// seeded this way are independent of execution order and thread placement.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt,
                                    std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ salt) ^ index);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased via masked rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(n - 1);
    for (;;) {
      const std::uint64_t v = eng_() & mask;
      if (v < n) return v;
    }
  }

  bool bernoulli(double p) { return next_unit() < p; }

 private:
  std::mt19937_64 eng_;
};

// Without-replacement m-subsets of {0,...,N-1} by partial Fisher-Yates.
// The pool is restored after every draw, so results depend only on the
// RngStream handed in, never on previous draws.
class SubsetSampler {
 public:
  explicit SubsetSampler(std::int64_t n) : pool_(static_cast<std::size_t>(n)) {
    for (std::int64_t i = 0; i < n; ++i) pool_[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
  }

  std::int64_t universe_size() const { return static_cast<std::int64_t>(pool_.size()); }

  void draw(std::int64_t m, RngStream& rng, std::vector<std::int32_t>& out) {
    const std::int64_t n = universe_size();
    if (m < 0 || m > n) throw std::invalid_argument("SubsetSampler: m out of range");
    swaps_.clear();
    out.resize(static_cast<std::size_t>(m));
    for (std::int64_t j = 0; j < m; ++j) {
      const std::int64_t r = j + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n - j)));
      std::swap(pool_[static_cast<std::size_t>(j)], pool_[static_cast<std::size_t>(r)]);
      swaps_.push_back(static_cast<std::int32_t>(r));
      out[static_cast<std::size_t>(j)] = pool_[static_cast<std::size_t>(j)];
    }
    for (std::int64_t j = m - 1; j >= 0; --j)
      std::swap(pool_[static_cast<std::size_t>(j)], pool_[static_cast<std::size_t>(swaps_[static_cast<std::size_t>(j)])]);
  }

 private:
  std::vector<std::int32_t> pool_;
  std::vector<std::int32_t> swaps_;
};

// Walker alias table for small discrete distributions (household sizes).
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(const std::vector<double>& weights) {
    const std::size_t k = weights.size();
    if (k == 0) throw std::invalid_argument("AliasTable: empty weights");
    double total = 0;
    for (double w : weights) {
      if (w < 0) throw std::invalid_argument("AliasTable: negative weight");
      total += w;
    }
    if (total <= 0) throw std::invalid_argument("AliasTable: zero total weight");
    prob_.assign(k, 0.0);
    alias_.assign(k, 0);
    std::vector<double> scaled(k);
    for (std::size_t i = 0; i < k; ++i) scaled[i] = weights[i] * static_cast<double>(k) / total;
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < k; ++i)
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      const std::uint32_t l = large.back();
      small.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::uint32_t i : large) prob_[i] = 1.0;
    for (std::uint32_t i : small) prob_[i] = 1.0;
  }

  std::size_t size() const { return prob_.size(); }

  std::uint32_t sample(RngStream& rng) const {
    const std::uint32_t i = static_cast<std::uint32_t>(rng.below(prob_.size()));
    return rng.next_unit() < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

// Binomial(n, p) sampling by CDF inversion over a windowed table. The window
// covers the mode +- max(48, 16*sigma), leaving tail mass far below any
// attainable replicate count. Table construction is a pure function of
// (n, p), so concurrent builders agree bit for bit.
class BinomialSampler {
 public:
  BinomialSampler() = default;

  BinomialSampler(std::int64_t n, double p) : n_(n), p_(p) {
    if (n < 0 || p < 0.0 || p > 1.0) throw std::invalid_argument("BinomialSampler: bad parameters");
    if (n == 0 || p == 0.0) {
      lo_ = 0;
      cdf_ = {1.0};
      return;
    }
    if (p == 1.0) {
      lo_ = n;
      cdf_ = {1.0};
      return;
    }
    const double mean = static_cast<double>(n) * p;
    const double sigma = std::sqrt(mean * (1.0 - p));
    const std::int64_t half = std::max<std::int64_t>(48, static_cast<std::int64_t>(16.0 * sigma) + 1);
    const std::int64_t mode = std::min<std::int64_t>(n, static_cast<std::int64_t>((static_cast<double>(n) + 1) * p));
    lo_ = std::max<std::int64_t>(0, mode - half);
    const std::int64_t hi = std::min<std::int64_t>(n, mode + half);
    const std::size_t len = static_cast<std::size_t>(hi - lo_ + 1);
    std::vector<double> pmf(len);
    for (std::size_t i = 0; i < len; ++i) {
      const double k = static_cast<double>(lo_ + static_cast<std::int64_t>(i));
      const double nn = static_cast<double>(n);
      const double logp = std::lgamma(nn + 1) - std::lgamma(k + 1) - std::lgamma(nn - k + 1) +
                          k * std::log(p) + (nn - k) * std::log1p(-p);
      pmf[i] = std::exp(logp);
    }
    cdf_.resize(len);
    double acc = 0;
    for (std::size_t i = 0; i < len; ++i) {
      acc += pmf[i];
      cdf_[i] = acc;
    }
    const double norm = cdf_.back();
    for (double& c : cdf_) c /= norm;
  }

  std::int64_t sample(RngStream& rng) const {
    const double u = rng.next_unit();
    const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t i = it == cdf_.end() ? cdf_.size() - 1 : static_cast<std::size_t>(it - cdf_.begin());
    return lo_ + static_cast<std::int64_t>(i);
  }

  std::int64_t n() const { return n_; }
  double p() const { return p_; }

 private:
  std::int64_t n_ = 0;
  double p_ = 0.0;
  std::int64_t lo_ = 0;
  std::vector<double> cdf_;
};

}  // namespace acstrace

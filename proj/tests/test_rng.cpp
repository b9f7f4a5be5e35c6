#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "acstrace/rng.hpp"

using namespace acstrace;

TEST_CASE("derive_seed decorrelates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {1ull, 2ull, 42ull})
    for (std::uint64_t salt : {0ull, 7ull})
      for (std::uint64_t r = 0; r < 50; ++r) seen.insert(derive_seed(master, salt, r));
  CHECK(seen.size() == 3 * 2 * 50);
}

TEST_CASE("below is unbiased over small ranges") {
  RngStream rng(123);
  std::map<std::uint64_t, int> counts;
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) ++counts[rng.below(6)];
  for (const auto& [v, c] : counts) {
    CHECK(v < 6);
    CHECK(c > draws / 6 - 600);
    CHECK(c < draws / 6 + 600);
  }
}

TEST_CASE("subset sampler draws uniform subsets and restores its pool") {
  SubsetSampler sampler(5);
  RngStream rng(9);
  std::map<std::set<std::int32_t>, int> counts;
  const int draws = 50000;
  std::vector<std::int32_t> out;
  for (int i = 0; i < draws; ++i) {
    sampler.draw(2, rng, out);
    counts[{out.begin(), out.end()}]++;
  }
  CHECK(counts.size() == 10);  // C(5,2)
  for (const auto& [s, c] : counts) {
    CHECK(c > draws / 10 - 700);
    CHECK(c < draws / 10 + 700);
  }
  // restored pool: a fixed-seed draw gives the same subset again
  RngStream a(4), b(4);
  std::vector<std::int32_t> x, y;
  sampler.draw(3, a, x);
  sampler.draw(3, b, y);
  CHECK(x == y);
}

TEST_CASE("alias table matches its weights") {
  AliasTable alias({0.38, 0.30, 0.12, 0.20});
  RngStream rng(2024);
  const int draws = 200000;
  std::array<int, 4> counts{};
  for (int i = 0; i < draws; ++i) ++counts[alias.sample(rng)];
  CHECK(counts[0] / static_cast<double>(draws) == doctest::Approx(0.38).epsilon(0.02));
  CHECK(counts[1] / static_cast<double>(draws) == doctest::Approx(0.30).epsilon(0.02));
  CHECK(counts[2] / static_cast<double>(draws) == doctest::Approx(0.12).epsilon(0.04));
  CHECK(counts[3] / static_cast<double>(draws) == doctest::Approx(0.20).epsilon(0.03));
}

TEST_CASE("binomial sampler matches mean and variance") {
  const std::int64_t n = 99000;
  const double p = 0.0099;
  BinomialSampler sampler(n, p);
  RngStream rng(31);
  const int draws = 40000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < draws; ++i) {
    const double x = static_cast<double>(sampler.sample(rng));
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  CHECK(mean == doctest::Approx(n * p).epsilon(0.002));
  CHECK(var == doctest::Approx(n * p * (1 - p)).epsilon(0.05));
}

TEST_CASE("binomial sampler handles degenerate parameters") {
  RngStream rng(1);
  CHECK(BinomialSampler(0, 0.3).sample(rng) == 0);
  CHECK(BinomialSampler(10, 0.0).sample(rng) == 0);
  CHECK(BinomialSampler(10, 1.0).sample(rng) == 10);
}

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "priorgate/filter.hpp"
#include "priorgate/types.hpp"
#include "support/oracle.hpp"

using namespace priorgate;

namespace {

BlockScore make_score(BlockId id, double mu, double sigma, std::uint32_t n = 100) {
  BlockScore s;
  s.block_id = id;
  s.n_tokens = n;
  s.mu = mu;
  s.sigma = sigma;
  return s;
}

std::vector<BlockScore> random_scores(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mu(-8.0, -2.0), sigma(0.0, 0.2);
  std::uniform_int_distribution<std::uint32_t> len(64, 512);
  std::vector<BlockScore> scores;
  for (std::size_t i = 0; i < n; ++i)
    scores.push_back(make_score(rng(), mu(rng), sigma(rng), len(rng)));
  std::sort(scores.begin(), scores.end(),
            [](const auto& a, const auto& b) { return a.block_id < b.block_id; });
  return scores;
}

}  // namespace

TEST_CASE("compute_medians matches the hand examples") {
  SUBCASE("two blocks: mean of the middles") {
    const std::vector<BlockScore> scores = {make_score(1, -0.828302, 0.05),
                                            make_score(2, -1.194507, 0.07)};
    const auto m = compute_medians(scores);
    CHECK(m.m_mu == doctest::Approx(-1.011405).epsilon(1e-6));
    CHECK(m.m_sigma == doctest::Approx(0.06).epsilon(1e-12));
    CHECK(m.n_blocks == 2);
  }
  SUBCASE("single block: medians equal its scores") {
    const std::vector<BlockScore> scores = {make_score(1, -3.5, 0.01)};
    const auto m = compute_medians(scores);
    CHECK(m.m_mu == -3.5);
    CHECK(m.m_sigma == 0.01);
  }
  SUBCASE("odd count [1,2,9] -> 2") {
    const std::vector<BlockScore> scores = {make_score(1, 1, 0), make_score(2, 2, 0),
                                            make_score(3, 9, 0)};
    CHECK(compute_medians(scores).m_mu == 2.0);
  }
  SUBCASE("empty is an error") {
    CHECK_THROWS_AS(compute_medians({}), DataError);
  }
}

TEST_CASE("deltas are absolute distances") {
  const MedianPair m = {-1.011405, 0.05, 2};
  const auto d = deltas(make_score(1, -0.828302, 0.05), m);
  CHECK(d.mu == doctest::Approx(0.183103).epsilon(1e-6));
  CHECK(d.sigma == 0.0);

  SUBCASE("translation invariance of delta_mu") {
    std::vector<BlockScore> scores = random_scores(1, 51);
    auto medians = compute_medians(scores);
    std::vector<double> base;
    for (const auto& s : scores) base.push_back(deltas(s, medians).mu);
    for (auto& s : scores) s.mu += 2.5;
    medians = compute_medians(scores);
    for (std::size_t i = 0; i < scores.size(); ++i)
      CHECK(deltas(scores[i], medians).mu == doctest::Approx(base[i]).epsilon(1e-9));
  }
}

TEST_CASE("select with budget = total tokens discards nothing") {
  const auto scores = random_scores(2, 40);
  std::uint64_t total = 0;
  for (const auto& s : scores) total += s.n_tokens;
  const auto r = select(scores, compute_medians(scores), total);
  CHECK(r.k == 0);
  CHECK(r.discarded_blocks.empty());
  CHECK(r.kept_tokens == total);
}

TEST_CASE("select over budget is an error") {
  const auto scores = random_scores(3, 10);
  std::uint64_t total = 0;
  for (const auto& s : scores) total += s.n_tokens;
  CHECK_THROWS_AS(select(scores, compute_medians(scores), total + 1), DataError);
}

TEST_CASE("the four-block worked example") {
  // delta_mu ranks b3 > b1 > b2 > b4; delta_sigma ranks b2 > b3 > b1 > b4.
  // Build values around medians so that those rankings hold.
  const std::vector<BlockScore> scores = {
      make_score(1, -3.0 - 0.2, 0.10 + 0.02),   // b1
      make_score(2, -3.0 + 0.1, 0.10 + 0.08),   // b2
      make_score(3, -3.0 + 0.4, 0.10 - 0.04),   // b3
      make_score(4, -3.0 + 0.05, 0.10 - 0.01),  // b4
  };
  const auto m = compute_medians(scores);
  // 50% budget of 400 tokens
  const auto r = select(scores, m, 200);
  CHECK(r.k == 1);
  CHECK(r.discarded_blocks == std::vector<BlockId>{2, 3});
  CHECK(r.kept_blocks == std::vector<BlockId>{1, 4});
  CHECK(r.kept_tokens == 200);
}

TEST_CASE("identical scores: ties broken by block_id only") {
  std::vector<BlockScore> scores;
  for (BlockId id = 1; id <= 8; ++id) scores.push_back(make_score(id, -3.0, 0.1));
  const auto m = compute_medians(scores);
  const auto r = select(scores, m, 400);  // keep half
  CHECK(r.k == 4);  // every delta is 0; both criteria pick ids 1..4
  CHECK(r.discarded_blocks == std::vector<BlockId>{1, 2, 3, 4});
  CHECK(r.overlap_mu_sigma == 4);
}

TEST_CASE("selection accounting and nestedness across budgets") {
  const auto scores = random_scores(5, 300);
  const auto m = compute_medians(scores);
  std::uint64_t total = 0;
  for (const auto& s : scores) total += s.n_tokens;

  std::vector<BlockId> previous_kept;
  for (int i = 1; i <= 10; ++i) {
    const std::uint64_t budget = total * static_cast<std::uint64_t>(i) / 10;
    const auto r = select(scores, m, budget);
    CHECK(r.kept_tokens <= budget);
    CHECK(r.kept_blocks.size() + r.discarded_blocks.size() == scores.size());
    std::uint64_t kept = 0;
    for (const auto& s : scores)
      if (std::binary_search(r.kept_blocks.begin(), r.kept_blocks.end(), s.block_id))
        kept += s.n_tokens;
    CHECK(kept == r.kept_tokens);
    // nested: kept(previous smaller budget) subset of kept(this budget)
    CHECK(std::includes(r.kept_blocks.begin(), r.kept_blocks.end(),
                        previous_kept.begin(), previous_kept.end()));
    previous_kept = r.kept_blocks;
  }
}

TEST_CASE("select matches the naive linear-scan oracle") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto scores = random_scores(100 + trial, 2 + rng() % 60);
    const auto m = compute_medians(scores);
    std::uint64_t total = 0;
    for (const auto& s : scores) total += s.n_tokens;
    const std::uint64_t budget = rng() % (total + 1);
    const auto r = select(scores, m, budget);
    const auto o = oracle::select(
        std::vector<BlockScore>(scores.begin(), scores.end()), m.m_mu, m.m_sigma,
        budget);
    CHECK(r.k == o.k);
    CHECK(r.kept_tokens == o.kept_tokens);
    CHECK(std::vector<BlockId>(o.discarded.begin(), o.discarded.end()) ==
          r.discarded_blocks);
  }
}

TEST_CASE("discard-side budgets mirror keep-side budgets") {
  const auto scores = random_scores(7, 120);
  const auto m = compute_medians(scores);
  std::uint64_t total = 0;
  for (const auto& s : scores) total += s.n_tokens;
  const auto keep = select(scores, m, total / 2, BudgetSide::Keep);
  const auto discard = select(scores, m, total - total / 2, BudgetSide::Discard);
  CHECK(keep.kept_blocks == discard.kept_blocks);
  CHECK(keep.k == discard.k);
}

TEST_CASE("threshold_outliers trims exactly 2*floor(n*e/200) blocks") {
  SUBCASE("n=100, e=10 -> exactly 10") {
    const auto scores = random_scores(8, 100);
    CHECK(threshold_outliers(scores, Criterion::Mu, 10.0).size() == 10);
  }
  SUBCASE("5 largest and 5 smallest of sorted distinct values") {
    std::vector<BlockScore> scores;
    for (BlockId id = 0; id < 100; ++id)
      scores.push_back(make_score(id + 1, -10.0 + static_cast<double>(id) * 0.1, 0.0));
    const auto out = threshold_outliers(scores, Criterion::Mu, 10.0);
    CHECK(out == std::vector<BlockId>{1, 2, 3, 4, 5, 96, 97, 98, 99, 100});
  }
  SUBCASE("deterministic across runs") {
    const auto scores = random_scores(9, 333);
    CHECK(threshold_outliers(scores, Criterion::Sigma, 7.0) ==
          threshold_outliers(scores, Criterion::Sigma, 7.0));
  }
  SUBCASE("matches the naive oracle") {
    for (double e : {1.0, 5.0, 10.0, 33.0}) {
      const auto scores = random_scores(10, 217);
      std::vector<std::pair<BlockId, double>> vals;
      for (const auto& s : scores) vals.emplace_back(s.block_id, s.mu);
      CHECK(threshold_outliers(scores, Criterion::Mu, e) ==
            oracle::threshold_outliers(vals, e));
    }
  }
  SUBCASE("invariant under strictly increasing transforms") {
    auto scores = random_scores(11, 150);
    const auto before = threshold_outliers(scores, Criterion::Sigma, 10.0);
    for (auto& s : scores) s.sigma = std::exp(3.0 * s.sigma);  // strictly increasing
    CHECK(threshold_outliers(scores, Criterion::Sigma, 10.0) == before);
  }
  SUBCASE("e out of range is a usage error") {
    const auto scores = random_scores(12, 10);
    CHECK_THROWS_AS(threshold_outliers(scores, Criterion::Mu, 0.0), UsageError);
    CHECK_THROWS_AS(threshold_outliers(scores, Criterion::Mu, 100.0), UsageError);
  }
}

TEST_CASE("select is invariant under positive affine transforms of one criterion") {
  auto scores = random_scores(13, 90);
  auto m = compute_medians(scores);
  std::uint64_t total = 0;
  for (const auto& s : scores) total += s.n_tokens;
  const auto before = select(scores, m, total / 3);
  for (auto& s : scores) s.mu = 4.0 * s.mu + 1.5;
  m = compute_medians(scores);
  const auto after = select(scores, m, total / 3);
  CHECK(before.kept_blocks == after.kept_blocks);
  CHECK(before.k == after.k);
}

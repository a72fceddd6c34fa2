#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <vector>

#include <doctest.h>

#include "priorgate/analysis.hpp"
#include "priorgate/corpus_io.hpp"
#include "priorgate/filter.hpp"
#include "priorgate/prior.hpp"
#include "priorgate/scorer.hpp"
#include "priorgate/types.hpp"
#include "support/synth.hpp"

using namespace priorgate;

namespace {

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<BlockScore> random_scores(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mu(-8.0, -2.0), sigma(0.0, 0.2);
  std::vector<BlockScore> scores;
  for (std::size_t i = 0; i < n; ++i) {
    BlockScore s;
    s.block_id = rng();
    s.n_tokens = 100;
    s.mu = mu(rng);
    s.sigma = sigma(rng);
    scores.push_back(s);
  }
  std::sort(scores.begin(), scores.end(),
            [](const auto& a, const auto& b) { return a.block_id < b.block_id; });
  return scores;
}

}  // namespace

TEST_CASE("overlap_ratio is exact set arithmetic") {
  const std::vector<BlockId> f = {1, 2, 3}, ref = {2, 3, 4};
  CHECK(overlap_ratio(f, ref) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(overlap_ratio(f, f) == 1.0);
  const std::vector<BlockId> disjoint = {7, 8};
  CHECK(overlap_ratio(f, disjoint) == 0.0);
  CHECK_THROWS_AS(overlap_ratio(f, {}), DataError);
}

TEST_CASE("overlap_vs_external with itself is 1 for every e") {
  const auto scores = random_scores(1, 400);
  std::unordered_map<BlockId, double> external;
  for (const auto& s : scores) external[s.block_id] = s.mu;
  const std::vector<double> grid = {2, 10, 20};
  const auto rows = overlap_vs_external(scores, external, grid);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r.overlap_mu == 1.0);
}

TEST_CASE("overlap_vs_external under random external scores is about e/100") {
  const double e = 10.0;
  double sum = 0.0;
  int trials = 10;
  for (int seed = 0; seed < trials; ++seed) {
    const auto scores = random_scores(100 + seed, 2000);
    std::mt19937_64 rng(seed);
    std::unordered_map<BlockId, double> external;
    for (const auto& s : scores)
      external[s.block_id] = std::uniform_real_distribution<double>(0, 1)(rng);
    const std::vector<double> grid = {e};
    sum += overlap_vs_external(scores, external, grid)[0].overlap_mu;
  }
  const double mean = sum / trials;
  // outlier fraction is e/100; expected overlap of two independent sets is
  // e/100; 3 sigma over trials*n_outliers draws
  const double std3 = 3 * std::sqrt(0.1 * 0.9 / (trials * 200.0));
  CHECK(mean > 0.10 - std3);
  CHECK(mean < 0.10 + std3);
}

TEST_CASE("overlap_vs_external requires 99% coverage") {
  const auto scores = random_scores(2, 300);
  std::unordered_map<BlockId, double> external;
  for (std::size_t i = 0; i + 10 < scores.size(); ++i)
    external[scores[i].block_id] = scores[i].mu;  // ~3.3% missing
  const std::vector<double> grid = {10};
  CHECK_THROWS_AS(overlap_vs_external(scores, external, grid), DataError);
}

TEST_CASE("prior_curve exports a non-increasing curve") {
  SUBCASE("single-token table -> one row") {
    const PriorTable t({0, 4}, "t");
    const auto path = temp_file("pg_curve1.csv");
    prior_curve(t, path);
    std::ifstream in(path);
    std::string header, row, extra;
    std::getline(in, header);
    CHECK(header == "rank,token_id,log_prior");
    REQUIRE(std::getline(in, row));
    CHECK(row == "1,1,0");  // prior 1.0, log 0
    CHECK_FALSE(std::getline(in, extra));
  }
  SUBCASE("equal counts rank by token_id") {
    const PriorTable t({2, 2, 4}, "t");
    const auto path = temp_file("pg_curve2.csv");
    prior_curve(t, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line.substr(0, 4) == "1,2,");  // highest prior first
    std::getline(in, line);
    CHECK(line.substr(0, 4) == "2,0,");  // tie: smaller id first
    std::getline(in, line);
    CHECK(line.substr(0, 4) == "3,1,");
  }
  SUBCASE("Zipfian corpus curve is non-increasing") {
    auto docs = synth::zipf_corpus(3, 20000, 300, 1.1, 50, 200);
    std::vector<DocBlock> blocks;
    for (const auto& d : docs) {
      auto bs = segment(d, 128, 16);
      blocks.insert(blocks.end(), bs.begin(), bs.end());
    }
    const auto t = count_tokens(blocks, 300, "t", 2);
    const auto path = temp_file("pg_curve3.csv");
    prior_curve(t, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    double prev = 1e300;
    while (std::getline(in, line)) {
      const auto last_comma = line.rfind(',');
      const double lp = std::stod(line.substr(last_comma + 1));
      CHECK(lp <= prev);
      prev = lp;
    }
  }
}

TEST_CASE("mixture_sweep rejects an undersized minority") {
  auto majority = synth::zipf_corpus(4, 50000, 200, 1.1, 256, 512);
  auto minority = synth::zipf_corpus(5, 600, 200, 1.1, 256, 512);
  const std::vector<double> ratios = {50};
  CHECK_THROWS_AS(mixture_sweep(majority, minority, ratios, 10, 1, 128, 16, 200, 2),
                  DataError);
}

TEST_CASE("mixture_sweep is deterministic") {
  auto majority = synth::zipf_corpus(6, 60000, 200, 1.1, 256, 512);
  auto minority = synth::zipf_corpus(7, 20000, 200, 1.1, 256, 512);
  const std::vector<double> ratios = {5, 10};
  const auto r1 = mixture_sweep(majority, minority, ratios, 10, 1, 128, 16, 200, 1);
  const auto r2 = mixture_sweep(majority, minority, ratios, 10, 1, 128, 16, 200, 8);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].a == r2[i].a);
    CHECK(r1[i].minority_outlier_rate == r2[i].minority_outlier_rate);
  }
}

TEST_CASE("subsample_consistency reports overlap 1 at b=100") {
  auto docs = synth::zipf_corpus(8, 60000, 500, 1.1, 128, 512);
  const std::vector<double> grid = {50, 100};
  const auto rows = subsample_consistency(docs, grid, 10, 1, 128, 16, 500, "t", 4);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].b == 100.0);
  CHECK(rows[1].overlap_vs_full == 1.0);
  CHECK(rows[0].overlap_vs_full >= 0.0);
  CHECK(rows[0].overlap_vs_full <= 1.0);
}

// ---- DSIR -------------------------------------------------------------------

TEST_CASE("dsir unigram identity-hash features equal the prior table") {
  auto docs = synth::zipf_corpus(9, 20000, 100, 1.1, 50, 200);
  std::vector<DocBlock> blocks;
  for (const auto& d : docs) {
    auto bs = segment(d, 128, 16);
    blocks.insert(blocks.end(), bs.begin(), bs.end());
  }
  const auto table = count_tokens(blocks, 100, "t", 2);
  const auto f = dsir_features(blocks, {}, 1, table.vocab_size(), 0, true);
  const auto g = features_from_priors(table);
  REQUIRE(f.buckets.size() == g.buckets.size());
  for (std::size_t j = 0; j < f.buckets.size(); ++j)
    CHECK(f.buckets[j] == doctest::Approx(g.buckets[j]).epsilon(1e-12));
  CHECK(f.raw_total == g.raw_total);
}

TEST_CASE("dsir n=2 slices every 1..2-gram") {
  DocBlock b;
  b.block_id = 1;
  b.tokens = {0, 1};  // "a b" -> features {a, b, a b}
  const std::vector<DocBlock> blocks = {b};
  const TokenStrings strings = {"a", "b"};
  const auto f = dsir_features(blocks, strings, 2, 1 << 16, 0);
  CHECK(f.raw_total == 3);
  double sum = 0.0;
  for (double v : f.buckets) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("dsir hash seed changes buckets but preserves normalization") {
  auto docs = synth::zipf_corpus(10, 5000, 50, 1.1, 50, 200);
  std::vector<DocBlock> blocks;
  for (const auto& d : docs) {
    auto bs = segment(d, 128, 16);
    blocks.insert(blocks.end(), bs.begin(), bs.end());
  }
  const auto f1 = dsir_features(blocks, {}, 2, 512, 1);
  const auto f2 = dsir_features(blocks, {}, 2, 512, 2);
  CHECK(f1.buckets != f2.buckets);
  double s1 = 0.0, s2 = 0.0;
  for (double v : f1.buckets) s1 += v;
  for (double v : f2.buckets) s2 += v;
  CHECK(s1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s2 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("dsir_log_weight identities") {
  auto docs = synth::zipf_corpus(11, 5000, 50, 1.1, 50, 200);
  std::vector<DocBlock> blocks;
  for (const auto& d : docs) {
    auto bs = segment(d, 128, 16);
    blocks.insert(blocks.end(), bs.begin(), bs.end());
  }
  const auto f = dsir_features(blocks, {}, 2, 512, 1);

  SUBCASE("P_ref = P_raw gives log w = 0 everywhere") {
    for (const auto& b : blocks) CHECK(dsir_log_weight(b, {}, f, f) == 0.0);
  }
  SUBCASE("ref-only vocabulary block has positive log weight") {
    DocBlock alien;
    alien.block_id = 99;
    alien.tokens = {400, 401, 402, 403};
    std::vector<DocBlock> ref_blocks = blocks;
    ref_blocks.push_back(alien);
    const auto ref = dsir_features(ref_blocks, {}, 2, 512, 1);
    CHECK(dsir_log_weight(alien, {}, f, ref) > 0.0);
  }
  SUBCASE("mismatched feature configs are fatal") {
    const auto other_m = dsir_features(blocks, {}, 2, 256, 1);
    const auto other_seed = dsir_features(blocks, {}, 2, 512, 9);
    CHECK_THROWS_AS(dsir_log_weight(blocks[0], {}, f, other_m), DataError);
    CHECK_THROWS_AS(dsir_log_weight(blocks[0], {}, f, other_seed), DataError);
  }
}

TEST_CASE("dsir weights match hand arithmetic on a 4-bucket toy") {
  // identity hash, m=4: bucket == token id
  auto dist = [](std::vector<double> buckets, std::uint64_t raw_total) {
    FeatureDistribution f;
    f.buckets = std::move(buckets);
    f.ngram_order = 1;
    f.hash_seed = 0;
    f.identity_hash = true;
    f.raw_total = raw_total;
    return f;
  };
  const auto raw = dist({0.4, 0.3, 0.2, 0.1}, 100);
  const auto ref = dist({0.1, 0.2, 0.3, 0.4}, 100);

  DocBlock b;
  b.block_id = 1;
  b.tokens = {0, 0, 3};  // d = [2, 0, 0, 1]
  const double expected =
      2 * (std::log(0.1) - std::log(0.4)) + 1 * (std::log(0.4) - std::log(0.1));
  CHECK(dsir_log_weight(b, {}, raw, ref) == doctest::Approx(expected).epsilon(1e-12));

  DocBlock c;
  c.block_id = 2;
  c.tokens = {1, 2, 2};  // d = [0, 1, 2, 0]
  const double expected_c =
      1 * (std::log(0.2) - std::log(0.3)) + 2 * (std::log(0.3) - std::log(0.2));
  CHECK(dsir_log_weight(c, {}, raw, ref) == doctest::Approx(expected_c).epsilon(1e-12));
}

TEST_CASE("dsir unigram identity-hash weight reduces to prior-lookup sums") {
  auto raw_docs = synth::zipf_corpus(12, 8000, 50, 1.1, 50, 200);
  auto ref_docs = synth::zipf_corpus(13, 8000, 50, 1.3, 50, 200);
  std::vector<DocBlock> raw_blocks, ref_blocks;
  for (const auto& d : raw_docs) {
    auto bs = segment(d, 128, 16);
    raw_blocks.insert(raw_blocks.end(), bs.begin(), bs.end());
  }
  for (const auto& d : ref_docs) {
    auto bs = segment(d, 128, 16);
    ref_blocks.insert(ref_blocks.end(), bs.begin(), bs.end());
  }
  const auto p_raw = count_tokens(raw_blocks, 50, "t", 2);
  const auto p_ref = count_tokens(ref_blocks, 50, "t", 2);
  const auto f_raw = features_from_priors(p_raw);
  const auto f_ref = features_from_priors(p_ref);

  for (std::size_t i = 0; i < std::min<std::size_t>(raw_blocks.size(), 100); ++i) {
    const auto& b = raw_blocks[i];
    double expected = 0.0;
    for (TokenId t : b.tokens) {
      const double ref_p = p_ref.count(t) > 0 ? p_ref.prior(t)
                                              : 0.5 / static_cast<double>(p_ref.total());
      const double raw_p = p_raw.count(t) > 0 ? p_raw.prior(t)
                                              : 0.5 / static_cast<double>(p_raw.total());
      expected += std::log(ref_p) - std::log(raw_p);
    }
    CHECK(std::abs(dsir_log_weight(b, {}, f_raw, f_ref) - expected) <= 1e-9);
  }
}

TEST_CASE("dsir_select keeps highest-weight blocks within the budget") {
  std::vector<DocBlock> blocks(4);
  for (std::size_t i = 0; i < 4; ++i) {
    blocks[i].block_id = i + 1;
    blocks[i].tokens.assign(10, 0);
  }
  std::vector<std::pair<const DocBlock*, double>> weighted = {
      {&blocks[0], 0.5}, {&blocks[1], 2.0}, {&blocks[2], -1.0}, {&blocks[3], 0.5}};
  CHECK(dsir_select(weighted, 30) == std::vector<BlockId>{1, 2, 4});
  CHECK(dsir_select(weighted, 25) == std::vector<BlockId>{1, 2});  // tie: id 1 first
  CHECK(dsir_select(weighted, 5).empty());
}

TEST_CASE("dsir argument validation") {
  std::vector<DocBlock> blocks(1);
  blocks[0].block_id = 1;
  blocks[0].tokens = {0, 1};
  CHECK_THROWS_AS(dsir_features({}, {}, 2, 16, 0), DataError);
  CHECK_THROWS_AS(dsir_features(blocks, {}, 3, 16, 0), UsageError);
  CHECK_THROWS_AS(dsir_features(blocks, {}, 0, 16, 0), UsageError);
  CHECK_THROWS_AS(dsir_features(blocks, {}, 2, 0, 0), UsageError);
}

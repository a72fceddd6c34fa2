#include "priorgate/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "priorgate/corpus_io.hpp"
#include "priorgate/filter.hpp"
#include "priorgate/hash.hpp"
#include "priorgate/scorer.hpp"

namespace priorgate {

double overlap_ratio(std::span<const BlockId> f, std::span<const BlockId> f_ref) {
  if (f_ref.empty()) throw DataError("overlap_ratio: reference set is empty");
  std::size_t common = 0;
  std::size_t i = 0, j = 0;
  while (i < f.size() && j < f_ref.size()) {
    if (f[i] < f_ref[j]) {
      ++i;
    } else if (f_ref[j] < f[i]) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(common) / static_cast<double>(f_ref.size());
}

std::vector<OverlapRow> overlap_vs_external(
    std::span<const BlockScore> scores,
    const std::unordered_map<BlockId, double>& external,
    std::span<const double> e_grid) {
  std::vector<const BlockScore*> matched;
  std::vector<BlockId> missing;
  matched.reserve(scores.size());
  for (const auto& s : scores) {
    if (external.count(s.block_id))
      matched.push_back(&s);
    else
      missing.push_back(s.block_id);
  }
  if (matched.size() <
      static_cast<std::size_t>(0.99 * static_cast<double>(scores.size()))) {
    std::ostringstream msg;
    msg << "external scores cover only " << matched.size() << "/" << scores.size()
        << " block ids; first missing:";
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i)
      msg << ' ' << missing[i];
    throw DataError(msg.str());
  }

  std::vector<std::pair<BlockId, double>> mu_vals, sigma_vals, ext_vals;
  mu_vals.reserve(matched.size());
  sigma_vals.reserve(matched.size());
  ext_vals.reserve(matched.size());
  for (const auto* s : matched) {
    mu_vals.emplace_back(s->block_id, s->mu);
    sigma_vals.emplace_back(s->block_id, s->sigma);
    ext_vals.emplace_back(s->block_id, external.at(s->block_id));
  }

  std::vector<OverlapRow> rows;
  for (double e : e_grid) {
    const auto f_mu = threshold_outliers_values(mu_vals, e);
    const auto f_sigma = threshold_outliers_values(sigma_vals, e);
    const auto f_ext = threshold_outliers_values(ext_vals, e);
    rows.push_back({e, overlap_ratio(f_mu, f_ext), overlap_ratio(f_sigma, f_ext)});
  }
  return rows;
}

void prior_curve(const PriorTable& table, const std::string& out_path) {
  if (table.total() == 0) throw DataError("cannot export curve of empty prior table");
  std::vector<std::pair<double, TokenId>> rows;  // (log_prior, token_id)
  for (std::size_t id = 0; id < table.vocab_size(); ++id) {
    if (table.count(static_cast<TokenId>(id)) > 0)
      rows.emplace_back(table.log_prior(static_cast<TokenId>(id)),
                        static_cast<TokenId>(id));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw DataError("cannot open curve file for writing: " + out_path);
  out << "rank,token_id,log_prior\n";
  for (std::size_t r = 0; r < rows.size(); ++r)
    out << (r + 1) << ',' << rows[r].second << ',' << format_float(rows[r].first)
        << '\n';
  out.flush();
  if (!out) {
    out.close();
    std::error_code ec;
    std::filesystem::remove(out_path, ec);
    throw DataError("failed writing curve file: " + out_path);
  }
}

namespace {

std::vector<DocBlock> segment_all(std::span<const Document> docs,
                                  std::size_t block_size, std::size_t min_block) {
  std::vector<DocBlock> blocks;
  for (const auto& d : docs) {
    auto bs = segment(d, block_size, min_block);
    blocks.insert(blocks.end(), std::make_move_iterator(bs.begin()),
                  std::make_move_iterator(bs.end()));
  }
  return blocks;
}

}  // namespace

std::vector<MixtureRow> mixture_sweep(std::span<const Document> majority,
                                      std::span<const Document> minority,
                                      std::span<const double> ratios, double e,
                                      std::uint64_t seed, std::size_t block_size,
                                      std::size_t min_block_tokens,
                                      std::size_t vocab_size, int threads) {
  auto majority_blocks = segment_all(majority, block_size, min_block_tokens);
  std::uint64_t majority_tokens = 0;
  for (const auto& b : majority_blocks) majority_tokens += b.tokens.size();
  if (majority_tokens == 0) throw DataError("majority corpus yields no blocks");

  std::uint64_t minority_total = 0;
  for (const auto& d : minority) minority_total += d.tokens.size();

  // deterministic minority order, keyed on (seed, doc_id)
  std::vector<std::size_t> minority_order(minority.size());
  std::iota(minority_order.begin(), minority_order.end(), 0);
  std::sort(minority_order.begin(), minority_order.end(),
            [&](std::size_t a, std::size_t b) {
              const auto ha = hash_pair(seed, minority[a].doc_id);
              const auto hb = hash_pair(seed, minority[b].doc_id);
              if (ha != hb) return ha < hb;
              return minority[a].doc_id < minority[b].doc_id;
            });

  std::vector<MixtureRow> rows;
  for (double a : ratios) {
    const auto target = static_cast<std::uint64_t>(
        static_cast<double>(majority_tokens) * a / 100.0);
    if (minority_total < target) {
      const double max_a =
          100.0 * static_cast<double>(minority_total) / static_cast<double>(majority_tokens);
      throw DataError("minority corpus too small for a=" + format_float(a) +
                      "%; max achievable a=" + format_float(max_a) + "%");
    }

    std::vector<DocBlock> blocks = majority_blocks;
    const std::size_t n_majority_blocks = blocks.size();
    std::uint64_t cum = 0;
    for (std::size_t idx : minority_order) {
      if (cum >= target) break;
      auto bs = segment(minority[idx], block_size, min_block_tokens);
      for (auto& b : bs) {
        cum += b.tokens.size();
        blocks.push_back(std::move(b));
      }
    }
    const std::size_t n_minority_blocks = blocks.size() - n_majority_blocks;
    if (n_minority_blocks == 0)
      throw DataError("minority subsample yields no blocks at a=" + format_float(a));

    const PriorTable table = count_tokens(blocks, vocab_size, "mixture", threads);
    const auto scores = score_corpus(blocks, table, threads);
    const auto outliers = threshold_outliers(scores, Criterion::Mu, e);

    std::vector<BlockId> minority_ids;
    minority_ids.reserve(n_minority_blocks);
    for (std::size_t i = n_majority_blocks; i < blocks.size(); ++i)
      minority_ids.push_back(blocks[i].block_id);
    std::sort(minority_ids.begin(), minority_ids.end());

    std::size_t hits = 0;
    std::size_t i = 0, j = 0;
    while (i < minority_ids.size() && j < outliers.size()) {
      if (minority_ids[i] < outliers[j]) ++i;
      else if (outliers[j] < minority_ids[i]) ++j;
      else { ++hits; ++i; ++j; }
    }
    rows.push_back({a, static_cast<double>(hits) /
                           static_cast<double>(n_minority_blocks)});
  }
  std::sort(rows.begin(), rows.end(),
            [](const MixtureRow& x, const MixtureRow& y) { return x.a < y.a; });
  return rows;
}

std::vector<SubsampleRow> subsample_consistency(
    std::span<const Document> docs, std::span<const double> b_grid, double e,
    std::uint64_t seed, std::size_t block_size, std::size_t min_block_tokens,
    std::size_t vocab_size, const std::string& tokenizer_id, int threads) {
  const auto blocks = segment_all(docs, block_size, min_block_tokens);

  auto outliers_for = [&](double b, double& seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    const PriorTable table = subsample_priors(docs, b, seed, block_size,
                                              min_block_tokens, vocab_size,
                                              tokenizer_id, threads);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                  .count();
    const auto scores = score_corpus(blocks, table, threads);
    return threshold_outliers(scores, Criterion::Mu, e);
  };

  double full_seconds = 0.0;
  const auto full_outliers = outliers_for(100.0, full_seconds);

  std::vector<SubsampleRow> rows;
  for (double b : b_grid) {
    if (b == 100.0) {
      rows.push_back({b, 1.0, full_seconds});
      continue;
    }
    double seconds = 0.0;
    const auto f = outliers_for(b, seconds);
    rows.push_back({b, overlap_ratio(f, full_outliers), seconds});
  }
  std::sort(rows.begin(), rows.end(),
            [](const SubsampleRow& x, const SubsampleRow& y) { return x.b < y.b; });
  return rows;
}

// ---- DSIR ------------------------------------------------------------------

double FeatureDistribution::log_bucket(std::size_t j) const {
  const double v = buckets.at(j);
  return std::log(v > 0.0 ? v : floor());
}

bool FeatureDistribution::compatible_with(const FeatureDistribution& other) const {
  return buckets.size() == other.buckets.size() && ngram_order == other.ngram_order &&
         hash_seed == other.hash_seed && identity_hash == other.identity_hash;
}

std::uint64_t ngram_bucket(std::span<const TokenId> gram,
                           const TokenStrings& strings, std::uint64_t hash_seed,
                           std::size_t m, bool identity_hash) {
  if (identity_hash) return gram[0] % m;  // unigram bridge to priors
  std::uint64_t h = splitmix64(hash_seed);
  for (TokenId t : gram) {
    if (t < strings.size()) {
      h = fnv1a64(strings[t], h);
    } else {
      h = fnv1a64(std::to_string(t), h);
    }
    h = fnv1a64("\x1f", 1, h);
  }
  return h % m;
}

namespace {

template <typename Fn>
void for_each_ngram(const DocBlock& block, int order, Fn&& fn) {
  const auto& toks = block.tokens;
  for (int n = 1; n <= order; ++n) {
    if (toks.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t i = 0; i + n <= toks.size(); ++i)
      fn(std::span<const TokenId>(toks.data() + i, static_cast<std::size_t>(n)));
  }
}

}  // namespace

FeatureDistribution dsir_features(std::span<const DocBlock> blocks,
                                  const TokenStrings& strings, int ngram_order,
                                  std::size_t m, std::uint64_t hash_seed,
                                  bool identity_hash) {
  if (blocks.empty()) throw DataError("empty corpus");
  if (ngram_order < 1 || ngram_order > 2)
    throw UsageError("n-gram order must be 1 or 2");
  if (m < 1) throw UsageError("bucket count must be >= 1");

  std::vector<std::uint64_t> counts(m, 0);
  std::uint64_t total = 0;
  for (const auto& block : blocks) {
    for_each_ngram(block, ngram_order, [&](std::span<const TokenId> gram) {
      ++counts[ngram_bucket(gram, strings, hash_seed, m, identity_hash)];
      ++total;
    });
  }
  if (total == 0) throw DataError("no n-grams in corpus");

  FeatureDistribution f;
  f.ngram_order = ngram_order;
  f.hash_seed = hash_seed;
  f.identity_hash = identity_hash;
  f.raw_total = total;
  f.buckets.resize(m);
  for (std::size_t j = 0; j < m; ++j)
    f.buckets[j] = static_cast<double>(counts[j]) / static_cast<double>(total);
  return f;
}

FeatureDistribution features_from_priors(const PriorTable& table) {
  if (table.total() == 0) throw DataError("empty prior table");
  FeatureDistribution f;
  f.ngram_order = 1;
  f.hash_seed = 0;
  f.identity_hash = true;
  f.raw_total = table.total();
  f.buckets.resize(table.vocab_size());
  for (std::size_t id = 0; id < table.vocab_size(); ++id)
    f.buckets[id] = static_cast<double>(table.count(static_cast<TokenId>(id))) /
                    static_cast<double>(table.total());
  return f;
}

double dsir_log_weight(const DocBlock& block, const TokenStrings& strings,
                       const FeatureDistribution& raw,
                       const FeatureDistribution& ref) {
  if (!raw.compatible_with(ref))
    throw DataError("dsir feature distributions have mismatched configuration");
  // sparse bucket counts of the block, in bucket order for determinism
  std::map<std::uint64_t, std::uint64_t> d;
  for_each_ngram(block, raw.ngram_order, [&](std::span<const TokenId> gram) {
    ++d[ngram_bucket(gram, strings, raw.hash_seed, raw.buckets.size(),
                     raw.identity_hash)];
  });
  double logw = 0.0;
  for (const auto& [j, c] : d)
    logw += static_cast<double>(c) * (ref.log_bucket(j) - raw.log_bucket(j));
  return logw;
}

std::vector<BlockId> dsir_select(
    std::span<const std::pair<const DocBlock*, double>> weighted,
    std::uint64_t budget_tokens) {
  std::vector<std::size_t> order(weighted.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (weighted[a].second != weighted[b].second)
      return weighted[a].second > weighted[b].second;
    return weighted[a].first->block_id < weighted[b].first->block_id;
  });
  std::vector<BlockId> kept;
  std::uint64_t cum = 0;
  for (std::size_t i : order) {
    const auto n = weighted[i].first->tokens.size();
    if (cum + n > budget_tokens) break;
    cum += n;
    kept.push_back(weighted[i].first->block_id);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace priorgate

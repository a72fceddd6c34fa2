#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "priorgate/prior.hpp"
#include "priorgate/types.hpp"

namespace priorgate {

// ---- outlier overlap ------------------------------------------------------

/// |F ∩ F_ref| / |F_ref|; both inputs sorted ascending.
double overlap_ratio(std::span<const BlockId> f, std::span<const BlockId> f_ref);

struct OverlapRow {
  double e = 0.0;
  double overlap_mu = 0.0;
  double overlap_sigma = 0.0;
};

/// Per e: F_mu/F_sigma via threshold trimming vs the top/bottom e/2% of the
/// external scores. External scores must cover >= 99% of block ids.
std::vector<OverlapRow> overlap_vs_external(
    std::span<const BlockScore> scores,
    const std::unordered_map<BlockId, double>& external,
    std::span<const double> e_grid);

// ---- prior-rank curve -------------------------------------------------------

/// CSV `rank,token_id,log_prior` for seen tokens, descending log prior,
/// ties by token_id.
void prior_curve(const PriorTable& table, const std::string& out_path);

// ---- mixture learnability sweep ---------------------------------------------

struct MixtureRow {
  double a = 0.0;
  double minority_outlier_rate = 0.0;
};

/// For each ratio a: subsample the minority corpus to a% of the majority
/// token volume (deterministic, seeded), build mixed priors, score all
/// blocks, trim mu-outliers at e, report the fraction of minority blocks
/// inside the outlier set.
std::vector<MixtureRow> mixture_sweep(std::span<const Document> majority,
                                      std::span<const Document> minority,
                                      std::span<const double> ratios, double e,
                                      std::uint64_t seed, std::size_t block_size,
                                      std::size_t min_block_tokens,
                                      std::size_t vocab_size, int threads);

// ---- subsampled-prior consistency ---------------------------------------------

struct SubsampleRow {
  double b = 0.0;
  double overlap_vs_full = 0.0;
  double seconds_prior_phase = 0.0;
};

std::vector<SubsampleRow> subsample_consistency(
    std::span<const Document> docs, std::span<const double> b_grid, double e,
    std::uint64_t seed, std::size_t block_size, std::size_t min_block_tokens,
    std::size_t vocab_size, const std::string& tokenizer_id, int threads);

// ---- DSIR baseline --------------------------------------------------------

/// Hashed n-gram bucket distribution; gamma in the importance-weight formula.
struct FeatureDistribution {
  std::vector<double> buckets;  // normalized, sums to 1
  int ngram_order = 1;
  std::uint64_t hash_seed = 0;
  bool identity_hash = false;
  std::uint64_t raw_total = 0;  // pre-normalization count mass

  double floor() const { return 0.5 / static_cast<double>(raw_total); }
  double log_bucket(std::size_t j) const;
  bool compatible_with(const FeatureDistribution& other) const;
};

/// Maps token ids to the strings hashed for n-grams; an empty table falls
/// back to the decimal id, which keeps pre-tokenized corpora usable.
using TokenStrings = std::vector<std::string>;

std::uint64_t ngram_bucket(std::span<const TokenId> gram,
                           const TokenStrings& strings, std::uint64_t hash_seed,
                           std::size_t m, bool identity_hash);

/// Slices each block into all 1..n-grams, hashes them into m buckets, and
/// normalizes the bucket counts.
FeatureDistribution dsir_features(std::span<const DocBlock> blocks,
                                  const TokenStrings& strings, int ngram_order,
                                  std::size_t m, std::uint64_t hash_seed,
                                  bool identity_hash = false);

/// Unigram/identity-hash bridge: the feature distribution of a prior table.
FeatureDistribution features_from_priors(const PriorTable& table);

/// log w(d) = sum_j d[j] * (log gamma_ref[j] - log gamma_raw[j])
double dsir_log_weight(const DocBlock& block, const TokenStrings& strings,
                       const FeatureDistribution& raw,
                       const FeatureDistribution& ref);

/// Keeps the highest-weight blocks within a token budget
/// (ties: weight descending, block_id ascending). Returns sorted kept ids.
std::vector<BlockId> dsir_select(
    std::span<const std::pair<const DocBlock*, double>> weighted,
    std::uint64_t budget_tokens);

}  // namespace priorgate

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "priorgate/types.hpp"

namespace priorgate {

/// Exact token counts and the relative-frequency priors they induce.
/// Unseen tokens get floor_prior = 1/(2*total), strictly below any seen token.
class PriorTable {
 public:
  PriorTable() = default;
  PriorTable(std::vector<std::uint64_t> counts, std::string tokenizer_id,
             double subsample_b = 100.0, std::uint64_t seed = 0);

  std::uint64_t count(TokenId id) const {
    return id < counts_.size() ? counts_[id] : 0;
  }
  std::uint64_t total() const { return total_; }
  std::size_t vocab_size() const { return counts_.size(); }
  double floor_prior() const { return 0.5 / static_cast<double>(total_); }

  double prior(TokenId id) const {
    const std::uint64_t c = count(id);
    return c == 0 ? floor_prior()
                  : static_cast<double>(c) / static_cast<double>(total_);
  }
  double log_prior(TokenId id) const;

  const std::string& tokenizer_id() const { return tokenizer_id_; }
  double subsample_b() const { return subsample_b_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  /// TSV `token_id  count` plus a `<path>.meta.json` sidecar.
  void save(const std::string& path) const;
  static PriorTable load(const std::string& path);

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::string tokenizer_id_;
  double subsample_b_ = 100.0;
  std::uint64_t seed_ = 0;
};

/// Commutative-monoid count reduction over blocks; identical for any
/// shard order and worker count. Token ids >= vocab_size are fatal.
PriorTable count_tokens(std::span<const DocBlock> blocks, std::size_t vocab_size,
                        std::string tokenizer_id, int threads);

/// Deterministic document-level Bernoulli subsampling keyed on (seed, doc_id).
bool subsample_keeps(std::uint64_t seed, DocId doc_id, double b);

/// Counts over a b% document subsample; b=100 bypasses sampling entirely.
/// Tokens are counted over admitted blocks, matching count_tokens.
PriorTable subsample_priors(std::span<const Document> docs, double b,
                            std::uint64_t seed, std::size_t block_size,
                            std::size_t min_block_tokens, std::size_t vocab_size,
                            std::string tokenizer_id, int threads);

/// Element-wise count addition; associative and commutative.
PriorTable merge(std::span<const PriorTable> tables);

}  // namespace priorgate

#include "priorgate/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "priorgate/parallel.hpp"

namespace priorgate {

namespace {

/// Kahan-compensated accumulator; priors span many orders of magnitude.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

BlockScorer::BlockScorer(const PriorTable& table) {
  priors_.resize(table.vocab_size());
  log_priors_.resize(table.vocab_size());
  for (std::size_t id = 0; id < table.vocab_size(); ++id) {
    priors_[id] = table.prior(static_cast<TokenId>(id));
    log_priors_[id] = std::log(priors_[id]);
  }
}

BlockScore BlockScorer::score(const DocBlock& block) const {
  const std::size_t n = block.tokens.size();
  if (n == 0) throw DataError("cannot score empty block");

  // Aggregate per distinct token id and accumulate in id order; block scores
  // are then bit-identical under any permutation of the block's tokens.
  std::vector<TokenId> toks(block.tokens);
  std::sort(toks.begin(), toks.end());
  if (toks.back() >= priors_.size())
    throw DataError("token id " + std::to_string(toks.back()) +
                    " out of range in block " + std::to_string(block.block_id));

  CompensatedSum log_sum, raw_sum;
  double min_p = 2.0, max_p = -1.0;
  for (std::size_t i = 0; i < toks.size();) {
    std::size_t j = i;
    while (j < toks.size() && toks[j] == toks[i]) ++j;
    const double c = static_cast<double>(j - i);
    log_sum.add(c * log_priors_[toks[i]]);
    raw_sum.add(c * priors_[toks[i]]);
    min_p = std::min(min_p, priors_[toks[i]]);
    max_p = std::max(max_p, priors_[toks[i]]);
    i = j;
  }

  BlockScore s;
  s.block_id = block.block_id;
  s.n_tokens = static_cast<std::uint32_t>(n);
  s.source_tag = block.source_tag;
  s.mu = log_sum.sum / static_cast<double>(n);

  if (min_p == max_p) {
    s.sigma = 0.0;  // constant block, exactly
  } else {
    const double mean = raw_sum.sum / static_cast<double>(n);
    CompensatedSum dev;
    for (std::size_t i = 0; i < toks.size();) {
      std::size_t j = i;
      while (j < toks.size() && toks[j] == toks[i]) ++j;
      const double d = priors_[toks[i]] - mean;
      dev.add(static_cast<double>(j - i) * d * d);
      i = j;
    }
    s.sigma = std::sqrt(std::max(0.0, dev.sum / static_cast<double>(n)));
  }
  return s;
}

std::vector<BlockScore> score_corpus(std::span<const DocBlock> blocks,
                                     const PriorTable& table, int threads) {
  BlockScorer scorer(table);
  std::vector<BlockScore> scores(blocks.size());
  std::exception_ptr failure;
  std::mutex failure_mu;
  parallel_shards(blocks.size(), threads, [&](int, std::size_t lo, std::size_t hi) {
    try {
      for (std::size_t i = lo; i < hi; ++i) scores[i] = scorer.score(blocks[i]);
    } catch (...) {
      std::lock_guard<std::mutex> g(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  std::sort(scores.begin(), scores.end(), [](const BlockScore& a, const BlockScore& b) {
    return a.block_id < b.block_id;
  });
  return scores;
}

}  // namespace priorgate

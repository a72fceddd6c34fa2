#pragma once

#include <span>
#include <vector>

#include "priorgate/prior.hpp"
#include "priorgate/types.hpp"

namespace priorgate {

/// Per-block statistics against a fixed prior table:
///   mu    = mean of natural-log priors
///   sigma = population (divisor-N) standard deviation of raw priors
class BlockScorer {
 public:
  explicit BlockScorer(const PriorTable& table);

  BlockScore score(const DocBlock& block) const;

 private:
  std::vector<double> priors_;      // indexed by token id
  std::vector<double> log_priors_;
};

/// Scores every block; output sorted by block_id, independent of worker count.
std::vector<BlockScore> score_corpus(std::span<const DocBlock> blocks,
                                     const PriorTable& table, int threads);

}  // namespace priorgate

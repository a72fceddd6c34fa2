#pragma once

#include <span>
#include <vector>

#include "priorgate/types.hpp"

namespace priorgate {

enum class Criterion { Mu, Sigma };

enum class BudgetSide { Keep, Discard };

struct Deltas {
  double mu = 0.0;
  double sigma = 0.0;
};

/// Exact medians via selection; even count averages the two middle values.
MedianPair compute_medians(std::span<const BlockScore> scores);

/// Absolute distances from the corpus medians.
Deltas deltas(const BlockScore& score, const MedianPair& medians);

/// Budgeted selection: discard the union of the top-k blocks by delta_mu and
/// the top-k by delta_sigma (ties: delta descending, block_id ascending),
/// with k the minimal cut depth meeting the token budget.
/// side == Keep:    minimal k with kept tokens <= budget_n
/// side == Discard: minimal k with discarded tokens >= budget_n
SelectionReport select(std::span<const BlockScore> scores, const MedianPair& medians,
                       std::uint64_t budget_n, BudgetSide side = BudgetSide::Keep);

/// Blocks whose criterion value ranks in the top e/2% or bottom e/2%
/// (by value, ties by block_id). Returns exactly 2*floor(n*e/200) ids, sorted.
std::vector<BlockId> threshold_outliers(std::span<const BlockScore> scores,
                                        Criterion criterion, double e);

/// Same trim rule over an arbitrary (id, value) list; used for external scores.
std::vector<BlockId> threshold_outliers_values(
    std::vector<std::pair<BlockId, double>> values, double e);

}  // namespace priorgate

#include "priorgate/filter.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <unordered_set>

namespace priorgate {

namespace {

double exact_median(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
  return (v[mid - 1] + hi) / 2.0;
}

}  // namespace

MedianPair compute_medians(std::span<const BlockScore> scores) {
  if (scores.empty()) throw DataError("cannot compute medians of zero blocks");
  std::vector<double> mus, sigmas;
  mus.reserve(scores.size());
  sigmas.reserve(scores.size());
  for (const auto& s : scores) {
    mus.push_back(s.mu);
    sigmas.push_back(s.sigma);
  }
  MedianPair m;
  m.m_mu = exact_median(std::move(mus));
  m.m_sigma = exact_median(std::move(sigmas));
  m.n_blocks = scores.size();
  return m;
}

Deltas deltas(const BlockScore& score, const MedianPair& medians) {
  return {std::abs(score.mu - medians.m_mu), std::abs(score.sigma - medians.m_sigma)};
}

SelectionReport select(std::span<const BlockScore> scores, const MedianPair& medians,
                       std::uint64_t budget_n, BudgetSide side) {
  if (scores.empty()) throw DataError("cannot select from zero blocks");
  const std::size_t n = scores.size();

  std::uint64_t total_tokens = 0;
  for (const auto& s : scores) total_tokens += s.n_tokens;
  const std::uint64_t keep_budget =
      side == BudgetSide::Keep
          ? budget_n
          : (budget_n > total_tokens ? 0 : total_tokens - budget_n);
  if (side == BudgetSide::Keep && budget_n > total_tokens)
    throw DataError("budget exceeds total admitted tokens");
  if (side == BudgetSide::Discard && budget_n > total_tokens)
    throw DataError("discard budget exceeds total admitted tokens");

  std::vector<double> d_mu(n), d_sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Deltas d = deltas(scores[i], medians);
    d_mu[i] = d.mu;
    d_sigma[i] = d.sigma;
  }

  auto ranked = [&](const std::vector<double>& delta) {
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (delta[a] != delta[b]) return delta[a] > delta[b];
      return scores[a].block_id < scores[b].block_id;
    });
    return order;
  };
  const auto order_mu = ranked(d_mu);
  const auto order_sigma = ranked(d_sigma);

  // kept_tokens(k) is non-increasing in k; binary search the minimal k.
  auto kept_tokens_at = [&](std::size_t k) {
    std::unordered_set<std::uint32_t> discard;
    discard.reserve(2 * k);
    std::uint64_t discarded = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (discard.insert(order_mu[i]).second) discarded += scores[order_mu[i]].n_tokens;
      if (discard.insert(order_sigma[i]).second)
        discarded += scores[order_sigma[i]].n_tokens;
    }
    return total_tokens - discarded;
  };

  std::size_t lo = 0, hi = n;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (kept_tokens_at(mid) <= keep_budget)
      hi = mid;
    else
      lo = mid + 1;
  }
  const std::size_t k = lo;

  SelectionReport report;
  report.k = k;
  report.budget_n = budget_n;

  std::unordered_set<std::uint32_t> discard;
  std::unordered_set<std::uint32_t> in_mu;
  discard.reserve(2 * k);
  in_mu.reserve(k);
  for (std::size_t i = 0; i < k; ++i) in_mu.insert(order_mu[i]);
  std::size_t overlap = 0;
  for (std::size_t i = 0; i < k; ++i) {
    discard.insert(order_mu[i]);
    if (in_mu.count(order_sigma[i])) ++overlap;
    discard.insert(order_sigma[i]);
  }
  report.overlap_mu_sigma = overlap;

  for (std::size_t i = 0; i < n; ++i) {
    if (discard.count(static_cast<std::uint32_t>(i))) {
      report.discarded_blocks.push_back(scores[i].block_id);
    } else {
      report.kept_blocks.push_back(scores[i].block_id);
      report.kept_tokens += scores[i].n_tokens;
    }
  }
  std::sort(report.kept_blocks.begin(), report.kept_blocks.end());
  std::sort(report.discarded_blocks.begin(), report.discarded_blocks.end());
  return report;
}

std::vector<BlockId> threshold_outliers_values(
    std::vector<std::pair<BlockId, double>> values, double e) {
  if (!(e > 0.0 && e < 100.0)) throw UsageError("e must be in (0,100)");
  const std::size_t n = values.size();
  const std::size_t q = static_cast<std::size_t>(
      static_cast<double>(n) * e / 200.0);  // floor(n*e/200) per side
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });
  std::vector<BlockId> out;
  out.reserve(2 * q);
  for (std::size_t i = 0; i < q; ++i) out.push_back(values[i].first);
  for (std::size_t i = n - q; i < n; ++i) out.push_back(values[i].first);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<BlockId> threshold_outliers(std::span<const BlockScore> scores,
                                        Criterion criterion, double e) {
  std::vector<std::pair<BlockId, double>> values;
  values.reserve(scores.size());
  for (const auto& s : scores)
    values.emplace_back(s.block_id, criterion == Criterion::Mu ? s.mu : s.sigma);
  return threshold_outliers_values(std::move(values), e);
}

}  // namespace priorgate

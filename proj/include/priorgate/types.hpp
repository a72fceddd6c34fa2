#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace priorgate {

using TokenId = std::uint32_t;
using DocId = std::uint64_t;
using BlockId = std::uint64_t;

/// Bad command line or flag combination; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable or inconsistent input data; maps to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One input record. Exactly one of text/tokens is populated on read;
/// tokenize_document() fills tokens and the content-derived doc_id.
struct Document {
  DocId doc_id = 0;
  std::string text;
  std::vector<TokenId> tokens;
  bool has_text = false;
  bool has_tokens = false;
  std::string source_tag;
};

/// Fixed-size token segment of one document; the unit of filtering.
struct DocBlock {
  BlockId block_id = 0;
  std::vector<TokenId> tokens;
  std::string source_tag;
};

/// Per-block prior statistics: mean of log priors, population std of raw priors.
struct BlockScore {
  BlockId block_id = 0;
  std::uint32_t n_tokens = 0;
  double mu = 0.0;
  double sigma = 0.0;
  std::string source_tag;
};

struct MedianPair {
  double m_mu = 0.0;
  double m_sigma = 0.0;
  std::size_t n_blocks = 0;
};

struct SelectionReport {
  std::size_t k = 0;                     // cut depth per criterion
  std::vector<BlockId> kept_blocks;      // sorted ascending
  std::vector<BlockId> discarded_blocks; // sorted ascending
  std::uint64_t kept_tokens = 0;
  std::uint64_t budget_n = 0;
  std::size_t overlap_mu_sigma = 0;      // |top-k by delta_mu  ∩  top-k by delta_sigma|
};

}  // namespace priorgate

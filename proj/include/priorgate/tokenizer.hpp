#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "priorgate/types.hpp"

namespace priorgate {

/// Byte-level BPE vocabulary in the de-facto two-file format:
/// a JSON token->id map plus a text merge list (one space-separated pair
/// per line, first line treated as a header).
class BpeVocabulary {
 public:
  static BpeVocabulary load(const std::string& vocab_path,
                            const std::string& merges_path);

  std::vector<TokenId> encode(std::string_view text) const;

  std::size_t size() const { return id_to_token_.size(); }
  const std::string& token_string(TokenId id) const { return id_to_token_.at(id); }
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> merge_rank_;  // "left right" -> rank
  std::string fingerprint_;                          // "bpe:<content hash>"

  std::vector<TokenId> encode_piece(std::string_view piece) const;
};

/// Splits on Unicode whitespace runs; vocabulary is accumulated from word
/// counts during prior estimation and frozen before scoring. Id 0 is the
/// reserved UNK id for words unseen at freeze time.
class WhitespaceVocabulary {
 public:
  static constexpr TokenId kUnkId = 0;

  WhitespaceVocabulary();

  /// Deterministic freeze: ids assigned in sorted word order, UNK first.
  static WhitespaceVocabulary freeze(
      const std::unordered_map<std::string, std::uint64_t>& word_counts);

  std::vector<TokenId> encode(std::string_view text) const;

  std::size_t size() const { return id_to_word_.size(); }
  const std::string& token_string(TokenId id) const { return id_to_word_.at(id); }
  const std::string& fingerprint() const { return fingerprint_; }

  static std::vector<std::string_view> split_words(std::string_view text);

 private:
  std::unordered_map<std::string, TokenId> word_to_id_;
  std::vector<std::string> id_to_word_;
  std::string fingerprint_;
};

enum class TokenizerMode { Bpe, Whitespace };

/// Uniform front over the two modes.
class Tokenizer {
 public:
  explicit Tokenizer(BpeVocabulary vocab);
  explicit Tokenizer(WhitespaceVocabulary vocab);

  std::vector<TokenId> encode(std::string_view text) const;
  std::size_t vocab_size() const;
  const std::string& token_string(TokenId id) const;
  const std::string& fingerprint() const;
  TokenizerMode mode() const { return mode_; }

 private:
  TokenizerMode mode_;
  BpeVocabulary bpe_;
  WhitespaceVocabulary ws_;
};

/// Accumulates whitespace word counts from one document's text.
void count_words(std::string_view text,
                 std::unordered_map<std::string, std::uint64_t>& counts);

}  // namespace priorgate

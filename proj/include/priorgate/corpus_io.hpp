#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "priorgate/tokenizer.hpp"
#include "priorgate/types.hpp"

namespace priorgate {

enum class CorpusFormat { JsonlText, JsonlTokens };

struct ReadStats {
  std::size_t lines = 0;
  std::size_t documents = 0;
  std::size_t malformed = 0;
  // (line number, message); capped so a fully broken file stays reportable
  std::vector<std::pair<std::size_t, std::string>> errors;
};

/// Streams documents from a JSON-lines file. Malformed lines are counted
/// and recorded in stats, never silently dropped. Unreadable file is fatal.
void read_corpus(const std::string& path, CorpusFormat format,
                 const std::function<void(Document&&)>& sink, ReadStats& stats);

std::vector<Document> load_corpus(const std::string& path, CorpusFormat format,
                                  ReadStats& stats);

/// Fills tokens (when only text is present) and the content-derived doc_id.
/// For text input the id hashes the token strings, so it is stable across
/// vocabulary freezes; for pre-tokenized input it hashes the id sequence.
void tokenize_document(Document& doc, const Tokenizer& tokenizer);

/// Hash of raw word strings; whitespace-mode doc identity without a vocabulary.
DocId whitespace_doc_id(std::string_view text);

/// Splits one document into consecutive blocks of block_size tokens.
/// A trailing partial block is kept iff its length >= min_block_tokens.
std::vector<DocBlock> segment(const Document& doc, std::size_t block_size,
                              std::size_t min_block_tokens);

/// TSV `block_id  n_tokens  mu  sigma  source_tag`, rows sorted by block_id,
/// floats at 12 significant digits. Byte-identical across runs and threads.
void write_scores(std::vector<BlockScore> scores, const std::string& path);

std::vector<BlockScore> read_scores(const std::string& path);

/// TSV `block_id  score` (externally produced, e.g. PPL).
std::unordered_map<BlockId, double> read_external_scores(const std::string& path);

/// One decimal id per line, sorted ascending.
void write_id_list(std::vector<BlockId> ids, const std::string& path);

/// Fixed-format float serialization used in every persisted file.
std::string format_float(double v);

}  // namespace priorgate

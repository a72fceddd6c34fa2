#include "priorgate/corpus_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "priorgate/hash.hpp"

namespace priorgate {

namespace {
constexpr std::size_t kMaxRecordedErrors = 32;

void record_error(ReadStats& stats, std::size_t line_no, std::string msg) {
  ++stats.malformed;
  if (stats.errors.size() < kMaxRecordedErrors)
    stats.errors.emplace_back(line_no, std::move(msg));
}
}  // namespace

void read_corpus(const std::string& path, CorpusFormat format,
                 const std::function<void(Document&&)>& sink, ReadStats& stats) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    ++stats.lines;
    if (line.empty()) continue;

    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      record_error(stats, line_no, "not a JSON object");
      continue;
    }

    Document doc;
    if (j.contains("source") && j["source"].is_string())
      doc.source_tag = j["source"].get<std::string>();

    if (format == CorpusFormat::JsonlText) {
      if (!j.contains("text") || !j["text"].is_string()) {
        record_error(stats, line_no, "missing field \"text\"");
        continue;
      }
      doc.text = j["text"].get<std::string>();
      doc.has_text = true;
    } else {
      if (!j.contains("tokens") || !j["tokens"].is_array()) {
        record_error(stats, line_no, "missing field \"tokens\"");
        continue;
      }
      bool ok = true;
      doc.tokens.reserve(j["tokens"].size());
      for (const auto& t : j["tokens"]) {
        if (!t.is_number_integer() && !t.is_number_unsigned()) { ok = false; break; }
        const auto v = t.get<long long>();
        if (v < 0) { ok = false; break; }
        doc.tokens.push_back(static_cast<TokenId>(v));
      }
      if (!ok) {
        record_error(stats, line_no, "\"tokens\" must be non-negative integers");
        continue;
      }
      doc.has_tokens = true;
      doc.doc_id = hash_token_ids(doc.tokens);
    }
    ++stats.documents;
    sink(std::move(doc));
  }
}

std::vector<Document> load_corpus(const std::string& path, CorpusFormat format,
                                  ReadStats& stats) {
  std::vector<Document> docs;
  read_corpus(path, format, [&](Document&& d) { docs.push_back(std::move(d)); }, stats);
  return docs;
}

DocId whitespace_doc_id(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::string_view w : WhitespaceVocabulary::split_words(text))
    h = fnv1a64(w, fnv1a64("\x1f", 1, h));
  return h;
}

void tokenize_document(Document& doc, const Tokenizer& tokenizer) {
  if (doc.has_tokens) {
    if (doc.doc_id == 0) doc.doc_id = hash_token_ids(doc.tokens);
    return;
  }
  doc.tokens = tokenizer.encode(doc.text);
  doc.has_tokens = true;
  if (tokenizer.mode() == TokenizerMode::Whitespace) {
    // hash raw words, not vocab ids: stable across vocabulary freezes
    doc.doc_id = whitespace_doc_id(doc.text);
  } else {
    doc.doc_id = hash_token_ids(doc.tokens);
  }
}

std::vector<DocBlock> segment(const Document& doc, std::size_t block_size,
                              std::size_t min_block_tokens) {
  if (block_size < min_block_tokens || min_block_tokens < 1)
    throw UsageError("require block_size >= min_block_tokens >= 1");
  std::vector<DocBlock> blocks;
  const std::size_t n = doc.tokens.size();
  std::uint64_t index = 0;
  for (std::size_t off = 0; off < n; off += block_size, ++index) {
    const std::size_t len = std::min(block_size, n - off);
    if (len < min_block_tokens) break;  // dropped tail
    DocBlock b;
    b.block_id = make_block_id(doc.doc_id, index);
    b.tokens.assign(doc.tokens.begin() + off, doc.tokens.begin() + off + len);
    b.source_tag = doc.source_tag;
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_scores(std::vector<BlockScore> scores, const std::string& path) {
  std::sort(scores.begin(), scores.end(), [](const BlockScore& a, const BlockScore& b) {
    return a.block_id < b.block_id;
  });
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open score file for writing: " + path);
  out << "block_id\tn_tokens\tmu\tsigma\tsource_tag\n";
  for (const auto& s : scores) {
    out << s.block_id << '\t' << s.n_tokens << '\t' << format_float(s.mu) << '\t'
        << format_float(s.sigma) << '\t' << s.source_tag << '\n';
  }
  out.flush();
  if (!out) {
    out.close();
    std::error_code ec;
    std::filesystem::remove(path, ec);  // no partial files
    throw DataError("failed writing score file: " + path);
  }
}

std::vector<BlockScore> read_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "block_id\tn_tokens\tmu\tsigma\tsource_tag")
    throw DataError("bad score file header in " + path);

  std::vector<BlockScore> scores;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    BlockScore s;
    std::string tag;
    if (!(ss >> s.block_id >> s.n_tokens >> s.mu >> s.sigma))
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed score row");
    if (ss >> tag) s.source_tag = tag;
    scores.push_back(std::move(s));
  }
  // exact-duplicate block ids (duplicated documents) collapse to one row
  scores.erase(std::unique(scores.begin(), scores.end(),
                           [](const BlockScore& a, const BlockScore& b) {
                             return a.block_id == b.block_id;
                           }),
               scores.end());
  return scores;
}

std::unordered_map<BlockId, double> read_external_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open external score file: " + path);
  std::unordered_map<BlockId, double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("block_id", 0) == 0) continue;  // optional header
    std::istringstream ss(line);
    BlockId id;
    double score;
    if (!(ss >> id >> score))
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed score row");
    out[id] = score;
  }
  return out;
}

void write_id_list(std::vector<BlockId> ids, const std::string& path) {
  std::sort(ids.begin(), ids.end());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open id file for writing: " + path);
  for (BlockId id : ids) out << id << '\n';
  out.flush();
  if (!out) {
    out.close();
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw DataError("failed writing id file: " + path);
  }
}

}  // namespace priorgate

#include "priorgate/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "priorgate/hash.hpp"

namespace priorgate {
namespace {

// ---- UTF-8 helpers ----------------------------------------------------

struct Codepoint {
  std::uint32_t cp;
  std::size_t len;
};

Codepoint decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  auto cont = [&](std::size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xc0) == 0x80;
  };
  if ((b0 & 0xe0) == 0xc0 && cont(1)) {
    return {(std::uint32_t(b0 & 0x1f) << 6) |
                (static_cast<unsigned char>(s[i + 1]) & 0x3f),
            2};
  }
  if ((b0 & 0xf0) == 0xe0 && cont(1) && cont(2)) {
    return {(std::uint32_t(b0 & 0x0f) << 12) |
                (std::uint32_t(static_cast<unsigned char>(s[i + 1]) & 0x3f) << 6) |
                (static_cast<unsigned char>(s[i + 2]) & 0x3f),
            3};
  }
  if ((b0 & 0xf8) == 0xf0 && cont(1) && cont(2) && cont(3)) {
    return {(std::uint32_t(b0 & 0x07) << 18) |
                (std::uint32_t(static_cast<unsigned char>(s[i + 1]) & 0x3f) << 12) |
                (std::uint32_t(static_cast<unsigned char>(s[i + 2]) & 0x3f) << 6) |
                (static_cast<unsigned char>(s[i + 3]) & 0x3f),
            4};
  }
  return {0xfffd, 1};  // invalid byte, consume one
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
}

bool is_unicode_space(std::uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0a: case 0x0b: case 0x0c: case 0x0d: case 0x20:
    case 0x85: case 0xa0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202f: case 0x205f: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200a;
  }
}

bool is_ascii_digit(std::uint32_t cp) { return cp >= '0' && cp <= '9'; }

bool is_ascii_letter(std::uint32_t cp) {
  return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
}

// Non-ASCII codepoints that are not whitespace are classified as letters.
// This is coarser than \p{L} but keeps pre-tokenization deterministic
// without a Unicode property table.
bool is_word_letter(std::uint32_t cp) {
  if (cp < 0x80) return is_ascii_letter(cp);
  return !is_unicode_space(cp);
}

// ---- GPT-2 byte-level alphabet -----------------------------------------

// Printable bytes map to themselves; the rest to codepoints 256+.
const std::array<std::string, 256>& byte_units() {
  static const std::array<std::string, 256> table = [] {
    std::array<std::string, 256> t;
    int extra = 0;
    for (int b = 0; b < 256; ++b) {
      const bool printable = (b >= 33 && b <= 126) || (b >= 161 && b <= 172) ||
                             (b >= 174 && b <= 255);
      std::string u;
      append_utf8(u, printable ? static_cast<std::uint32_t>(b)
                               : static_cast<std::uint32_t>(256 + extra++));
      t[b] = std::move(u);
    }
    return t;
  }();
  return table;
}

// GPT-2 pre-tokenization: contractions, space-prefixed letter/digit/symbol
// runs, and whitespace runs that leave their last space to the next piece.
std::vector<std::string_view> pretokenize(std::string_view text) {
  std::vector<std::string_view> pieces;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto cp_at = [&](std::size_t pos) { return decode_utf8(text, pos); };

  while (i < n) {
    // contraction: 's 't 're 've 'm 'll 'd
    if (text[i] == '\'' && i + 1 < n) {
      std::size_t len = 0;
      const char c1 = text[i + 1];
      if (c1 == 's' || c1 == 't' || c1 == 'm' || c1 == 'd') len = 2;
      if (i + 2 < n) {
        std::string_view two = text.substr(i + 1, 2);
        if (two == "re" || two == "ve" || two == "ll") len = 3;
      }
      if (len > 0) {
        pieces.push_back(text.substr(i, len));
        i += len;
        continue;
      }
    }

    auto [cp, cl] = cp_at(i);
    std::size_t start = i;
    std::size_t run = i;
    std::uint32_t first = cp;
    if (cp == ' ' && i + 1 < n) {
      auto nxt = cp_at(i + 1);
      if (is_word_letter(nxt.cp) || is_ascii_digit(nxt.cp) ||
          (!is_unicode_space(nxt.cp))) {
        first = nxt.cp;
        run = i + 1;
      }
    }

    auto take_run = [&](auto&& pred) {
      std::size_t j = run;
      while (j < n) {
        auto c = cp_at(j);
        if (!pred(c.cp)) break;
        j += c.len;
      }
      pieces.push_back(text.substr(start, j - start));
      i = j;
    };

    if (is_word_letter(first)) {
      take_run([](std::uint32_t c) { return is_word_letter(c); });
      continue;
    }
    if (is_ascii_digit(first)) {
      take_run([](std::uint32_t c) { return is_ascii_digit(c); });
      continue;
    }
    if (!is_unicode_space(first)) {
      take_run([](std::uint32_t c) {
        return !is_unicode_space(c) && !is_word_letter(c) && !is_ascii_digit(c);
      });
      continue;
    }

    // whitespace run starting at i (first == cp here, cp is whitespace)
    std::size_t j = i;
    std::size_t last_start = i;
    while (j < n) {
      auto c = cp_at(j);
      if (!is_unicode_space(c.cp)) break;
      last_start = j;
      j += c.len;
    }
    if (j >= n || last_start == i) {
      // run to end of string, or single whitespace char not claimed above
      pieces.push_back(text.substr(i, j - i));
      i = j;
    } else {
      // leave the last whitespace char for the following piece
      pieces.push_back(text.substr(i, last_start - i));
      i = last_start;
    }
  }
  return pieces;
}

}  // namespace

// ---- BpeVocabulary ------------------------------------------------------

BpeVocabulary BpeVocabulary::load(const std::string& vocab_path,
                                  const std::string& merges_path) {
  std::ifstream vf(vocab_path);
  if (!vf) throw DataError("cannot open vocab file: " + vocab_path);
  nlohmann::json j;
  try {
    vf >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("vocab file is not valid JSON: " + vocab_path + ": " + e.what());
  }
  if (!j.is_object()) throw DataError("vocab file must be a JSON object: " + vocab_path);

  BpeVocabulary v;
  v.id_to_token_.resize(j.size());
  std::vector<bool> seen(j.size(), false);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number_unsigned() && !it.value().is_number_integer())
      throw DataError("vocab id for token '" + it.key() + "' is not an integer");
    const auto id = it.value().get<long long>();
    if (id < 0 || static_cast<std::size_t>(id) >= j.size())
      throw DataError("vocab ids must be dense in [0,|V|); got id " +
                      std::to_string(id) + " for '" + it.key() + "'");
    if (seen[id]) throw DataError("duplicate vocab id " + std::to_string(id));
    seen[id] = true;
    v.id_to_token_[id] = it.key();
    v.token_to_id_.emplace(it.key(), static_cast<TokenId>(id));
  }
  if (v.token_to_id_.size() != j.size())
    throw DataError("duplicate token strings in vocab file: " + vocab_path);

  std::ifstream mf(merges_path);
  if (!mf) throw DataError("cannot open merges file: " + merges_path);
  std::string line;
  int rank = 0;
  bool first_line = true;
  std::uint64_t h = 0xcbf29ce484222325ull;
  while (std::getline(mf, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first_line) {  // header/comment line by convention
      first_line = false;
      continue;
    }
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size())
      throw DataError("malformed merge rule: '" + line + "'");
    const std::string left = line.substr(0, sp);
    const std::string right = line.substr(sp + 1);
    if (!v.token_to_id_.count(left) || !v.token_to_id_.count(right) ||
        !v.token_to_id_.count(left + right))
      throw DataError("merge rule references token absent from vocab: '" + line + "'");
    v.merge_rank_.emplace(line, rank++);
    h = fnv1a64(line, h);
  }
  for (const auto& t : v.id_to_token_) h = fnv1a64(t, fnv1a64("\x1f", 1, h));

  std::ostringstream fp;
  fp << "bpe:" << std::hex << h;
  v.fingerprint_ = fp.str();
  return v;
}

std::vector<TokenId> BpeVocabulary::encode_piece(std::string_view piece) const {
  std::vector<std::string> parts;
  parts.reserve(piece.size());
  for (unsigned char b : piece) parts.push_back(byte_units()[b]);

  while (parts.size() > 1) {
    int best_rank = std::numeric_limits<int>::max();
    std::size_t best_i = 0;
    std::string key;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      key.assign(parts[i]);
      key.push_back(' ');
      key.append(parts[i + 1]);
      auto it = merge_rank_.find(key);
      if (it != merge_rank_.end() && it->second < best_rank) {
        best_rank = it->second;
        best_i = i;
      }
    }
    if (best_rank == std::numeric_limits<int>::max()) break;
    const std::string left = parts[best_i];
    const std::string right = parts[best_i + 1];
    // merge every adjacent occurrence of the winning pair, left to right
    std::vector<std::string> merged;
    merged.reserve(parts.size());
    for (std::size_t i = 0; i < parts.size();) {
      if (i + 1 < parts.size() && parts[i] == left && parts[i + 1] == right) {
        merged.push_back(left + right);
        i += 2;
      } else {
        merged.push_back(std::move(parts[i]));
        ++i;
      }
    }
    parts = std::move(merged);
  }

  std::vector<TokenId> out;
  out.reserve(parts.size());
  for (const auto& p : parts) {
    auto it = token_to_id_.find(p);
    if (it == token_to_id_.end())
      throw DataError("byte-level unit not covered by vocab: '" + p + "'");
    out.push_back(it->second);
  }
  return out;
}

std::vector<TokenId> BpeVocabulary::encode(std::string_view text) const {
  std::vector<TokenId> out;
  for (std::string_view piece : pretokenize(text)) {
    auto ids = encode_piece(piece);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

// ---- WhitespaceVocabulary -----------------------------------------------

WhitespaceVocabulary::WhitespaceVocabulary() {
  id_to_word_.push_back("<unk>");
  word_to_id_.emplace("<unk>", kUnkId);
  fingerprint_ = "ws:empty";
}

std::vector<std::string_view> WhitespaceVocabulary::split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    auto c = decode_utf8(text, i);
    if (is_unicode_space(c.cp)) {
      i += c.len;
      continue;
    }
    std::size_t start = i;
    while (i < n) {
      auto w = decode_utf8(text, i);
      if (is_unicode_space(w.cp)) break;
      i += w.len;
    }
    words.push_back(text.substr(start, i - start));
  }
  return words;
}

WhitespaceVocabulary WhitespaceVocabulary::freeze(
    const std::unordered_map<std::string, std::uint64_t>& word_counts) {
  std::vector<std::string> words;
  words.reserve(word_counts.size());
  for (const auto& [w, c] : word_counts)
    if (w != "<unk>") words.push_back(w);
  std::sort(words.begin(), words.end());

  WhitespaceVocabulary v;
  v.id_to_word_.reserve(words.size() + 1);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto& w : words) {
    h = fnv1a64(w, fnv1a64("\x1f", 1, h));
    v.word_to_id_.emplace(w, static_cast<TokenId>(v.id_to_word_.size()));
    v.id_to_word_.push_back(std::move(w));
  }
  std::ostringstream fp;
  fp << "ws:" << std::hex << h;
  v.fingerprint_ = fp.str();
  return v;
}

std::vector<TokenId> WhitespaceVocabulary::encode(std::string_view text) const {
  std::vector<TokenId> out;
  for (std::string_view w : split_words(text)) {
    auto it = word_to_id_.find(std::string(w));
    out.push_back(it == word_to_id_.end() ? kUnkId : it->second);
  }
  return out;
}

void count_words(std::string_view text,
                 std::unordered_map<std::string, std::uint64_t>& counts) {
  for (std::string_view w : WhitespaceVocabulary::split_words(text))
    ++counts[std::string(w)];
}

// ---- Tokenizer ------------------------------------------------------------

Tokenizer::Tokenizer(BpeVocabulary vocab)
    : mode_(TokenizerMode::Bpe), bpe_(std::move(vocab)) {}

Tokenizer::Tokenizer(WhitespaceVocabulary vocab)
    : mode_(TokenizerMode::Whitespace), ws_(std::move(vocab)) {}

std::vector<TokenId> Tokenizer::encode(std::string_view text) const {
  return mode_ == TokenizerMode::Bpe ? bpe_.encode(text) : ws_.encode(text);
}

std::size_t Tokenizer::vocab_size() const {
  return mode_ == TokenizerMode::Bpe ? bpe_.size() : ws_.size();
}

const std::string& Tokenizer::token_string(TokenId id) const {
  return mode_ == TokenizerMode::Bpe ? bpe_.token_string(id) : ws_.token_string(id);
}

const std::string& Tokenizer::fingerprint() const {
  return mode_ == TokenizerMode::Bpe ? bpe_.fingerprint() : ws_.fingerprint();
}

}  // namespace priorgate

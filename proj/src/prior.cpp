#include "priorgate/prior.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "priorgate/corpus_io.hpp"
#include "priorgate/hash.hpp"
#include "priorgate/parallel.hpp"

namespace priorgate {

PriorTable::PriorTable(std::vector<std::uint64_t> counts, std::string tokenizer_id,
                       double subsample_b, std::uint64_t seed)
    : counts_(std::move(counts)),
      tokenizer_id_(std::move(tokenizer_id)),
      subsample_b_(subsample_b),
      seed_(seed) {
  total_ = 0;
  for (std::uint64_t c : counts_) total_ += c;
}

double PriorTable::log_prior(TokenId id) const {
  return std::log(prior(id));
}

void PriorTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open prior table for writing: " + path);
  out << "token_id\tcount\n";
  for (std::size_t id = 0; id < counts_.size(); ++id)
    if (counts_[id] > 0) out << id << '\t' << counts_[id] << '\n';
  out.flush();
  if (!out) {
    out.close();
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw DataError("failed writing prior table: " + path);
  }

  nlohmann::json meta = {
      {"total", total_},
      {"tokenizer", tokenizer_id_},
      {"b", subsample_b_},
      {"seed", seed_},
      {"floor_prior", floor_prior()},
      {"vocab_size", counts_.size()},
  };
  std::ofstream ms(path + ".meta.json", std::ios::trunc);
  if (!ms) throw DataError("cannot open prior sidecar for writing: " + path);
  ms << meta.dump(2) << '\n';
}

PriorTable PriorTable::load(const std::string& path) {
  std::ifstream ms(path + ".meta.json");
  if (!ms) throw DataError("missing prior sidecar: " + path + ".meta.json");
  nlohmann::json meta;
  try {
    ms >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad prior sidecar: " + std::string(e.what()));
  }

  std::ifstream in(path);
  if (!in) throw DataError("cannot open prior table: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "token_id\tcount")
    throw DataError("bad prior table header in " + path);

  std::vector<std::uint64_t> counts(meta.at("vocab_size").get<std::size_t>(), 0);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::size_t id;
    std::uint64_t c;
    if (!(ss >> id >> c) || id >= counts.size())
      throw DataError(path + ":" + std::to_string(line_no) + ": malformed count row");
    counts[id] = c;
  }
  PriorTable t(std::move(counts), meta.at("tokenizer").get<std::string>(),
               meta.at("b").get<double>(), meta.at("seed").get<std::uint64_t>());
  if (t.total() != meta.at("total").get<std::uint64_t>())
    throw DataError("prior table total does not match sidecar: " + path);
  return t;
}

namespace {

void count_span(const std::vector<TokenId>& tokens, std::size_t n_counted,
                std::size_t vocab_size, std::vector<std::uint64_t>& counts) {
  for (std::size_t i = 0; i < n_counted; ++i) {
    const TokenId t = tokens[i];
    if (t >= vocab_size)
      throw DataError("token id " + std::to_string(t) +
                      " out of range for vocabulary of size " +
                      std::to_string(vocab_size));
    ++counts[t];
  }
}

/// Number of leading tokens that fall inside admitted blocks.
std::size_t admitted_tokens(std::size_t n, std::size_t block_size,
                            std::size_t min_block_tokens) {
  const std::size_t full = (n / block_size) * block_size;
  const std::size_t tail = n - full;
  return tail >= min_block_tokens ? n : full;
}

}  // namespace

PriorTable count_tokens(std::span<const DocBlock> blocks, std::size_t vocab_size,
                        std::string tokenizer_id, int threads) {
  if (blocks.empty()) throw DataError("empty corpus");

  std::vector<std::vector<std::uint64_t>> partials(
      std::max(threads, 1), std::vector<std::uint64_t>(vocab_size, 0));
  std::exception_ptr failure;
  std::mutex failure_mu;
  parallel_shards(blocks.size(), threads, [&](int shard, std::size_t lo, std::size_t hi) {
    try {
      auto& counts = partials[shard];
      for (std::size_t i = lo; i < hi; ++i)
        count_span(blocks[i].tokens, blocks[i].tokens.size(), vocab_size, counts);
    } catch (...) {
      std::lock_guard<std::mutex> g(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  std::vector<std::uint64_t> counts(vocab_size, 0);
  for (const auto& p : partials)
    for (std::size_t i = 0; i < vocab_size; ++i) counts[i] += p[i];
  return PriorTable(std::move(counts), std::move(tokenizer_id));
}

bool subsample_keeps(std::uint64_t seed, DocId doc_id, double b) {
  return unit_uniform(hash_pair(seed, doc_id)) < b / 100.0;
}

PriorTable subsample_priors(std::span<const Document> docs, double b,
                            std::uint64_t seed, std::size_t block_size,
                            std::size_t min_block_tokens, std::size_t vocab_size,
                            std::string tokenizer_id, int threads) {
  if (!(b > 0.0 && b <= 100.0)) throw UsageError("b must be in (0,100]");
  const bool bypass = b == 100.0;

  std::vector<std::vector<std::uint64_t>> partials(
      std::max(threads, 1), std::vector<std::uint64_t>(vocab_size, 0));
  std::exception_ptr failure;
  std::mutex failure_mu;
  parallel_shards(docs.size(), threads, [&](int shard, std::size_t lo, std::size_t hi) {
    try {
      auto& counts = partials[shard];
      for (std::size_t i = lo; i < hi; ++i) {
        const Document& d = docs[i];
        if (!bypass && !subsample_keeps(seed, d.doc_id, b)) continue;
        count_span(d.tokens,
                   admitted_tokens(d.tokens.size(), block_size, min_block_tokens),
                   vocab_size, counts);
      }
    } catch (...) {
      std::lock_guard<std::mutex> g(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);

  std::vector<std::uint64_t> counts(vocab_size, 0);
  for (const auto& p : partials)
    for (std::size_t i = 0; i < vocab_size; ++i) counts[i] += p[i];

  PriorTable t(std::move(counts), std::move(tokenizer_id), b, bypass ? 0 : seed);
  if (t.total() == 0) throw DataError("subsample empty; raise b");
  return t;
}

PriorTable merge(std::span<const PriorTable> tables) {
  std::vector<std::uint64_t> counts;
  std::string tokenizer_id;
  for (const auto& t : tables) {
    if (t.total() == 0 && t.vocab_size() == 0) continue;  // identity element
    if (tokenizer_id.empty()) {
      tokenizer_id = t.tokenizer_id();
    } else if (t.tokenizer_id() != tokenizer_id) {
      throw DataError("cannot merge prior tables from different tokenizers: '" +
                      tokenizer_id + "' vs '" + t.tokenizer_id() + "'");
    }
    if (t.vocab_size() > counts.size()) counts.resize(t.vocab_size(), 0);
    for (std::size_t i = 0; i < t.vocab_size(); ++i) counts[i] += t.counts()[i];
  }
  return PriorTable(std::move(counts), std::move(tokenizer_id));
}

}  // namespace priorgate

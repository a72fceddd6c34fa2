// priorgate: filter pretraining corpora by corpus-level token priors.
//
// Subcommands: priors, score, filter, overlap, curve, mix-sweep,
// subsample-check, dsir, pipeline. All diagnostics go to stderr; data goes
// to the requested output files. Outputs are byte-identical across runs,
// thread counts, and input shard orderings.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "priorgate/analysis.hpp"
#include "priorgate/corpus_io.hpp"
#include "priorgate/filter.hpp"
#include "priorgate/hash.hpp"
#include "priorgate/parallel.hpp"
#include "priorgate/prior.hpp"
#include "priorgate/scorer.hpp"
#include "priorgate/tokenizer.hpp"
#include "priorgate/types.hpp"

namespace pg = priorgate;

namespace {

struct Options {
  std::vector<std::string> inputs;
  std::string majority_path, minority_path;
  std::string raw_path, ref_path;
  std::string scores_path, external_path, priors_path;
  std::string out, out_dir;

  std::string tokenizer = "whitespace";  // {bpe, whitespace}
  std::string vocab_path, merges_path;
  std::string format = "jsonl-text";  // {jsonl-text, jsonl-tokens}

  std::size_t block_size = 512;
  std::size_t min_block_tokens = 64;
  double b = 10.0;
  double e = 10.0;
  std::uint64_t seed = 0;
  std::uint64_t hash_seed = 0;
  int ngram_order = 2;
  std::size_t m_buckets = 10000;
  int threads = 0;

  std::uint64_t budget_tokens = 0;
  bool budget_tokens_set = false;
  double budget_fraction = 0.5;
  std::string budget_side = "keep";

  std::vector<double> e_grid = {1, 5, 10, 20, 50};
  std::vector<double> ratios = {1, 5, 10, 20, 25, 50};
  std::vector<double> b_grid = {1, 5, 10, 50, 100};
};

nlohmann::json config_json(const std::string& subcommand, const Options& o) {
  // thread count is deliberately omitted: outputs are contractually
  // independent of it, and the sidecar must be byte-stable across runs
  nlohmann::json j = {
      {"subcommand", subcommand},
      {"tokenizer", o.tokenizer},
      {"format", o.format},
      {"block_size", o.block_size},
      {"min_block_tokens", o.min_block_tokens},
      {"b", o.b},
      {"e", o.e},
      {"seed", o.seed},
      {"budget_side", o.budget_side},
  };
  if (!o.vocab_path.empty()) j["vocab"] = o.vocab_path;
  if (!o.merges_path.empty()) j["merges"] = o.merges_path;
  if (!o.inputs.empty()) j["inputs"] = o.inputs;
  if (o.budget_tokens_set) j["budget_tokens"] = o.budget_tokens;
  else j["budget_fraction"] = o.budget_fraction;
  return j;
}

void write_sidecar(const std::string& out_path, const nlohmann::json& config) {
  std::ofstream out(out_path + ".config.json", std::ios::trunc);
  if (!out) throw pg::DataError("cannot write sidecar for " + out_path);
  out << config.dump(2) << '\n';
}

pg::CorpusFormat parse_format(const std::string& f) {
  if (f == "jsonl-text") return pg::CorpusFormat::JsonlText;
  if (f == "jsonl-tokens") return pg::CorpusFormat::JsonlTokens;
  throw pg::UsageError("unknown format: " + f);
}

std::vector<pg::Document> read_inputs(const std::vector<std::string>& paths,
                                      pg::CorpusFormat format) {
  std::vector<pg::Document> docs;
  for (const auto& path : paths) {
    pg::ReadStats stats;
    pg::read_corpus(path, format,
                    [&](pg::Document&& d) { docs.push_back(std::move(d)); }, stats);
    std::cerr << path << ": " << stats.documents << " documents";
    if (stats.malformed > 0) {
      std::cerr << ", " << stats.malformed << " malformed lines";
      for (const auto& [line, msg] : stats.errors)
        std::cerr << "\n  line " << line << ": " << msg;
    }
    std::cerr << '\n';
  }
  return docs;
}

struct PreparedCorpus {
  std::vector<pg::Document> docs;  // tokenized, doc_id set
  std::size_t vocab_size = 0;
  std::string tokenizer_id;
  std::optional<pg::Tokenizer> tokenizer;
};

/// Tokenizes every document. In whitespace mode the vocabulary is built
/// from the word counts of the (b, seed) prior subsample and then frozen;
/// words outside the subsample map to the UNK id and take the floor prior.
PreparedCorpus prepare_corpus(std::vector<pg::Document> docs, const Options& o,
                              double b, std::uint64_t seed) {
  PreparedCorpus pc;
  const auto format = parse_format(o.format);

  if (format == pg::CorpusFormat::JsonlTokens) {
    for (auto& d : docs) {
      if (d.doc_id == 0) d.doc_id = pg::hash_token_ids(d.tokens);
      for (pg::TokenId t : d.tokens)
        pc.vocab_size = std::max(pc.vocab_size, static_cast<std::size_t>(t) + 1);
    }
    pc.docs = std::move(docs);
    pc.tokenizer_id = "tokens";
    return pc;
  }

  if (o.tokenizer == "bpe") {
    if (o.vocab_path.empty() || o.merges_path.empty())
      throw pg::UsageError("bpe tokenizer requires --vocab and --merges");
    pg::Tokenizer tok(pg::BpeVocabulary::load(o.vocab_path, o.merges_path));
    for (auto& d : docs) pg::tokenize_document(d, tok);
    pc.vocab_size = tok.vocab_size();
    pc.tokenizer_id = tok.fingerprint();
    pc.tokenizer = std::move(tok);
    pc.docs = std::move(docs);
    return pc;
  }

  if (o.tokenizer != "whitespace")
    throw pg::UsageError("unknown tokenizer: " + o.tokenizer);

  std::unordered_map<std::string, std::uint64_t> word_counts;
  for (auto& d : docs) {
    d.doc_id = pg::whitespace_doc_id(d.text);
    if (b >= 100.0 || pg::subsample_keeps(seed, d.doc_id, b))
      pg::count_words(d.text, word_counts);
  }
  if (word_counts.empty()) throw pg::DataError("subsample empty; raise b");
  pg::Tokenizer tok(pg::WhitespaceVocabulary::freeze(word_counts));
  for (auto& d : docs) pg::tokenize_document(d, tok);
  pc.vocab_size = tok.vocab_size();
  pc.tokenizer_id = tok.fingerprint();
  pc.tokenizer = std::move(tok);
  pc.docs = std::move(docs);
  return pc;
}

std::vector<pg::DocBlock> segment_corpus(const PreparedCorpus& pc, const Options& o) {
  std::vector<pg::DocBlock> blocks;
  for (const auto& d : pc.docs) {
    auto bs = pg::segment(d, o.block_size, o.min_block_tokens);
    blocks.insert(blocks.end(), std::make_move_iterator(bs.begin()),
                  std::make_move_iterator(bs.end()));
  }
  return blocks;
}

std::string sibling_path(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::uint64_t resolve_budget(const Options& o, std::uint64_t total_tokens) {
  if (o.budget_tokens_set) return o.budget_tokens;
  return static_cast<std::uint64_t>(static_cast<double>(total_tokens) *
                                    o.budget_fraction);
}

// ---- subcommand bodies ------------------------------------------------------

void run_priors(const Options& o) {
  auto pc = prepare_corpus(read_inputs(o.inputs, parse_format(o.format)), o, o.b,
                           o.seed);
  const int threads = pg::resolve_threads(o.threads);
  const auto table =
      pg::subsample_priors(pc.docs, o.b, o.seed, o.block_size, o.min_block_tokens,
                           pc.vocab_size, pc.tokenizer_id, threads);
  table.save(o.out);
  write_sidecar(o.out, config_json("priors", o));
  std::cerr << "priors: " << table.total() << " tokens counted, vocab "
            << table.vocab_size() << '\n';
}

void run_score(const Options& o) {
  const auto table = pg::PriorTable::load(o.priors_path);
  // reproduce the vocabulary freeze of the prior run: same (b, seed) subsample
  auto pc = prepare_corpus(read_inputs(o.inputs, parse_format(o.format)), o,
                           table.subsample_b(), table.seed());
  if (pc.tokenizer_id != table.tokenizer_id() && table.tokenizer_id() != "tokens")
    throw pg::DataError("tokenizer mismatch: prior table was built with '" +
                        table.tokenizer_id() + "', corpus encodes as '" +
                        pc.tokenizer_id + "'");
  const auto blocks = segment_corpus(pc, o);
  const auto scores =
      pg::score_corpus(blocks, table, pg::resolve_threads(o.threads));
  pg::write_scores(scores, o.out);
  write_sidecar(o.out, config_json("score", o));
  std::cerr << "score: " << scores.size() << " blocks scored\n";
}

void run_filter(const Options& o) {
  const auto scores = pg::read_scores(o.scores_path);
  const auto medians = pg::compute_medians(scores);
  std::uint64_t total_tokens = 0;
  for (const auto& s : scores) total_tokens += s.n_tokens;
  const auto budget = resolve_budget(o, total_tokens);
  const auto side =
      o.budget_side == "discard" ? pg::BudgetSide::Discard : pg::BudgetSide::Keep;
  const auto report = pg::select(scores, medians, budget, side);

  const std::string kept_path = sibling_path(o.out, ".kept.txt");
  const std::string discarded_path = sibling_path(o.out, ".discarded.txt");
  pg::write_id_list(report.kept_blocks, kept_path);
  pg::write_id_list(report.discarded_blocks, discarded_path);

  nlohmann::json j = {
      {"k", report.k},
      {"n_blocks", scores.size()},
      {"kept_blocks", report.kept_blocks.size()},
      {"discarded_blocks", report.discarded_blocks.size()},
      {"kept_tokens", report.kept_tokens},
      {"total_tokens", total_tokens},
      {"budget_tokens", report.budget_n},
      {"budget_side", o.budget_side},
      {"overlap_mu_sigma", report.overlap_mu_sigma},
      {"median_mu", medians.m_mu},
      {"median_sigma", medians.m_sigma},
      // stored as sibling file names so reports are location-independent
      {"kept_ids_file", std::filesystem::path(kept_path).filename().string()},
      {"discarded_ids_file", std::filesystem::path(discarded_path).filename().string()},
  };
  std::ofstream out(o.out, std::ios::trunc);
  if (!out) throw pg::DataError("cannot write report: " + o.out);
  out << j.dump(2) << '\n';
  write_sidecar(o.out, config_json("filter", o));
  std::cerr << "filter: k=" << report.k << ", kept " << report.kept_tokens << "/"
            << total_tokens << " tokens\n";
}

void run_overlap(const Options& o) {
  const auto scores = pg::read_scores(o.scores_path);
  const auto external = pg::read_external_scores(o.external_path);
  const auto rows = pg::overlap_vs_external(scores, external, o.e_grid);
  std::ofstream out(o.out, std::ios::trunc);
  if (!out) throw pg::DataError("cannot write overlap file: " + o.out);
  out << "e,overlap_mu,overlap_sigma\n";
  for (const auto& r : rows)
    out << pg::format_float(r.e) << ',' << pg::format_float(r.overlap_mu) << ','
        << pg::format_float(r.overlap_sigma) << '\n';
  write_sidecar(o.out, config_json("overlap", o));
}

void run_curve(const Options& o) {
  pg::prior_curve(pg::PriorTable::load(o.priors_path), o.out);
  write_sidecar(o.out, config_json("curve", o));
}

void run_mix_sweep(const Options& o) {
  const auto format = parse_format(o.format);
  auto majority_docs = read_inputs({o.majority_path}, format);
  auto minority_docs = read_inputs({o.minority_path}, format);

  // one shared vocabulary over both corpora
  std::vector<pg::Document> all = majority_docs;
  all.insert(all.end(), minority_docs.begin(), minority_docs.end());
  auto pc = prepare_corpus(std::move(all), o, 100.0, o.seed);
  std::vector<pg::Document> majority(pc.docs.begin(),
                                     pc.docs.begin() + majority_docs.size());
  std::vector<pg::Document> minority(pc.docs.begin() + majority_docs.size(),
                                     pc.docs.end());

  const auto rows = pg::mixture_sweep(majority, minority, o.ratios, o.e, o.seed,
                                      o.block_size, o.min_block_tokens,
                                      pc.vocab_size, pg::resolve_threads(o.threads));
  std::ofstream out(o.out, std::ios::trunc);
  if (!out) throw pg::DataError("cannot write sweep file: " + o.out);
  out << "a,minority_outlier_rate\n";
  for (const auto& r : rows)
    out << pg::format_float(r.a) << ',' << pg::format_float(r.minority_outlier_rate)
        << '\n';
  write_sidecar(o.out, config_json("mix-sweep", o));
}

void run_subsample_check(const Options& o) {
  auto pc = prepare_corpus(read_inputs(o.inputs, parse_format(o.format)), o, 100.0,
                           o.seed);
  const auto rows = pg::subsample_consistency(
      pc.docs, o.b_grid, o.e, o.seed, o.block_size, o.min_block_tokens,
      pc.vocab_size, pc.tokenizer_id, pg::resolve_threads(o.threads));
  std::ofstream out(o.out, std::ios::trunc);
  if (!out) throw pg::DataError("cannot write consistency file: " + o.out);
  out << "b,overlap_vs_full\n";
  for (const auto& r : rows) {
    // wall-clock is environment noise; keep it out of the byte-stable columns
    out << pg::format_float(r.b) << ',' << pg::format_float(r.overlap_vs_full)
        << '\n';
    std::cerr << "b=" << r.b << ": prior phase " << r.seconds_prior_phase << " s\n";
  }
  write_sidecar(o.out, config_json("subsample-check", o));
}

void run_dsir(const Options& o) {
  const auto format = parse_format(o.format);
  auto raw_docs = read_inputs({o.raw_path}, format);
  auto ref_docs = read_inputs({o.ref_path}, format);

  std::vector<pg::Document> all = raw_docs;
  all.insert(all.end(), ref_docs.begin(), ref_docs.end());
  auto pc = prepare_corpus(std::move(all), o, 100.0, o.seed);

  pg::TokenStrings strings;
  if (pc.tokenizer) {
    strings.reserve(pc.vocab_size);
    for (std::size_t id = 0; id < pc.vocab_size; ++id)
      strings.push_back(pc.tokenizer->token_string(static_cast<pg::TokenId>(id)));
  }

  std::vector<pg::DocBlock> raw_blocks, ref_blocks;
  for (std::size_t i = 0; i < pc.docs.size(); ++i) {
    auto bs = pg::segment(pc.docs[i], o.block_size, o.min_block_tokens);
    auto& dst = i < raw_docs.size() ? raw_blocks : ref_blocks;
    dst.insert(dst.end(), std::make_move_iterator(bs.begin()),
               std::make_move_iterator(bs.end()));
  }

  const auto p_raw =
      pg::dsir_features(raw_blocks, strings, o.ngram_order, o.m_buckets, o.hash_seed);
  const auto p_ref =
      pg::dsir_features(ref_blocks, strings, o.ngram_order, o.m_buckets, o.hash_seed);

  std::vector<std::pair<const pg::DocBlock*, double>> weighted;
  weighted.reserve(raw_blocks.size());
  for (const auto& b : raw_blocks)
    weighted.emplace_back(&b, pg::dsir_log_weight(b, strings, p_raw, p_ref));
  std::sort(weighted.begin(), weighted.end(), [](const auto& a, const auto& b) {
    return a.first->block_id < b.first->block_id;
  });

  std::ofstream out(o.out, std::ios::trunc);
  if (!out) throw pg::DataError("cannot write weight file: " + o.out);
  out << "block_id\tscore\n";
  for (const auto& [blk, w] : weighted)
    out << blk->block_id << '\t' << pg::format_float(w) << '\n';

  if (o.budget_tokens_set) {
    const auto kept = pg::dsir_select(weighted, o.budget_tokens);
    pg::write_id_list(kept, sibling_path(o.out, ".kept.txt"));
  }
  write_sidecar(o.out, config_json("dsir", o));
}

void run_pipeline(const Options& o) {
  std::filesystem::create_directories(o.out_dir);
  auto pc = prepare_corpus(read_inputs(o.inputs, parse_format(o.format)), o, o.b,
                           o.seed);
  const int threads = pg::resolve_threads(o.threads);

  const auto table =
      pg::subsample_priors(pc.docs, o.b, o.seed, o.block_size, o.min_block_tokens,
                           pc.vocab_size, pc.tokenizer_id, threads);
  const std::string priors_path = o.out_dir + "/priors.tsv";
  table.save(priors_path);
  write_sidecar(priors_path, config_json("pipeline", o));

  const auto blocks = segment_corpus(pc, o);
  const auto scores = pg::score_corpus(blocks, table, threads);
  const std::string scores_path = o.out_dir + "/scores.tsv";
  pg::write_scores(scores, scores_path);
  write_sidecar(scores_path, config_json("pipeline", o));

  const auto medians = pg::compute_medians(scores);
  std::uint64_t total_tokens = 0;
  for (const auto& s : scores) total_tokens += s.n_tokens;
  const auto budget = resolve_budget(o, total_tokens);
  const auto side =
      o.budget_side == "discard" ? pg::BudgetSide::Discard : pg::BudgetSide::Keep;
  const auto report = pg::select(scores, medians, budget, side);

  const std::string report_path = o.out_dir + "/report.json";
  pg::write_id_list(report.kept_blocks, o.out_dir + "/report.kept.txt");
  pg::write_id_list(report.discarded_blocks, o.out_dir + "/report.discarded.txt");
  nlohmann::json j = {
      {"k", report.k},
      {"n_blocks", scores.size()},
      {"kept_blocks", report.kept_blocks.size()},
      {"discarded_blocks", report.discarded_blocks.size()},
      {"kept_tokens", report.kept_tokens},
      {"total_tokens", total_tokens},
      {"budget_tokens", report.budget_n},
      {"budget_side", o.budget_side},
      {"overlap_mu_sigma", report.overlap_mu_sigma},
      {"median_mu", medians.m_mu},
      {"median_sigma", medians.m_sigma},
      {"kept_ids_file", "report.kept.txt"},
      {"discarded_ids_file", "report.discarded.txt"},
  };
  std::ofstream rep(report_path, std::ios::trunc);
  if (!rep) throw pg::DataError("cannot write report: " + report_path);
  rep << j.dump(2) << '\n';
  write_sidecar(report_path, config_json("pipeline", o));
  std::cerr << "pipeline: k=" << report.k << ", kept " << report.kept_tokens << "/"
            << total_tokens << " tokens\n";
}

void add_tokenizer_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--tokenizer", o.tokenizer, "Tokenizer mode")
      ->check(CLI::IsMember({"bpe", "whitespace"}));
  cmd->add_option("--vocab", o.vocab_path, "BPE vocab JSON path");
  cmd->add_option("--merges", o.merges_path, "BPE merges path");
  cmd->add_option("--format", o.format, "Input format")
      ->check(CLI::IsMember({"jsonl-text", "jsonl-tokens"}));
}

void add_block_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--block-size", o.block_size, "Tokens per block");
  cmd->add_option("--min-block-tokens", o.min_block_tokens,
                  "Minimum admitted block length");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"priorgate: token-prior corpus filtering"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads,
                 "Worker count (0 = PRIORGATE_THREADS or hardware)");

  auto* priors = app.add_subcommand("priors", "Estimate token priors");
  priors->add_option("--input", o.inputs, "Input corpus (repeatable)")->required();
  add_tokenizer_flags(priors, o);
  add_block_flags(priors, o);
  priors->add_option("--b", o.b, "Document subsample percent (0,100]");
  priors->add_option("--seed", o.seed, "Subsample seed");
  priors->add_option("--out", o.out, "Output prior table TSV")->required();

  auto* score = app.add_subcommand("score", "Score blocks against a prior table");
  score->add_option("--input", o.inputs, "Input corpus")->required();
  add_tokenizer_flags(score, o);
  add_block_flags(score, o);
  score->add_option("--priors", o.priors_path, "Prior table TSV")->required();
  score->add_option("--out", o.out, "Output score TSV")->required();

  auto* filter = app.add_subcommand("filter", "Budgeted median-distance selection");
  filter->add_option("--scores", o.scores_path, "Score TSV")->required();
  auto* bt = filter->add_option("--budget-tokens", o.budget_tokens, "Token budget");
  filter->add_option("--budget-fraction", o.budget_fraction,
                     "Budget as fraction of total tokens");
  filter->add_option("--budget-side", o.budget_side, "Which side the budget bounds")
      ->check(CLI::IsMember({"keep", "discard"}));
  filter->add_option("--out", o.out, "Output report JSON")->required();

  auto* overlap = app.add_subcommand("overlap", "Outlier overlap vs external scores");
  overlap->add_option("--scores", o.scores_path, "Score TSV")->required();
  overlap->add_option("--external", o.external_path, "External score TSV")->required();
  overlap->add_option("--e-grid", o.e_grid, "Trim percents")->delimiter(',');
  overlap->add_option("--out", o.out, "Output CSV")->required();

  auto* curve = app.add_subcommand("curve", "Export sorted prior-rank curve");
  curve->add_option("--priors", o.priors_path, "Prior table TSV")->required();
  curve->add_option("--out", o.out, "Output CSV")->required();

  auto* mix = app.add_subcommand("mix-sweep", "Minority-mixture learnability sweep");
  mix->add_option("--majority", o.majority_path, "Majority corpus")->required();
  mix->add_option("--minority", o.minority_path, "Minority corpus")->required();
  add_tokenizer_flags(mix, o);
  add_block_flags(mix, o);
  mix->add_option("--ratios", o.ratios, "Mixture percents a")->delimiter(',');
  mix->add_option("--e", o.e, "Outlier trim percent");
  mix->add_option("--seed", o.seed, "Subsample seed");
  mix->add_option("--out", o.out, "Output CSV")->required();

  auto* sub = app.add_subcommand("subsample-check", "Subsampled-prior consistency");
  sub->add_option("--input", o.inputs, "Input corpus")->required();
  add_tokenizer_flags(sub, o);
  add_block_flags(sub, o);
  sub->add_option("--b-grid", o.b_grid, "Subsample percents")->delimiter(',');
  sub->add_option("--e", o.e, "Outlier trim percent");
  sub->add_option("--seed", o.seed, "Subsample seed");
  sub->add_option("--out", o.out, "Output CSV")->required();

  auto* dsir = app.add_subcommand("dsir", "Hashed n-gram importance weights");
  dsir->add_option("--raw", o.raw_path, "Raw corpus")->required();
  dsir->add_option("--ref", o.ref_path, "Reference corpus")->required();
  add_tokenizer_flags(dsir, o);
  add_block_flags(dsir, o);
  dsir->add_option("--n", o.ngram_order, "n-gram order (1 or 2)");
  dsir->add_option("--m", o.m_buckets, "Hash bucket count");
  dsir->add_option("--hash-seed", o.hash_seed, "n-gram hash seed");
  auto* dbt = dsir->add_option("--budget-tokens", o.budget_tokens,
                               "Keep highest-weight blocks up to this budget");
  dsir->add_option("--out", o.out, "Output weight TSV")->required();

  auto* pipeline = app.add_subcommand("pipeline", "priors -> score -> filter");
  pipeline->add_option("--input", o.inputs, "Input corpus (repeatable)")->required();
  add_tokenizer_flags(pipeline, o);
  add_block_flags(pipeline, o);
  pipeline->add_option("--b", o.b, "Document subsample percent (0,100]");
  pipeline->add_option("--seed", o.seed, "Subsample seed");
  auto* pbt =
      pipeline->add_option("--budget-tokens", o.budget_tokens, "Token budget");
  pipeline->add_option("--budget-fraction", o.budget_fraction,
                       "Budget as fraction of total tokens");
  pipeline->add_option("--budget-side", o.budget_side,
                       "Which side the budget bounds")
      ->check(CLI::IsMember({"keep", "discard"}));
  pipeline->add_option("--out-dir", o.out_dir, "Output directory")->required();

  // --threads lives on the parent app; let subcommands pass it up
  for (auto* sc : app.get_subcommands({})) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cout, std::cerr);
    return 1;
  }
  o.budget_tokens_set = bt->count() > 0 || dbt->count() > 0 || pbt->count() > 0;

  try {
    if (priors->parsed()) run_priors(o);
    else if (score->parsed()) run_score(o);
    else if (filter->parsed()) run_filter(o);
    else if (overlap->parsed()) run_overlap(o);
    else if (curve->parsed()) run_curve(o);
    else if (mix->parsed()) run_mix_sweep(o);
    else if (sub->parsed()) run_subsample_check(o);
    else if (dsir->parsed()) run_dsir(o);
    else if (pipeline->parsed()) run_pipeline(o);
  } catch (const pg::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

// Copyright 2026 The vec2sent Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "v2s/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "v2s/algebra.hpp"
#include "v2s/analysis.hpp"
#include "v2s/corpus.hpp"
#include "v2s/diagnostics.hpp"
#include "v2s/encoders.hpp"
#include "v2s/errors.hpp"
#include "v2s/serialization.hpp"

namespace v2s {

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json{{"corpus", c.corpus},
                     {"eval_corpus", c.eval_corpus},
                     {"vocab", c.vocab},
                     {"embeddings", c.embeddings},
                     {"checkpoint", c.checkpoint},
                     {"out_dir", c.out_dir},
                     {"encoder", c.encoder},
                     {"max_len", c.max_len},
                     {"min_freq", c.min_freq},
                     {"max_vocab", c.max_vocab},
                     {"random_embeddings", c.random_embeddings},
                     {"eval_limit", c.eval_limit},
                     {"mover_scores", c.mover_scores},
                     {"beam_width", c.beam_width},
                     {"decoder", c.decoder},
                     {"training", c.training},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  const RunConfig d;
  c.corpus = j.value("corpus", d.corpus);
  c.eval_corpus = j.value("eval_corpus", d.eval_corpus);
  c.vocab = j.value("vocab", d.vocab);
  c.embeddings = j.value("embeddings", d.embeddings);
  c.checkpoint = j.value("checkpoint", d.checkpoint);
  c.out_dir = j.value("out_dir", d.out_dir);
  c.encoder = j.value("encoder", d.encoder);
  c.max_len = j.value("max_len", d.max_len);
  c.min_freq = j.value("min_freq", d.min_freq);
  c.max_vocab = j.value("max_vocab", d.max_vocab);
  c.random_embeddings = j.value("random_embeddings", d.random_embeddings);
  c.eval_limit = j.value("eval_limit", d.eval_limit);
  c.mover_scores = j.value("mover_scores", d.mover_scores);
  c.beam_width = j.value("beam_width", d.beam_width);
  c.decoder = j.value("decoder", d.decoder);
  c.training = j.value("training", d.training);
  c.seed = j.value("seed", d.seed);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  try {
    return nlohmann::json::parse(in).get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void save_run_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file: " + path);
  out << nlohmann::json(config).dump(2) << '\n';
}

namespace {

const std::vector<double> kDefaultAlphas = {0.0, 0.25, 0.5, 0.75, 1.0};

std::string bundled(const std::string& name) {
  const char* env = std::getenv("V2S_DATA_DIR");
  return (std::filesystem::path(env && *env ? env : V2S_DATA_DIR) / name).string();
}

const std::string& require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw ConfigError(flag + " is required");
  return value;
}

std::vector<double> parse_alphas(const std::string& text) {
  if (text.empty()) return kDefaultAlphas;
  std::vector<double> alphas;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      alphas.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("bad alpha value '" + item + "'");
    }
  }
  return alphas;
}

std::vector<std::string> split_fields(const std::string& line) {
  const char sep = line.find('\t') != std::string::npos ? '\t' : '|';
  std::vector<std::string> fields;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, sep);) {
    const auto b = f.find_first_not_of(" \t\r");
    const auto e = f.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : f.substr(b, e - b + 1));
  }
  return fields;
}

/// Parsed command line plus the streams a subcommand talks to.
struct Session {
  Session(std::ostream& o, std::ostream& e, std::istream& i) : out(o), err(e), in(i) {}

  RunConfig cfg;
  std::string conditioning;
  std::string head;
  std::ostream& out;
  std::ostream& err;
  std::istream& in;

  // subcommand-specific inputs
  std::string table, by, diagnostics, downstream, sentences, vectors, triples, a, b, c, x, y, alphas;
  bool average = false, extrapolate = false, binary = false;

  std::string out_file(const std::string& name) const {
    std::filesystem::create_directories(require(cfg.out_dir, "--out"));
    return (std::filesystem::path(cfg.out_dir) / name).string();
  }
  bool has_out() const { return !cfg.out_dir.empty(); }
  void save_config() const {
    if (has_out()) save_run_config(cfg, out_file("run_config.json"));
  }

  Vocabulary load_vocab() const { return Vocabulary::load(require(cfg.vocab, "--vocab")); }

  /// The vocabulary named by --vocab, or one built from `corpus` and saved
  /// under the output directory.
  Vocabulary vocab_for(const std::vector<TokenSequence>& corpus) {
    if (!cfg.vocab.empty()) return Vocabulary::load(cfg.vocab);
    auto vocab = build_vocabulary(corpus, cfg.min_freq, cfg.max_vocab);
    cfg.vocab = out_file("vocab.txt");
    vocab.save(cfg.vocab);
    return vocab;
  }

  std::shared_ptr<const TokenEmbeddingTable> token_table(const Vocabulary& vocab) {
    if (!cfg.embeddings.empty()) {
      return std::make_shared<const TokenEmbeddingTable>(TokenEmbeddingTable::load_text(cfg.embeddings));
    }
    if (cfg.random_embeddings <= 0) throw ConfigError("native encoders need --embeddings or --random-embeddings");
    const std::vector<std::string> words(vocab.tokens().begin() + 4, vocab.tokens().end());
    auto table = std::make_shared<const TokenEmbeddingTable>(
        TokenEmbeddingTable::random(words, cfg.random_embeddings, cfg.seed));
    if (has_out()) {
      cfg.embeddings = out_file("token_embeddings.txt");
      cfg.random_embeddings = 0;
      table->save_text(cfg.embeddings);
    }
    return table;
  }

  /// --encoder when given, else the checkpoint's encoder, else avg.
  Encoder encoder(const Vocabulary& vocab, const std::optional<EncoderSpec>& stored = std::nullopt) {
    EncoderSpec spec;
    if (!cfg.encoder.empty() || !stored) {
      const std::string text = cfg.encoder.empty() ? "avg" : cfg.encoder;
      if (text.rfind("precomputed", 0) == 0) return Encoder(parse_encoder_spec(text, 0));
      auto table = token_table(vocab);
      return Encoder(parse_encoder_spec(text, table->dim()), table);
    }
    if (stored->kind == EncoderKind::kPrecomputed) return Encoder(*stored);
    return Encoder(*stored, token_table(vocab));
  }

  DecoderCheckpoint checkpoint(const Vocabulary& vocab) const {
    return DecoderCheckpoint::load(require(cfg.checkpoint, "--checkpoint"), vocab);
  }
};

std::vector<TokenSequence> tokenized(const std::vector<RawSentence>& raw) {
  std::vector<TokenSequence> seqs;
  seqs.reserve(raw.size());
  for (const auto& r : raw) seqs.push_back(tokenize(r.text));
  return seqs;
}

SentenceEmbedding embed_text(const Encoder& encoder, const Vocabulary& vocab, const std::string& text) {
  if (encoder.spec().kind == EncoderKind::kPrecomputed) {
    throw ConfigError("free text needs a native encoder; precomputed vectors only cover corpus lines");
  }
  return encoder.encode(vocab.apply(tokenize(text)));
}

int cmd_build_vocab(Session& s) {
  const auto raw = load_sentences(require(s.cfg.corpus, "--corpus"), s.cfg.max_len);
  const auto vocab = build_vocabulary(tokenized(raw), s.cfg.min_freq, s.cfg.max_vocab);
  const auto path = s.out_file("vocab.txt");
  vocab.save(path);
  s.cfg.vocab = path;
  s.save_config();
  s.out << "vocabulary: " << vocab.size() << " entries from " << raw.size() << " sentences -> " << path << '\n';
  return 0;
}

int cmd_encode(Session& s) {
  const auto& corpus = require(s.cfg.corpus, "--corpus");
  // every line gets a row, so the file can be used as a precomputed encoder for the same corpus
  const auto raw = load_sentences(corpus, std::numeric_limits<std::size_t>::max());
  std::size_t lines = 0;
  {
    std::ifstream in(corpus, std::ios::binary);
    for (std::string line; std::getline(in, line);) ++lines;
  }
  const auto seqs = tokenized(raw);
  const auto vocab = s.vocab_for(seqs);
  const auto encoder = s.encoder(vocab);
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lines), encoder.dim());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(raw[i].line_index)) =
        encoder.encode(vocab.apply(seqs[i]), raw[i].line_index).values.transpose();
  }
  const PrecomputedEmbeddings table(std::move(rows));
  const auto path = s.out_file(s.binary ? "embeddings.bin" : "embeddings.txt");
  if (s.binary) table.save_binary(path);
  else table.save_text(path);
  s.save_config();
  s.out << "encoded " << raw.size() << " sentences (" << lines << " rows, dim " << encoder.dim() << ") with "
        << encoder.id() << " -> " << path << '\n';
  return 0;
}

int cmd_train(Session& s) {
  const auto raw = load_sentences(require(s.cfg.corpus, "--corpus"), s.cfg.max_len);
  if (raw.empty()) throw DomainError("no training sentences within --max-len in " + s.cfg.corpus);
  auto seqs = tokenized(raw);
  const auto vocab = s.vocab_for(seqs);
  const auto encoder = s.encoder(vocab);
  std::vector<SentenceEmbedding> conds;
  conds.reserve(seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    seqs[i] = vocab.apply(seqs[i]);
    conds.push_back(encoder.encode(seqs[i], raw[i].line_index));
  }
  s.cfg.decoder.vocab_size = static_cast<int>(vocab.size());
  s.cfg.decoder.cond_dim = static_cast<int>(encoder.dim());
  Decoder decoder(s.cfg.decoder, s.cfg.seed);
  s.err << "training on " << seqs.size() << " sentences, " << decoder.parameters().count() << " parameters\n";
  const auto meta = train(decoder, seqs, conds, s.cfg.training, [&](const EpochRecord& r) {
    s.err << "epoch " << r.epoch << " loss " << r.mean_loss << " (" << r.wall_seconds << " s)\n";
  });
  const DecoderCheckpoint ckpt{std::move(decoder), vocab.digest(), encoder.id(), encoder.spec(), meta};
  s.cfg.checkpoint = s.out_file("model.v2s");
  ckpt.save(s.cfg.checkpoint);
  s.save_config();
  s.out << "loss " << meta.initial_loss << " -> " << meta.final_loss << "; checkpoint " << s.cfg.checkpoint << '\n';
  return 0;
}

int cmd_generate(Session& s) {
  const auto vocab = s.load_vocab();
  const auto ckpt = s.checkpoint(vocab);
  if (!s.vectors.empty()) {
    const auto table = PrecomputedEmbeddings::load(s.vectors, ckpt.config().cond_dim);
    std::ofstream file;
    if (s.has_out()) file.open(s.out_file("generations.txt"), std::ios::binary);
    for (std::size_t i = 0; i < table.size(); ++i) {
      const auto text = decode_vector(ckpt, vocab, table.row(i), s.cfg.beam_width).output.text();
      s.out << text << '\n';
      if (file.is_open()) file << text << '\n';
    }
    s.save_config();
    return 0;
  }
  const auto& path = s.sentences.empty() ? s.cfg.corpus : s.sentences;
  const auto raw = load_sentences(require(path, "--sentences or --vectors"), s.cfg.max_len);
  const auto encoder = s.encoder(vocab, ckpt.encoder);
  std::vector<SentencePair> pairs;
  for (const auto& r : raw) {
    auto x = vocab.apply(tokenize(r.text));
    auto y = generate(ckpt, vocab, encoder.encode(x, r.line_index), s.cfg.beam_width).output;
    s.out << y.text() << '\n';
    pairs.push_back({std::move(x), std::move(y)});
  }
  if (s.has_out()) write_pairs_jsonl(s.out_file("pairs.jsonl"), pairs);
  s.save_config();
  return 0;
}

PairScorer mover_lookup(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mover scores: " + path);
  auto scores = std::make_shared<std::map<std::pair<std::string, std::string>, double>>();
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      (*scores)[{j.at("input").get<std::string>(), j.at("output").get<std::string>()}] = j.at("score").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return [scores](const std::string& x, const std::string& y) {
    const auto it = scores->find({x, y});
    if (it == scores->end()) throw LookupError("no score for this pair");
    return it->second;
  };
}

int cmd_diagnose(Session& s) {
  const auto vocab = s.load_vocab();
  const auto ckpt = s.checkpoint(vocab);
  const auto& path = s.cfg.eval_corpus.empty() ? s.cfg.corpus : s.cfg.eval_corpus;
  auto raw = load_sentences(require(path, "--eval"), s.cfg.max_len);
  if (s.cfg.eval_limit > 0 && raw.size() > s.cfg.eval_limit) raw.resize(s.cfg.eval_limit);
  std::vector<TokenSequence> eval;
  std::vector<std::size_t> lines;
  for (const auto& r : raw) {
    eval.push_back(vocab.apply(tokenize(r.text)));
    lines.push_back(r.line_index);
  }
  const auto encoder = s.encoder(vocab, ckpt.encoder);
  std::vector<SentencePair> pairs;
  const auto report = diagnose(ckpt, vocab, encoder, eval, lines, mover_lookup(s.cfg.mover_scores), &pairs);
  const auto j = to_json(report);
  if (s.has_out()) {
    std::ofstream(s.out_file("report.json"), std::ios::binary) << j.dump(2) << '\n';
    write_pairs_jsonl(s.out_file("pairs.jsonl"), pairs);
  }
  s.save_config();
  s.out << j.dump(2) << '\n';
  return 0;
}

int cmd_correlate(Session& s) {
  const auto diag = ScoreTable::load_csv(s.diagnostics.empty() ? bundled("metrics.csv") : s.diagnostics);
  const auto tasks = ScoreTable::load_csv(s.downstream.empty() ? bundled("downstream.csv") : s.downstream);
  const auto m = correlation_matrix(diag, tasks);
  const auto summary = summary_json(m);
  if (s.has_out()) {
    m.save_csv(s.out_file("corr.csv"));
    std::ofstream(s.out_file("summary.json"), std::ios::binary) << summary.dump(2) << '\n';
  }
  s.save_config();
  s.out << m.to_csv() << summary.dump(2) << '\n';
  return 0;
}

int cmd_rank(Session& s) {
  const auto table = ScoreTable::load_csv(s.table.empty() ? bundled("metrics.csv") : s.table);
  std::vector<std::string> excluded;
  const auto ranking = s.by.empty() || s.average ? average_rank(table, &excluded) : rank_encoders(table, s.by);
  for (const auto& e : excluded) s.err << "note: " << e << " lacks scores and is left out of the average rank\n";
  std::ostringstream csv;
  csv.precision(17);
  csv << "rank,encoder,score\n";
  for (const auto& e : ranking) {
    s.out << e.rank << '\t' << e.encoder << '\t' << e.score << '\n';
    csv << e.rank << ',' << e.encoder << ',' << e.score << '\n';
  }
  if (s.has_out()) std::ofstream(s.out_file("ranks.csv"), std::ios::binary) << csv.str();
  s.save_config();
  return 0;
}

std::string run_analogy(const DecoderCheckpoint& ckpt, const Vocabulary& vocab, const Encoder& encoder,
                        const std::string& a, const std::string& b, const std::string& c) {
  const auto u = analogy(embed_text(encoder, vocab, a), embed_text(encoder, vocab, b), embed_text(encoder, vocab, c));
  return decode_vector(ckpt, vocab, u).output.text();
}

int cmd_analogy(Session& s) {
  const auto vocab = s.load_vocab();
  const auto ckpt = s.checkpoint(vocab);
  const auto encoder = s.encoder(vocab, ckpt.encoder);
  std::vector<std::array<std::string, 3>> queries;
  if (!s.triples.empty()) {
    std::ifstream in(s.triples, std::ios::binary);
    if (!in) throw IoError("cannot open triples file: " + s.triples);
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto f = split_fields(line);
      if (f.size() != 3) throw FormatError(s.triples + ":" + std::to_string(n) + ": expected three sentences");
      queries.push_back({f[0], f[1], f[2]});
    }
  } else {
    queries.push_back({require(s.a, "--a"), require(s.b, "--b"), require(s.c, "--c")});
  }
  std::ofstream file;
  if (s.has_out()) file.open(s.out_file("analogies.jsonl"), std::ios::binary);
  for (const auto& q : queries) {
    const auto text = run_analogy(ckpt, vocab, encoder, q[0], q[1], q[2]);
    s.out << text << '\n';
    if (file.is_open()) file << nlohmann::json{{"a", q[0]}, {"b", q[1]}, {"c", q[2]}, {"output", text}}.dump() << '\n';
  }
  s.save_config();
  return 0;
}

void print_sweep(std::ostream& out, const DecoderCheckpoint& ckpt, const Vocabulary& vocab, const Encoder& encoder,
                 const std::string& x, const std::string& y, const std::vector<double>& alphas, bool extrapolate,
                 std::ostream* jsonl = nullptr) {
  const auto sweep =
      interpolation_sweep(ckpt, vocab, embed_text(encoder, vocab, x), embed_text(encoder, vocab, y), alphas, extrapolate);
  for (const auto& [alpha, result] : sweep) {
    out << alpha << '\t' << result.output.text() << '\n';
    if (jsonl) *jsonl << nlohmann::json{{"alpha", alpha}, {"output", result.output.text()}}.dump() << '\n';
  }
}

int cmd_interpolate(Session& s) {
  const auto vocab = s.load_vocab();
  const auto ckpt = s.checkpoint(vocab);
  const auto encoder = s.encoder(vocab, ckpt.encoder);
  std::ofstream file;
  if (s.has_out()) file.open(s.out_file("interpolations.jsonl"), std::ios::binary);
  print_sweep(s.out, ckpt, vocab, encoder, require(s.x, "--x"), require(s.y, "--y"), parse_alphas(s.alphas),
              s.extrapolate, file.is_open() ? &file : nullptr);
  s.save_config();
  return 0;
}

constexpr const char* kReplHelp =
    "commands:\n"
    "  <sentence>                 reconstruct a sentence\n"
    "  :analogy a | b | c         decode e(a) - e(b) + e(c)\n"
    "  :interp x | y [| alphas]   decode alpha*e(x) + (1-alpha)*e(y), alphas comma-separated\n"
    "  :help, :quit\n";

int cmd_repl(Session& s) {
  const auto vocab = s.load_vocab();
  const auto ckpt = s.checkpoint(vocab);
  const auto encoder = s.encoder(vocab, ckpt.encoder);
  s.out << kReplHelp << "> " << std::flush;
  for (std::string line; std::getline(s.in, line); s.out << "> " << std::flush) {
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    try {
      if (line == ":quit" || line == ":q") break;
      if (line == ":help") {
        s.out << kReplHelp;
      } else if (line.rfind(":analogy", 0) == 0) {
        const auto f = split_fields(line.substr(8));
        if (f.size() != 3) throw FormatError("usage: :analogy a | b | c");
        s.out << run_analogy(ckpt, vocab, encoder, f[0], f[1], f[2]) << '\n';
      } else if (line.rfind(":interp", 0) == 0) {
        const auto f = split_fields(line.substr(7));
        if (f.size() != 2 && f.size() != 3) throw FormatError("usage: :interp x | y [| alphas]");
        print_sweep(s.out, ckpt, vocab, encoder, f[0], f[1], parse_alphas(f.size() == 3 ? f[2] : ""), s.extrapolate);
      } else if (line[0] == ':') {
        throw FormatError("unknown command " + line.substr(0, line.find(' ')) + " (try :help)");
      } else {
        s.out << decode_vector(ckpt, vocab, embed_text(encoder, vocab, line)).output.text() << '\n';
      }
    } catch (const Error& e) {
      s.out << "error: " << e.what() << '\n';
    }
  }
  s.out << '\n';
  return 0;
}

std::optional<std::string> prescan_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  return path;
}

void add_common(CLI::App* sub, Session& s) {
  sub->add_option("--config", "JSON run config; flags override its fields");
  sub->add_option("--seed", s.cfg.seed, "seed for every random choice")->capture_default_str();
  sub->add_option("--out", s.cfg.out_dir, "output directory");
}

void add_corpus(CLI::App* sub, Session& s) {
  sub->add_option("--corpus", s.cfg.corpus, "sentences, one per line");
  sub->add_option("--max-len", s.cfg.max_len, "drop sentences with more tokens")->capture_default_str();
}

void add_encoder(CLI::App* sub, Session& s, bool vocab_flags) {
  sub->add_option("--encoder", s.cfg.encoder,
                  "avg, max, hier[:n], concat[:avg+max+hier] or precomputed:FILE (default: the checkpoint's, else avg)");
  sub->add_option("--embeddings", s.cfg.embeddings, "token embeddings, word2vec text format");
  sub->add_option("--random-embeddings", s.cfg.random_embeddings,
                  "use seeded random token vectors of this width (saved to OUT/token_embeddings.txt)");
  sub->add_option("--vocab", s.cfg.vocab, vocab_flags ? "vocabulary file (built from the corpus when absent)"
                                                       : "vocabulary file");
  if (vocab_flags) {
    sub->add_option("--min-freq", s.cfg.min_freq, "vocabulary frequency cutoff")->capture_default_str();
    sub->add_option("--max-vocab", s.cfg.max_vocab, "vocabulary size including specials")->capture_default_str();
  }
}

void add_checkpoint(CLI::App* sub, Session& s) {
  sub->add_option("--checkpoint", s.cfg.checkpoint, "trained decoder");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, std::istream& in) {
  Session s(out, err, in);
  CLI::App app{"Decode sentence embeddings back into text and probe what they keep", "v2s"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  app.footer("Exit status: 0 ok, 1 runtime error, 2 usage error.");

  try {
    if (const auto path = prescan_config(args)) s.cfg = load_run_config(*path);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  s.conditioning = to_string(s.cfg.decoder.conditioning);
  s.head = to_string(s.cfg.decoder.head);

  auto* build_vocab = app.add_subcommand("build-vocab", "build a vocabulary from a corpus");
  add_common(build_vocab, s);
  add_corpus(build_vocab, s);
  build_vocab->add_option("--min-freq", s.cfg.min_freq, "frequency cutoff")->capture_default_str();
  build_vocab->add_option("--max-vocab", s.cfg.max_vocab, "size including specials")->capture_default_str();

  auto* encode = app.add_subcommand("encode", "encode every corpus line into an embedding file");
  add_common(encode, s);
  add_corpus(encode, s);
  add_encoder(encode, s, true);
  encode->add_flag("--binary", s.binary, "write the binary embedding format");

  auto* train_cmd = app.add_subcommand("train", "train a decoder on a corpus and encoder");
  add_common(train_cmd, s);
  add_corpus(train_cmd, s);
  add_encoder(train_cmd, s, true);
  auto& dc = s.cfg.decoder;
  train_cmd->add_option("--word-dim", dc.word_dim, "decoder word embedding width")->capture_default_str();
  train_cmd->add_option("--hidden", dc.hidden_dim, "LSTM hidden width")->capture_default_str();
  train_cmd->add_option("--layers", dc.num_layers, "LSTM layers")->capture_default_str();
  train_cmd->add_option("--conditioning", s.conditioning, "concat or init_state")->capture_default_str();
  train_cmd->add_option("--head", s.head, "softmax or mos")->capture_default_str();
  train_cmd->add_option("--components", dc.mos_components, "mixture components")->capture_default_str();
  train_cmd->add_option("--max-gen-len", dc.max_gen_len, "generation length cap")->capture_default_str();
  auto& tr = s.cfg.training;
  train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
  train_cmd->add_option("--batch-size", tr.batch_size)->capture_default_str();
  train_cmd->add_option("--lr", tr.learning_rate, "Adam learning rate")->capture_default_str();
  train_cmd->add_option("--clip", tr.clip_norm, "global gradient norm cap")->capture_default_str();

  auto* generate_cmd = app.add_subcommand("generate", "decode sentences or embedding vectors");
  add_common(generate_cmd, s);
  add_checkpoint(generate_cmd, s);
  add_encoder(generate_cmd, s, false);
  generate_cmd->add_option("--sentences", s.sentences, "sentences to reconstruct, one per line");
  generate_cmd->add_option("--vectors", s.vectors, "embedding file to decode row by row");
  generate_cmd->add_option("--max-len", s.cfg.max_len, "drop longer sentences")->capture_default_str();
  generate_cmd->add_option("--beam", s.cfg.beam_width, "beam width (1 = greedy)")->capture_default_str();

  auto* diagnose_cmd = app.add_subcommand("diagnose", "reconstruct an evaluation corpus and score it");
  add_common(diagnose_cmd, s);
  add_checkpoint(diagnose_cmd, s);
  add_encoder(diagnose_cmd, s, false);
  diagnose_cmd->add_option("--eval", s.cfg.eval_corpus, "evaluation sentences");
  diagnose_cmd->add_option("--corpus", s.cfg.corpus, "fallback when --eval is absent");
  diagnose_cmd->add_option("--max-len", s.cfg.max_len)->capture_default_str();
  diagnose_cmd->add_option("--limit", s.cfg.eval_limit, "score at most this many sentences (0 = all)");
  diagnose_cmd->add_option("--mover-scores", s.cfg.mover_scores, "JSONL of {input, output, score} from an external scorer");

  auto* correlate = app.add_subcommand("correlate", "Spearman between diagnostic and downstream scores");
  add_common(correlate, s);
  correlate->add_option("--diagnostics", s.diagnostics, "diagnostic score CSV (default: bundled metrics)");
  correlate->add_option("--downstream", s.downstream, "downstream score CSV (default: bundled tasks)");

  auto* rank = app.add_subcommand("rank", "rank encoders by one row or by average rank");
  add_common(rank, s);
  rank->add_option("--table", s.table, "score CSV (default: bundled metrics)");
  rank->add_option("--by", s.by, "row to rank by");
  rank->add_flag("--average", s.average, "average rank over all rows (default without --by)");

  auto* analogy_cmd = app.add_subcommand("analogy", "decode e(a) - e(b) + e(c)");
  add_common(analogy_cmd, s);
  add_checkpoint(analogy_cmd, s);
  add_encoder(analogy_cmd, s, false);
  analogy_cmd->add_option("--a", s.a);
  analogy_cmd->add_option("--b", s.b);
  analogy_cmd->add_option("--c", s.c);
  analogy_cmd->add_option("--triples", s.triples, "file of 'a | b | c' or tab-separated lines");

  auto* interpolate_cmd = app.add_subcommand("interpolate", "decode points between two sentence embeddings");
  add_common(interpolate_cmd, s);
  add_checkpoint(interpolate_cmd, s);
  add_encoder(interpolate_cmd, s, false);
  interpolate_cmd->add_option("--x", s.x);
  interpolate_cmd->add_option("--y", s.y);
  interpolate_cmd->add_option("--alphas", s.alphas, "comma-separated weights on x (default 0,0.25,0.5,0.75,1)");
  interpolate_cmd->add_flag("--extrapolate", s.extrapolate, "allow weights outside [0, 1]");

  auto* repl = app.add_subcommand("repl", "interactive reconstruction, analogies and interpolation");
  add_common(repl, s);
  add_checkpoint(repl, s);
  add_encoder(repl, s, false);
  repl->add_flag("--extrapolate", s.extrapolate, "allow weights outside [0, 1]");

  std::vector<const char*> argv{"v2s"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n\n";
    const auto chosen = app.get_subcommands();
    err << (chosen.empty() ? app.help() : chosen.back()->help());
    return 2;
  }

  try {
    s.cfg.decoder.conditioning = parse_conditioning(s.conditioning);
    s.cfg.decoder.head = parse_output_head(s.head);
    s.cfg.training.seed = s.cfg.seed;
    const auto* sub = app.get_subcommands().front();
    const auto& name = sub->get_name();
    if (name == "build-vocab") return cmd_build_vocab(s);
    if (name == "encode") return cmd_encode(s);
    if (name == "train") return cmd_train(s);
    if (name == "generate") return cmd_generate(s);
    if (name == "diagnose") return cmd_diagnose(s);
    if (name == "correlate") return cmd_correlate(s);
    if (name == "rank") return cmd_rank(s);
    if (name == "analogy") return cmd_analogy(s);
    if (name == "interpolate") return cmd_interpolate(s);
    if (name == "repl") return cmd_repl(s);
    err << "error: unhandled subcommand " << name << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr, std::cin);
}

}  // namespace v2s

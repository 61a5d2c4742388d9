// privmark: three-party watermarking engine CLI.
//
// Subcommands: party (long-running TCP node), sectable (build the secret
// table), insert, detect, bench, eval. The default transport runs all three
// parties in-process over the in-memory hub; with --config pointing at a TCP
// session file the command acts as its configured party.

#include "privmark/config.hpp"
#include "privmark/corpus.hpp"
#include "privmark/plain_pipeline.hpp"
#include "privmark/sha256.hpp"
#include "privmark/tcp_transport.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

using namespace privmark;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop = true; }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

json stats_to_json(const SessionStats& stats) {
  json j = json::object();
  std::map<std::string, json> phases;
  for (int p = 0; p < 3; ++p) {
    for (const auto& [phase, st] : stats.per_party[p]) {
      j[phase][party_name(party_from_index(p))] = {
          {"messages", st.messages},
          {"bytes", st.bytes},
          {"rounds", st.rounds},
          {"seconds", st.seconds}};
    }
  }
  return j;
}

json stats_to_json_single(PartyId me, const CommStats& stats) {
  json j = json::object();
  for (const auto& [phase, st] : stats.phases())
    j[phase][party_name(me)] = {{"messages", st.messages},
                                {"bytes", st.bytes},
                                {"rounds", st.rounds},
                                {"seconds", st.seconds}};
  return j;
}

void maybe_write(const std::string& path, const std::string& content) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << content;
}

std::string transcript_hash(const std::array<std::vector<SentFrame>, 3>& ts) {
  Sha256 h;
  for (const auto& t : ts)
    for (const auto& f : t) h.update(f.frame_bytes.data(), f.frame_bytes.size());
  return h.hex_digest();
}

// --- common options -------------------------------------------------------------

struct CommonOpts {
  std::string config_path;
  std::string mode = "mpc";  // mpc | plaintext
  std::string profile;       // empty: unshaped (or config's)
  u64 seed = 0;              // 0: keep config/default
  bool verbose_count = false;
  std::string out_path;       // report JSON
  std::string stats_out;      // CommStats JSON
  // data inputs
  std::string vocab_path;
  std::string embeddings_path;
  std::string embedder_path;
  std::string table_dir;
  WatermarkParams wm;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_wm = true) {
  cmd->add_option("--config", o.config_path,
                  "session config JSON (env PRIVMARK_CONFIG)");
  cmd->add_option("--mode", o.mode, "mpc | plaintext")
      ->check(CLI::IsMember({"mpc", "plaintext"}));
  cmd->add_option("--profile", o.profile,
                  "network profile: localhost | lan | wan | unshaped");
  cmd->add_option("--seed", o.seed, "deterministic session seed");
  cmd->add_flag("--verbose-count", o.verbose_count,
                "also reveal the matched-word count");
  cmd->add_option("--out", o.out_path, "write the JSON report here");
  cmd->add_option("--stats-out", o.stats_out,
                  "write the communication stats JSON here");
  cmd->add_option("--vocab", o.vocab_path, "vocabulary file (P1 input)");
  cmd->add_option("--embeddings", o.embeddings_path,
                  "document embedding pool (P2 input)");
  cmd->add_option("--embedder", o.embedder_path,
                  "embedder model file (P2 input; token column is public)");
  cmd->add_option("--table-dir", o.table_dir, "secret table directory");
  if (with_wm) {
    cmd->add_option("--ratio", o.wm.insertion_ratio, "insertion ratio r");
    cmd->add_option("--theta-sim", o.wm.theta_sim, "similarity threshold");
    cmd->add_option("--theta-det", o.wm.theta_det, "detection threshold");
  }
}

SessionConfig effective_config(const CommonOpts& o) {
  SessionConfig cfg;
  std::string path = o.config_path;
  if (path.empty())
    if (const char* env = std::getenv("PRIVMARK_CONFIG")) path = env;
  if (!path.empty()) cfg = load_session_config(path);
  if (o.seed != 0) cfg.seed = o.seed;
  if (!o.profile.empty()) cfg.profile = NetworkProfile::by_name(o.profile);
  if (!o.vocab_path.empty()) cfg.vocab_path = o.vocab_path;
  if (!o.embeddings_path.empty()) cfg.doc_embeddings_path = o.embeddings_path;
  if (!o.embedder_path.empty()) cfg.token_embeddings_path = o.embedder_path;
  if (!o.table_dir.empty()) cfg.table_dir = o.table_dir;
  return cfg;
}

SessionParams session_params(const SessionConfig& cfg,
                             bool record_transcript = false) {
  SessionParams p;
  p.ring = cfg.ring();
  p.seed = cfg.seed;
  p.session_id = cfg.effective_session_id();
  p.recv_timeout = std::chrono::milliseconds(cfg.io_timeout_ms);
  p.record_transcript = record_transcript;
  return p;
}

// --- TCP party plumbing ------------------------------------------------------------

HandshakeInfo handshake_of(const SessionConfig& cfg) {
  HandshakeInfo h;
  h.session_id = cfg.effective_session_id();
  h.ell = static_cast<std::uint8_t>(cfg.ell);
  h.frac_bits = static_cast<std::uint8_t>(cfg.frac_bits);
  h.seed = cfg.seed;
  return h;
}

struct TcpSession {
  std::unique_ptr<TcpMesh> mesh;
  std::unique_ptr<PartyContext> ctx;
};

TcpSession open_tcp_session(const SessionConfig& cfg,
                            std::chrono::milliseconds connect_timeout) {
  if (cfg.transport != "tcp")
    throw ConfigError("this command path needs a tcp transport config");
  if (cfg.listen.empty()) throw ConfigError("config lacks a listen address");
  TcpSession s;
  s.mesh = std::make_unique<TcpMesh>(cfg.party, cfg.listen, handshake_of(cfg),
                                     std::chrono::milliseconds(cfg.io_timeout_ms));
  s.mesh->connect_peers(cfg.peers, connect_timeout);
  s.ctx = std::make_unique<PartyContext>(cfg.party, session_params(cfg),
                                         s.mesh->channels());
  s.ctx->setup();
  return s;
}

void send_job(PartyContext& ctx, const json& job) {
  std::string text = job.dump();
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  PhaseScope scope(ctx, "Control");
  ctx.send_raw(PartyId::P2, bytes);
  ctx.send_raw(PartyId::P3, bytes);
}

// Node-side state built up across jobs.
struct NodeState {
  std::optional<SecTable> table;
  std::optional<EmbedderParams> embedder;
};

WatermarkParams wm_from_job(const json& job) {
  WatermarkParams wm;
  if (job.contains("params")) {
    const auto& p = job["params"];
    wm.insertion_ratio = p.value("insertion_ratio", wm.insertion_ratio);
    wm.theta_sim = p.value("theta_sim", wm.theta_sim);
    wm.theta_det = p.value("theta_det", wm.theta_det);
    wm.coef_bits = p.value("coef_bits", wm.coef_bits);
  }
  return wm;
}

void node_build_sectable(PartyContext& ctx, const SessionConfig& cfg,
                         NodeState& state) {
  Vocabulary vocab;
  EmbeddingSet docs;
  if (ctx.me() == PartyId::P1) vocab = load_vocabulary(cfg.vocab_path);
  if (ctx.me() == PartyId::P2) docs = load_embeddings(cfg.doc_embeddings_path);
  SecTable t = build_sectable(ctx, vocab, docs);
  if (!cfg.table_dir.empty())
    save_sectable(t, ctx.me(), ctx.session_id(), cfg.table_dir);
  state.table = std::move(t);
}

void node_deal_embedder(PartyContext& ctx, const SessionConfig& cfg,
                        NodeState& state) {
  TokenizerSpec spec = load_token_list(cfg.token_embeddings_path);
  EmbedderModel model;
  if (ctx.me() == PartyId::P2)
    model = load_embedder_model(cfg.token_embeddings_path);
  state.embedder = deal_embedder(ctx, spec, model);
}

int run_party_node(const SessionConfig& cfg) {
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  TcpSession s = open_tcp_session(
      cfg, std::chrono::milliseconds(cfg.connect_timeout_ms));
  PartyContext& ctx = *s.ctx;
  NodeState state;
  std::cerr << party_name(cfg.party) << " node ready on " << cfg.listen
            << "\n";
  while (!g_stop) {
    std::vector<std::uint8_t> raw;
    {
      PhaseScope scope(ctx, "Control");
      try {
        raw = ctx.recv_raw(PartyId::P1);
      } catch (const TimeoutError&) {
        continue;  // poll again; allows signal-driven shutdown
      }
    }
    json job = json::parse(std::string(raw.begin(), raw.end()),
                           nullptr, true, true);
    std::string op = job.value("op", "");
    if (op == "shutdown") return 0;
    if (op == "sectable") {
      node_build_sectable(ctx, cfg, state);
    } else if (op == "embedder") {
      node_deal_embedder(ctx, cfg, state);
    } else if (op == "insert") {
      if (!state.table) {
        SecTable t = load_sectable(ctx.ring(), ctx.me(), cfg.table_dir);
        state.table = std::move(t);
      }
      if (!state.embedder) node_deal_embedder(ctx, cfg, state);
      DefaultInserter ins;
      mark_insert(ctx, *state.table, *state.embedder, wm_from_job(job), ins,
                  "");
    } else if (op == "detect") {
      if (!state.embedder) node_deal_embedder(ctx, cfg, state);
      detect(ctx, *state.embedder, wm_from_job(job), "", {},
             job.value("verbose", false));
    } else {
      throw ConfigError("unknown job op: " + op);
    }
  }
  return 0;
}

// --- in-memory world loading ---------------------------------------------------------

struct MemoryInputs {
  Vocabulary vocab;
  EmbeddingSet docs;
  EmbedderModel model;
};

MemoryInputs load_memory_inputs(const SessionConfig& cfg, bool need_vocab,
                                bool need_docs, bool need_model) {
  MemoryInputs in;
  if (need_vocab) {
    if (cfg.vocab_path.empty()) throw ConfigError("--vocab is required");
    in.vocab = load_vocabulary(cfg.vocab_path);
  }
  if (need_docs) {
    if (cfg.doc_embeddings_path.empty())
      throw ConfigError("--embeddings is required");
    in.docs = load_embeddings(cfg.doc_embeddings_path);
  }
  if (need_model) {
    if (cfg.token_embeddings_path.empty())
      throw ConfigError("--embedder is required");
    in.model = load_embedder_model(cfg.token_embeddings_path);
  }
  return in;
}

// --- sectable ---------------------------------------------------------------------

int cmd_sectable(const CommonOpts& opts) {
  SessionConfig cfg = effective_config(opts);
  if (cfg.table_dir.empty()) throw ConfigError("--table-dir is required");

  int M = 0, d = 0;
  if (cfg.transport == "tcp") {
    if (cfg.party != PartyId::P1)
      throw ConfigError("run `privmark party` for P2/P3; P1 drives sectable");
    TcpSession s = open_tcp_session(
        cfg, std::chrono::milliseconds(cfg.connect_timeout_ms));
    send_job(*s.ctx, json{{"op", "sectable"}});
    NodeState state;
    node_build_sectable(*s.ctx, cfg, state);
    send_job(*s.ctx, json{{"op", "shutdown"}});
    M = state.table->M;
    d = state.table->d;
  } else {
    MemoryInputs in = load_memory_inputs(cfg, true, true, false);
    auto params = session_params(cfg);
    run_session(params, cfg.profile, [&](PartyContext& ctx) {
      Vocabulary v = (ctx.me() == PartyId::P1) ? in.vocab : Vocabulary{};
      EmbeddingSet e = (ctx.me() == PartyId::P2) ? in.docs : EmbeddingSet{};
      SecTable t = build_sectable(ctx, v, e);
      save_sectable(t, ctx.me(), ctx.session_id(), cfg.table_dir);
      if (ctx.me() == PartyId::P1) {
        M = t.M;
        d = t.d;
      }
    });
  }
  json out = {{"table_dir", cfg.table_dir}, {"M", M}, {"d", d}};
  std::cout << out.dump(2) << "\n";
  maybe_write(opts.out_path, out.dump(2));
  return 0;
}

// --- insert -----------------------------------------------------------------------

struct InsertCliOpts {
  CommonOpts common;
  std::string in_path;
  std::string text;
  std::string record_out = "watermark_record.json";
  std::string inserter = "default";
  std::string inserter_host = "127.0.0.1";
  int inserter_port = 8089;
  int inserter_timeout_ms = 30000;
};

std::unique_ptr<Inserter> make_inserter(const InsertCliOpts& o) {
  if (o.inserter == "default") return std::make_unique<DefaultInserter>();
  if (o.inserter == "http")
    return std::make_unique<HttpInserter>(o.inserter_host, o.inserter_port,
                                          o.inserter_timeout_ms);
  throw ConfigError("unknown inserter: " + o.inserter);
}

int cmd_insert(const InsertCliOpts& o) {
  SessionConfig cfg = effective_config(o.common);
  std::string text = o.text.empty() ? read_text_file(o.in_path) : o.text;
  std::unique_ptr<Inserter> inserter = make_inserter(o);

  MarkInResult result;
  json stats_json;
  std::string thash;

  if (o.common.mode == "plaintext") {
    MemoryInputs in = load_memory_inputs(cfg, true, true, true);
    PlainEngine plain(cfg.ring(), o.common.wm);
    plain.build_table(in.vocab, in.docs, cfg.seed);
    plain.set_embedder(in.model);
    result = plain.mark_insert(text, *inserter, cfg.effective_session_id());
  } else if (cfg.transport == "tcp") {
    if (cfg.party != PartyId::P1)
      throw ConfigError("run `privmark party` for P2/P3; P1 drives insert");
    TcpSession s = open_tcp_session(
        cfg, std::chrono::milliseconds(cfg.connect_timeout_ms));
    json job = {{"op", "insert"},
                {"params",
                 {{"insertion_ratio", o.common.wm.insertion_ratio},
                  {"theta_sim", o.common.wm.theta_sim},
                  {"theta_det", o.common.wm.theta_det},
                  {"coef_bits", o.common.wm.coef_bits}}}};
    send_job(*s.ctx, job);
    NodeState state;
    SecTable t = load_sectable(s.ctx->ring(), cfg.party, cfg.table_dir);
    state.table = std::move(t);
    node_deal_embedder(*s.ctx, cfg, state);
    result = mark_insert(*s.ctx, *state.table, *state.embedder, o.common.wm,
                         *inserter, text);
    send_job(*s.ctx, json{{"op", "shutdown"}});
    stats_json = stats_to_json_single(cfg.party, s.ctx->stats());
  } else {
    MemoryInputs in = load_memory_inputs(cfg, cfg.table_dir.empty(),
                                         cfg.table_dir.empty(), true);
    auto params = session_params(cfg, /*record_transcript=*/true);
    auto res = run_session_typed(
        params, cfg.profile, [&](PartyContext& ctx) {
          SecTable table;
          if (!cfg.table_dir.empty()) {
            table = load_sectable(ctx.ring(), ctx.me(), cfg.table_dir);
          } else {
            Vocabulary v = (ctx.me() == PartyId::P1) ? in.vocab : Vocabulary{};
            EmbeddingSet e =
                (ctx.me() == PartyId::P2) ? in.docs : EmbeddingSet{};
            table = build_sectable(ctx, v, e);
          }
          EmbedderModel m =
              (ctx.me() == PartyId::P2) ? in.model : EmbedderModel{};
          EmbedderParams emb = deal_embedder(ctx, in.model.tokenizer, m);
          std::string t = (ctx.me() == PartyId::P1) ? text : "";
          return mark_insert(ctx, table, emb, o.common.wm, *inserter, t);
        });
    result = std::move(res.outputs[0]);
    stats_json = stats_to_json(res.stats);
    thash = transcript_hash(res.transcripts);
  }

  std::string record_json = result.record.to_json();
  maybe_write(o.record_out, record_json);
  json out = {{"t_prime", result.t_prime},
              {"record_path", o.record_out},
              {"watermark_words", result.filtered_words},
              {"candidate_words", result.candidate_words}};
  if (!thash.empty()) out["transcript_sha256"] = thash;
  std::cout << out.dump(2) << "\n";
  maybe_write(o.common.out_path, out.dump(2));
  if (!o.common.stats_out.empty())
    maybe_write(o.common.stats_out, stats_json.dump(2));
  return 0;
}

// --- detect -----------------------------------------------------------------------

struct DetectCliOpts {
  CommonOpts common;
  std::string in_path;
  std::string text;
  std::string record_path;
  std::string words_csv;
};

int cmd_detect(const DetectCliOpts& o) {
  SessionConfig cfg = effective_config(o.common);
  std::string text = o.text.empty() ? read_text_file(o.in_path) : o.text;
  std::vector<std::string> words;
  WatermarkParams wm = o.common.wm;
  if (!o.record_path.empty()) {
    WatermarkRecord rec =
        WatermarkRecord::from_json(read_text_file(o.record_path));
    words = rec.watermark_words;
    wm = rec.params;
  } else {
    std::istringstream ss(o.words_csv);
    std::string w;
    while (std::getline(ss, w, ',')) {
      if (!w.empty()) words.push_back(w);
    }
  }
  if (words.empty())
    throw ConfigError("no watermark words: pass --record or --words");

  bool detected = false;
  std::optional<int> matched;
  json stats_json;
  if (o.common.mode == "plaintext") {
    MemoryInputs in = load_memory_inputs(cfg, false, false, true);
    PlainEngine plain(cfg.ring(), wm);
    plain.set_embedder(in.model);
    auto d = plain.detect(text, words);
    detected = d.detected;
    if (o.common.verbose_count) matched = d.matched_count;
  } else if (cfg.transport == "tcp") {
    if (cfg.party != PartyId::P1)
      throw ConfigError("run `privmark party` for P2/P3; P1 drives detect");
    TcpSession s = open_tcp_session(
        cfg, std::chrono::milliseconds(cfg.connect_timeout_ms));
    json job = {{"op", "detect"},
                {"verbose", o.common.verbose_count},
                {"params",
                 {{"insertion_ratio", wm.insertion_ratio},
                  {"theta_sim", wm.theta_sim},
                  {"theta_det", wm.theta_det},
                  {"coef_bits", wm.coef_bits}}}};
    send_job(*s.ctx, job);
    NodeState state;
    node_deal_embedder(*s.ctx, cfg, state);
    auto d = detect(*s.ctx, *state.embedder, wm, text, words,
                    o.common.verbose_count);
    send_job(*s.ctx, json{{"op", "shutdown"}});
    detected = d.detected;
    matched = d.matched_count;
    stats_json = stats_to_json_single(cfg.party, s.ctx->stats());
  } else {
    MemoryInputs in = load_memory_inputs(cfg, false, false, true);
    auto params = session_params(cfg, true);
    auto res = run_session_typed(
        params, cfg.profile, [&](PartyContext& ctx) {
          EmbedderModel m =
              (ctx.me() == PartyId::P2) ? in.model : EmbedderModel{};
          EmbedderParams emb = deal_embedder(ctx, in.model.tokenizer, m);
          std::string t = (ctx.me() == PartyId::P1) ? text : "";
          std::vector<std::string> wl =
              (ctx.me() == PartyId::P1) ? words : std::vector<std::string>{};
          return detect(ctx, emb, wm, t, wl, o.common.verbose_count);
        });
    detected = res.outputs[0].detected;
    matched = res.outputs[0].matched_count;
    stats_json = stats_to_json(res.stats);
  }

  json out = {{"detected", detected},
              {"watermark_word_count", words.size()}};
  if (o.common.verbose_count && matched.has_value())
    out["matched_count"] = *matched;
  std::cout << out.dump(2) << "\n";
  maybe_write(o.common.out_path, out.dump(2));
  if (!o.common.stats_out.empty())
    maybe_write(o.common.stats_out, stats_json.dump(2));
  return detected ? 0 : 1;
}

// --- bench ------------------------------------------------------------------------

struct BenchCliOpts {
  CommonOpts common;
  std::string profiles = "localhost,lan,wan";
  int reps = 1;
  int vocab_size = 96;
  int dim = 32;
  int pool = 128;
  int text_words = 40;
};

struct ToyWorldCli {
  Vocabulary vocab;
  EmbedderModel model;
  EmbeddingSet docs;
  std::string text;
};

ToyWorldCli make_bench_world(u64 seed, int vocab_size, int dim, int pool,
                             int text_words) {
  ToyWorldCli w;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<std::string> words;
  for (int i = 0; i < vocab_size; ++i)
    words.push_back("w" + std::to_string(i));
  w.vocab = vocabulary_from_words(words);
  RealMat rows(vocab_size, dim);
  for (int i = 0; i < vocab_size; ++i) {
    for (int j = 0; j < dim; ++j) rows(i, j) = g(rng);
    rows.row(i) /= rows.row(i).norm();
  }
  w.model = embedder_model_from(tokenizer_from_tokens(words), rows);
  RealMat drows(pool, dim);
  for (int i = 0; i < pool; ++i) {
    for (int j = 0; j < dim; ++j) drows(i, j) = g(rng);
    drows.row(i) /= drows.row(i).norm();
  }
  w.docs = embeddings_from_rows(drows);
  for (int i = 0; i < text_words; ++i) {
    if (i) w.text += " ";
    w.text += words[rng() % words.size()];
    if (i % 9 == 8) w.text += ".";
  }
  return w;
}

int cmd_bench(const BenchCliOpts& o) {
  SessionConfig cfg = effective_config(o.common);
  std::vector<std::string> profile_names;
  {
    std::istringstream ss(o.profiles);
    std::string p;
    while (std::getline(ss, p, ',')) profile_names.push_back(p);
  }
  ToyWorldCli w = make_bench_world(cfg.seed ? cfg.seed : 1, o.vocab_size,
                                   o.dim, o.pool, o.text_words);
  const std::vector<std::string> phases = {"Embed", "Cosine", "Topk",
                                           "Insert", "Detect"};
  json report;
  report["workload"] = {{"vocab_size", o.vocab_size},
                        {"dim", o.dim},
                        {"pool", o.pool},
                        {"text_words", o.text_words},
                        {"reps", o.reps}};
  std::map<std::string, std::map<std::string, double>> seconds;
  std::map<std::string, double> comm_mb;
  std::map<std::string, u64> rounds;

  for (const auto& pname : profile_names) {
    NetworkProfile profile = NetworkProfile::by_name(pname);
    std::map<std::string, double> acc;
    for (int rep = 0; rep < o.reps; ++rep) {
      SessionParams params = session_params(cfg);
      params.seed = cfg.seed + rep;
      auto res = run_session_typed(
          params, profile, [&](PartyContext& ctx) {
            Vocabulary v =
                (ctx.me() == PartyId::P1) ? w.vocab : Vocabulary{};
            EmbeddingSet e =
                (ctx.me() == PartyId::P2) ? w.docs : EmbeddingSet{};
            SecTable table = build_sectable(ctx, v, e);
            EmbedderModel m =
                (ctx.me() == PartyId::P2) ? w.model : EmbedderModel{};
            EmbedderParams emb = deal_embedder(ctx, w.model.tokenizer, m);
            DefaultInserter ins;
            std::string text = (ctx.me() == PartyId::P1) ? w.text : "";
            MarkInResult mi =
                mark_insert(ctx, table, emb, o.common.wm, ins, text);
            std::string t_prime =
                (ctx.me() == PartyId::P1) ? mi.t_prime : "";
            std::vector<std::string> wl =
                (ctx.me() == PartyId::P1) ? mi.record.watermark_words
                                          : std::vector<std::string>{};
            detect(ctx, emb, o.common.wm, t_prime, wl, false);
            return 0;
          });
      for (const auto& ph : phases) {
        acc[ph] += res.stats.max_seconds(ph);
        if (rep == 0 && pname == profile_names[0]) {
          comm_mb[ph] = res.stats.phase_total(ph).bytes / 1e6;
          rounds[ph] = res.stats.max_rounds(ph);
        }
      }
    }
    for (const auto& ph : phases) seconds[pname][ph] = acc[ph] / o.reps;
  }

  // aligned text table
  std::cout << std::left << std::setw(10) << "Operation";
  for (const auto& p : profile_names)
    std::cout << std::right << std::setw(14) << (p + " (s)");
  std::cout << std::right << std::setw(14) << "Comm. (MB)" << "\n";
  for (const auto& ph : phases) {
    std::cout << std::left << std::setw(10) << ph;
    for (const auto& p : profile_names)
      std::cout << std::right << std::setw(14) << std::fixed
                << std::setprecision(4) << seconds[p][ph];
    std::cout << std::right << std::setw(14) << std::setprecision(6)
              << comm_mb[ph] << "\n";
  }

  for (const auto& ph : phases) {
    json row;
    for (const auto& p : profile_names) row["seconds"][p] = seconds[p][ph];
    row["comm_mb"] = comm_mb[ph];
    row["rounds"] = rounds[ph];
    report["phases"][ph] = row;
  }
  maybe_write(o.common.out_path, report.dump(2));
  return 0;
}

// --- eval -------------------------------------------------------------------------

struct EvalCliOpts {
  CommonOpts common;
  std::string corpus_path;
  std::string data_mode = "corpus";  // corpus | self
  bool no_fp = false;
};

int cmd_eval(const EvalCliOpts& o) {
  SessionConfig cfg = effective_config(o.common);
  if (o.corpus_path.empty()) throw ConfigError("--corpus is required");
  CorpusLoadResult corpus = load_corpus(o.corpus_path);
  if (corpus.records.empty()) {
    EvalReport empty;
    empty.mode = o.common.mode;
    empty.data_mode = o.data_mode;
    empty.skipped = corpus.skipped;
    std::cout << empty.to_json() << "\n";
    std::cerr << "corpus has no usable records\n";
    return 2;
  }

  EvalReport report;
  if (o.data_mode == "self") {
    // insert-then-detect with this engine's own inserter and word lists
    MemoryInputs in = load_memory_inputs(cfg, true, true, true);
    std::vector<DetectTask> tasks;
    std::vector<bool> decisions;
    if (o.common.mode == "plaintext") {
      PlainEngine plain(cfg.ring(), o.common.wm);
      plain.build_table(in.vocab, in.docs, cfg.seed);
      plain.set_embedder(in.model);
      DefaultInserter ins;
      for (const auto& r : corpus.records) {
        auto mi = plain.mark_insert(r.candidate_text, ins,
                                    cfg.effective_session_id());
        auto d = plain.detect(mi.t_prime, mi.record.watermark_words);
        tasks.push_back({"original", r.id, mi.t_prime,
                         mi.record.watermark_words});
        decisions.push_back(d.detected);
      }
    } else {
      auto params = session_params(cfg);
      std::vector<std::pair<int, bool>> outcomes;
      auto res = run_session_typed(
          params, cfg.profile, [&](PartyContext& ctx) {
            std::vector<std::pair<int, bool>> mine;
            Vocabulary v =
                (ctx.me() == PartyId::P1) ? in.vocab : Vocabulary{};
            EmbeddingSet e =
                (ctx.me() == PartyId::P2) ? in.docs : EmbeddingSet{};
            SecTable table = build_sectable(ctx, v, e);
            EmbedderModel m =
                (ctx.me() == PartyId::P2) ? in.model : EmbedderModel{};
            EmbedderParams emb = deal_embedder(ctx, in.model.tokenizer, m);
            DefaultInserter ins;
            for (const auto& r : corpus.records) {
              std::string text =
                  (ctx.me() == PartyId::P1) ? r.candidate_text : "";
              MarkInResult mi =
                  mark_insert(ctx, table, emb, o.common.wm, ins, text);
              std::string tp = (ctx.me() == PartyId::P1) ? mi.t_prime : "";
              std::vector<std::string> wl =
                  (ctx.me() == PartyId::P1) ? mi.record.watermark_words
                                            : std::vector<std::string>{};
              auto d = detect(ctx, emb, o.common.wm, tp, wl, false);
              if (ctx.me() == PartyId::P1)
                mine.push_back({r.id, d.detected});
            }
            return mine;
          });
      outcomes = res.outputs[0];
      for (const auto& [rid, det] : outcomes) {
        tasks.push_back({"original", rid, "", {}});
        decisions.push_back(det);
      }
    }
    report = build_eval_report(tasks, decisions, o.common.mode, "self",
                               corpus.skipped, corpus.warnings);
  } else {
    std::vector<DetectTask> tasks = make_eval_tasks(corpus.records, !o.no_fp);
    std::vector<bool> decisions;
    if (o.common.mode == "plaintext") {
      MemoryInputs in = load_memory_inputs(cfg, false, false, true);
      PlainEngine plain(cfg.ring(), o.common.wm);
      plain.set_embedder(in.model);
      for (const auto& t : tasks)
        decisions.push_back(plain.detect(t.text, t.words).detected);
    } else {
      MemoryInputs in = load_memory_inputs(cfg, false, false, true);
      auto params = session_params(cfg);
      auto res = run_session_typed(
          params, cfg.profile, [&](PartyContext& ctx) {
            std::vector<bool> mine;
            EmbedderModel m =
                (ctx.me() == PartyId::P2) ? in.model : EmbedderModel{};
            EmbedderParams emb = deal_embedder(ctx, in.model.tokenizer, m);
            for (const auto& t : tasks) {
              std::string text = (ctx.me() == PartyId::P1) ? t.text : "";
              std::vector<std::string> wl =
                  (ctx.me() == PartyId::P1) ? t.words
                                            : std::vector<std::string>{};
              auto d = detect(ctx, emb, o.common.wm, text, wl, false);
              mine.push_back(d.detected);
            }
            return mine;
          });
      decisions = res.outputs[0];
    }
    report = build_eval_report(tasks, decisions, o.common.mode, "corpus",
                               corpus.skipped, corpus.warnings);
  }

  // summary table
  auto line = [](const char* name, const ScenarioRate& r) {
    std::cout << std::left << std::setw(26) << name << r.detected << "/"
              << r.total << "  (" << std::fixed << std::setprecision(1)
              << r.rate() << "%)\n";
  };
  std::cout << "Scenario                  detected/total\n";
  line("Original (True Positive)", report.original);
  line("Paraphrase Attack", report.paraphrase);
  line("Removal Attack", report.removal);
  line("Unrelated Text (FP)", report.false_positive);
  maybe_write(o.common.out_path, report.to_json());
  if (o.common.out_path.empty()) std::cout << report.to_json() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"three-party private watermarking engine"};
  app.require_subcommand(1);

  CommonOpts party_opts;
  auto* party_cmd = app.add_subcommand("party", "run a long-lived party node");
  add_common(party_cmd, party_opts, false);

  CommonOpts sectable_opts;
  auto* sectable_cmd =
      app.add_subcommand("sectable", "build and persist the secret table");
  add_common(sectable_cmd, sectable_opts, false);

  InsertCliOpts insert_opts;
  auto* insert_cmd = app.add_subcommand("insert", "watermark a text");
  add_common(insert_cmd, insert_opts.common);
  insert_cmd->add_option("--in", insert_opts.in_path, "input text file");
  insert_cmd->add_option("--text", insert_opts.text, "inline input text");
  insert_cmd->add_option("--record-out", insert_opts.record_out,
                         "watermark record output path");
  insert_cmd->add_option("--inserter", insert_opts.inserter,
                         "default | http");
  insert_cmd->add_option("--inserter-host", insert_opts.inserter_host, "");
  insert_cmd->add_option("--inserter-port", insert_opts.inserter_port, "");
  insert_cmd->add_option("--inserter-timeout-ms",
                         insert_opts.inserter_timeout_ms, "");

  DetectCliOpts detect_opts;
  auto* detect_cmd =
      app.add_subcommand("detect", "check a text for a watermark");
  add_common(detect_cmd, detect_opts.common);
  detect_cmd->add_option("--in", detect_opts.in_path, "input text file");
  detect_cmd->add_option("--text", detect_opts.text, "inline input text");
  detect_cmd->add_option("--record", detect_opts.record_path,
                         "watermark record JSON");
  detect_cmd->add_option("--words", detect_opts.words_csv,
                         "comma-separated watermark words");

  BenchCliOpts bench_opts;
  auto* bench_cmd =
      app.add_subcommand("bench", "benchmark phases across network profiles");
  add_common(bench_cmd, bench_opts.common);
  bench_cmd->add_option("--profiles", bench_opts.profiles,
                        "comma-separated profile list");
  bench_cmd->add_option("--reps", bench_opts.reps, "repetitions per profile");
  bench_cmd->add_option("--vocab-size", bench_opts.vocab_size, "");
  bench_cmd->add_option("--dim", bench_opts.dim, "");
  bench_cmd->add_option("--pool", bench_opts.pool, "");
  bench_cmd->add_option("--text-words", bench_opts.text_words, "");

  EvalCliOpts eval_opts;
  auto* eval_cmd =
      app.add_subcommand("eval", "evaluate detection over an attack corpus");
  add_common(eval_cmd, eval_opts.common);
  eval_cmd->add_option("--corpus", eval_opts.corpus_path, "corpus JSON");
  eval_cmd->add_option("--data-mode", eval_opts.data_mode, "corpus | self")
      ->check(CLI::IsMember({"corpus", "self"}));
  eval_cmd->add_flag("--no-fp", eval_opts.no_fp,
                     "skip the false-positive pairings");

  CLI11_PARSE(app, argc, argv);

  try {
    if (party_cmd->parsed()) {
      SessionConfig cfg = effective_config(party_opts);
      return run_party_node(cfg);
    }
    if (sectable_cmd->parsed()) return cmd_sectable(sectable_opts);
    if (insert_cmd->parsed()) return cmd_insert(insert_opts);
    if (detect_cmd->parsed()) return cmd_detect(detect_opts);
    if (bench_cmd->parsed()) return cmd_bench(bench_opts);
    if (eval_cmd->parsed()) return cmd_eval(eval_opts);
  } catch (const TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return 3;
  } catch (const TimeoutError& e) {
    std::cerr << "timeout: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

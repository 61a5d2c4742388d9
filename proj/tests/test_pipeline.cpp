#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <thread>

#include "privmark/plain_pipeline.hpp"
#include "privmark/sha256.hpp"
#include "test_util.hpp"

// httplib must come after the Eigen-including headers (resolv.h macro clash)
#include <httplib.h>
#include <json.hpp>

using namespace privmark;

namespace {

SessionParams mk_params(u64 seed) {
  SessionParams p;
  p.ring = Ring(64, 18);
  p.session_id = 0x9e11;
  p.seed = seed;
  return p;
}

// A toy world: vocabulary, embedder and document pool, all from one seed.
struct ToyWorld {
  Vocabulary vocab;
  EmbedderModel model;
  EmbeddingSet docs;
};

ToyWorld make_toy_world(u64 seed, int vocab_size, int d, int extra_tokens = 40,
                        int docs = 0) {
  ToyWorld w;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<std::string> words;
  for (int i = 0; i < vocab_size; ++i) words.push_back("w" + std::to_string(i));
  w.vocab = vocabulary_from_words(words);

  std::vector<std::string> tokens = words;
  for (int i = 0; i < extra_tokens; ++i) tokens.push_back("t" + std::to_string(i));
  RealMat rows(tokens.size(), d);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (int j = 0; j < d; ++j) rows(i, j) = g(rng);
    rows.row(i) /= rows.row(i).norm();
  }
  w.model = embedder_model_from(tokenizer_from_tokens(tokens), rows);

  int pool = docs > 0 ? docs : vocab_size + 10;
  RealMat drows(pool, d);
  for (int i = 0; i < pool; ++i) {
    for (int j = 0; j < d; ++j) drows(i, j) = g(rng);
    drows.row(i) /= drows.row(i).norm();
  }
  w.docs = embeddings_from_rows(drows);
  return w;
}

std::string random_text(std::mt19937_64& rng, const ToyWorld& w, int n_words) {
  std::string text;
  for (int i = 0; i < n_words; ++i) {
    int pick = static_cast<int>(rng() % (w.model.tokenizer.tokens.size()));
    if (i) text += " ";
    text += w.model.tokenizer.tokens[pick];
    if (i % 9 == 8) text += ".";
  }
  return text;
}

PlainEngine make_plain(const ToyWorld& w, const WatermarkParams& params,
                       const SessionParams& sp) {
  PlainEngine plain(sp.ring, params);
  plain.build_table(w.vocab, w.docs, sp.seed);
  plain.set_embedder(w.model);
  return plain;
}

}  // namespace

TEST_CASE("tokenize applies the public rule") {
  CHECK(tokenize("We are not!") ==
        std::vector<std::string>{"we", "are", "not"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("Good Samaritan,") ==
        std::vector<std::string>{"good", "samaritan"});
  CHECK(tokenize("state-of-the-art?") ==
        std::vector<std::string>{"state-of-the-art"});
}

TEST_CASE("derive_counts follows floor(r*n) with a minimum of one") {
  WatermarkParams p;
  CHECK(derive_counts(105, p, 600).k == 12);
  CHECK(derive_counts(105, p, 600).k_prime == 36);
  CHECK(derive_counts(5, p, 600).k == 1);
  CHECK(derive_counts(5, p, 600).k_prime == 3);
  CHECK(derive_counts(102, p, 600).k == 12);
  CHECK(derive_counts(10, p, 2).k_prime == 2);  // capped at M
  CHECK_THROWS_AS(derive_counts(0, p, 600), EmptyTextError);
}

TEST_CASE("rational approximation of the thresholds") {
  CHECK(rational_approx(0.45, 1000) == std::pair<long long, long long>{9, 20});
  CHECK(rational_approx(0.85, 1000) ==
        std::pair<long long, long long>{17, 20});
  auto [n3, d3] = rational_approx(1.0 / 3.0, 1000);
  CHECK(n3 == 1);
  CHECK(d3 == 3);
}

TEST_CASE("secure_embed_text: mean semantics at scale 2f") {
  SessionParams params = mk_params(101);
  const Ring& ring = params.ring;
  ToyWorld w = make_toy_world(500, 8, 16);
  auto embed_ids = [&](const std::vector<int>& ids) {
    auto res = run_session_typed(
        params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
          EmbedderModel m = (ctx.me() == PartyId::P2) ? w.model
                                                      : EmbedderModel{};
          EmbedderParams emb = deal_embedder(ctx, w.model.tokenizer, m);
          std::vector<int> mine =
              (ctx.me() == PartyId::P1) ? ids : std::vector<int>{};
          return secure_embed_text(ctx, emb, mine);
        });
    return reconstruct_vec(ring, {res.outputs[0], res.outputs[1],
                                  res.outputs[2]});
  };

  double tol = std::ldexp(1.0, -17);
  // single token: its own (unit) row
  RingVec one = embed_ids({3});
  for (int j = 0; j < 16; ++j)
    CHECK(std::fabs(ring.decode_at(one[j], 36) - w.model.rows(3, j)) <= tol);
  // duplicated token: same mean
  RingVec two = embed_ids({3, 3});
  for (int j = 0; j < 16; ++j)
    CHECK(std::fabs(ring.decode_at(two[j], 36) - ring.decode_at(one[j], 36)) <=
          tol);
  // 20 random tokens vs the float mean oracle
  std::mt19937_64 rng(7);
  std::vector<int> ids;
  RealVec want = RealVec::Zero(16);
  for (int i = 0; i < 20; ++i) {
    int id = static_cast<int>(rng() % w.model.rows.rows());
    ids.push_back(id);
    want += w.model.rows.row(id).transpose();
  }
  want /= 20.0;
  RingVec got = embed_ids(ids);
  for (int j = 0; j < 16; ++j)
    CHECK(std::fabs(ring.decode_at(got[j], 36) - want[j]) <= 1e-4);
}

TEST_CASE("secure_embed_words: unit rows, pairwise dots, empty list") {
  SessionParams params = mk_params(102);
  const Ring& ring = params.ring;
  ToyWorld w = make_toy_world(501, 8, 16);
  auto wordmat = [&](const std::vector<std::vector<int>>& ids, int count,
                     SessionStats* stats = nullptr) {
    auto res = run_session_typed(
        params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
          EmbedderModel m = (ctx.me() == PartyId::P2) ? w.model
                                                      : EmbedderModel{};
          EmbedderParams emb = deal_embedder(ctx, w.model.tokenizer, m);
          std::vector<std::vector<int>> mine =
              (ctx.me() == PartyId::P1) ? ids
                                        : std::vector<std::vector<int>>{};
          PhaseScope scope(ctx, "Words");
          return secure_embed_words(ctx, emb, mine, count);
        });
    if (stats) *stats = res.stats;
    return reconstruct_mat(ring, {res.outputs[0], res.outputs[1],
                                  res.outputs[2]});
  };

  // single-token word: exactly the row; self-dot within 2^-17 of 1
  RingMat m1 = wordmat({{2}}, 1);
  double self = 0;
  for (int j = 0; j < 16; ++j) {
    double v = ring.decode(m1(0, j));
    self += v * v;
  }
  CHECK(std::fabs(self - 1.0) <= std::ldexp(1.0, -17));

  // two distinct single-token words: dot close to the float cosine
  RingMat m2 = wordmat({{2}, {5}}, 2);
  double dot = 0, want = 0;
  for (int j = 0; j < 16; ++j) {
    dot += ring.decode(m2(0, j)) * ring.decode(m2(1, j));
    want += w.model.rows(2, j) * w.model.rows(5, j);
  }
  CHECK(std::fabs(dot - want) <= 1e-4);

  // multi-token word: mean of its rows (within truncation tolerance)
  RingMat m3 = wordmat({{1, 4}}, 1);
  for (int j = 0; j < 16; ++j) {
    double wmean = 0.5 * (w.model.rows(1, j) + w.model.rows(4, j));
    CHECK(std::fabs(ring.decode(m3(0, j)) - wmean) <= 2e-4);
  }

  // empty list: 0 x d result and no payload in the phase
  SessionStats stats;
  RingMat m0 = wordmat({}, 0, &stats);
  CHECK(m0.rows() == 0);
  CHECK(stats.phase_total("Words").bytes == 0);
}

namespace {

struct E2EOutcome {
  MarkInResult mpc;
  PlainEngine::Selection plain_sel;
  bool mpc_detected = false;
  int mpc_matched = -1;
  PlainEngine::Detection plain_det;
  SessionStats stats;
  std::array<std::vector<SentFrame>, 3> transcripts;
};

E2EOutcome run_e2e(const ToyWorld& w, const SessionParams& params,
                   const WatermarkParams& wp, const std::string& text,
                   bool record_transcript = false) {
  E2EOutcome out;
  SessionParams sp = params;
  sp.record_transcript = record_transcript;
  auto res = run_session_typed(
      sp, NetworkProfile::unshaped(),
      [&](PartyContext& ctx) -> std::pair<MarkInResult, DetectionResult> {
        Vocabulary v = (ctx.me() == PartyId::P1) ? w.vocab : Vocabulary{};
        EmbeddingSet e = (ctx.me() == PartyId::P2) ? w.docs : EmbeddingSet{};
        SecTable table = build_sectable(ctx, v, e);
        EmbedderModel m =
            (ctx.me() == PartyId::P2) ? w.model : EmbedderModel{};
        EmbedderParams emb = deal_embedder(ctx, w.model.tokenizer, m);
        DefaultInserter ins;
        MarkInResult mi = mark_insert(ctx, table, emb, wp, ins, text);
        // P1 shares t' and the words with nobody; detection re-runs on its
        // own inputs. Other parties pass empty placeholders.
        std::string t_prime = (ctx.me() == PartyId::P1) ? mi.t_prime : "";
        std::vector<std::string> words =
            (ctx.me() == PartyId::P1) ? mi.record.watermark_words
                                      : std::vector<std::string>{};
        DetectionResult dr = detect(ctx, emb, wp, t_prime, words, true);
        return {mi, dr};
      });
  out.mpc = res.outputs[0].first;
  out.mpc_detected = res.outputs[0].second.detected;
  out.mpc_matched = res.outputs[0].second.matched_count.value_or(-1);
  out.stats = res.stats;
  out.transcripts = res.transcripts;

  PlainEngine plain = make_plain(w, wp, params);
  out.plain_sel = plain.select_watermark_words(text);
  DefaultInserter ins;
  auto plain_mi = plain.mark_insert(text, ins, params.session_id);
  out.plain_det =
      plain.detect(plain_mi.t_prime, plain_mi.record.watermark_words);
  return out;
}

}  // namespace

TEST_CASE("insertion pipeline shape and the default inserter postcondition") {
  SessionParams params = mk_params(103);
  ToyWorld w = make_toy_world(502, 40, 16);
  WatermarkParams wp;
  std::mt19937_64 rng(3);
  std::string text = random_text(rng, w, 50);  // k=6, k'=18

  E2EOutcome out = run_e2e(w, params, wp, text);
  CHECK(out.mpc.candidate_words.size() == 18);
  CHECK(out.mpc.filtered_words.size() == 6);
  for (const auto& fw : out.mpc.filtered_words)
    CHECK(std::find(out.mpc.candidate_words.begin(),
                    out.mpc.candidate_words.end(),
                    fw) != out.mpc.candidate_words.end());
  // default inserter postcondition: every filtered word present in t'
  auto toks = tokenize(out.mpc.t_prime);
  for (const auto& fw : out.mpc.filtered_words)
    CHECK(std::find(toks.begin(), toks.end(), fw) != toks.end());
  // record is bound to t'
  CHECK(out.mpc.record.watermark_words == out.mpc.filtered_words);
  CHECK(out.mpc.record.text_sha256 == Sha256::hex_of(out.mpc.t_prime));
  // phases all show up in the stats
  for (const char* phase : {"Embed", "Cosine", "Topk", "Insert", "Detect"})
    CHECK(out.stats.phase_total(phase).bytes > 0);
}

TEST_CASE("MPC selection equals the plaintext engine exactly") {
  WatermarkParams wp;
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    SessionParams params = mk_params(2000 + trial);
    ToyWorld w = make_toy_world(600 + trial, 40, 16);
    std::string text = random_text(rng, w, 40 + trial * 7);
    E2EOutcome out = run_e2e(w, params, wp, text);
    REQUIRE(out.mpc.candidate_indices == out.plain_sel.candidate_indices);
    REQUIRE(out.mpc.filtered_positions == out.plain_sel.filtered_positions);
    REQUIRE(out.mpc_detected == out.plain_det.detected);
    REQUIRE(out.mpc_matched == out.plain_det.matched_count);
    CHECK(out.mpc_detected);  // self-detection with the default inserter
  }
}

TEST_CASE("structural example: six candidates filter to two") {
  SessionParams params = mk_params(104);
  ToyWorld w = make_toy_world(503, 30, 16);
  WatermarkParams wp;
  std::mt19937_64 rng(5);
  std::string text = random_text(rng, w, 16);  // k=1... need k=2: n=17..24 -> k=2
  text = random_text(rng, w, 20);              // k=2, k'=6
  E2EOutcome out = run_e2e(w, params, wp, text);
  CHECK(out.mpc.candidate_words.size() == 6);
  CHECK(out.mpc.filtered_words.size() == 2);
}

TEST_CASE("detection: verbatim watermark words give c = |L| and detected") {
  SessionParams params = mk_params(105);
  ToyWorld w = make_toy_world(504, 30, 16);
  WatermarkParams wp;
  std::vector<std::string> words = {"w1", "w4", "w7"};
  std::string text = "w1 and w4 then w7.";
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        EmbedderModel m = (ctx.me() == PartyId::P2) ? w.model
                                                    : EmbedderModel{};
        EmbedderParams emb = deal_embedder(ctx, w.model.tokenizer, m);
        std::string t = (ctx.me() == PartyId::P1) ? text : "";
        std::vector<std::string> wl =
            (ctx.me() == PartyId::P1) ? words : std::vector<std::string>{};
        return detect(ctx, emb, wp, t, wl, true);
      });
  CHECK(res.outputs[0].detected);
  CHECK(res.outputs[0].matched_count.value() == 3);
  CHECK(res.outputs[0].watermark_word_count == 3);
}

TEST_CASE("detection threshold arithmetic at 45 percent") {
  // Build an orthogonal toy embedder so sim(wi, wj) = delta_ij: with 12
  // watermark words, a text holding c of them verbatim yields exactly c.
  SessionParams params = mk_params(106);
  std::vector<std::string> tokens;
  for (int i = 0; i < 16; ++i) tokens.push_back("w" + std::to_string(i));
  RealMat rows = RealMat::Identity(16, 16);
  EmbedderModel model =
      embedder_model_from(tokenizer_from_tokens(tokens), rows);
  WatermarkParams wp;

  auto run_with_hits = [&](int c) {
    std::vector<std::string> wm;
    for (int i = 0; i < 12; ++i) wm.push_back("w" + std::to_string(i));
    std::string text;
    for (int i = 0; i < c; ++i) text += "w" + std::to_string(i) + " ";
    for (int i = 0; i < 3; ++i) text += "w" + std::to_string(13 + i) + " ";
    auto res = run_session_typed(
        params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
          EmbedderModel m =
              (ctx.me() == PartyId::P2) ? model : EmbedderModel{};
          EmbedderParams emb = deal_embedder(ctx, model.tokenizer, m);
          std::string t = (ctx.me() == PartyId::P1) ? text : "";
          std::vector<std::string> wl =
              (ctx.me() == PartyId::P1) ? wm : std::vector<std::string>{};
          return detect(ctx, emb, wp, t, wl, true);
        });
    CHECK(res.outputs[0].matched_count.value() == c);
    return res.outputs[0].detected;
  };
  CHECK_FALSE(run_with_hits(5));  // 5/12 < 0.45
  CHECK(run_with_hits(6));        // 6/12 = 0.5 > 0.45
  CHECK_FALSE(run_with_hits(0));  // disjoint vocabulary
}

TEST_CASE("existential capping and monotonicity") {
  SessionParams params = mk_params(107);
  ToyWorld w = make_toy_world(505, 30, 16);
  WatermarkParams wp;
  std::vector<std::string> words = {"w2", "w5"};
  auto run_detect = [&](const std::string& text) {
    auto res = run_session_typed(
        params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
          EmbedderModel m = (ctx.me() == PartyId::P2) ? w.model
                                                      : EmbedderModel{};
          EmbedderParams emb = deal_embedder(ctx, w.model.tokenizer, m);
          std::string t = (ctx.me() == PartyId::P1) ? text : "";
          std::vector<std::string> wl =
              (ctx.me() == PartyId::P1) ? words : std::vector<std::string>{};
          return detect(ctx, emb, wp, t, wl, true);
        });
    return res.outputs[0].matched_count.value();
  };
  int base = run_detect("w2 w9 w11");
  CHECK(base == 1);
  // duplicating a matching word never increases c
  CHECK(run_detect("w2 w2 w2 w9 w11") == base);
  // removing words never increases c
  CHECK(run_detect("w9 w11") <= base);
  CHECK(run_detect("w2 w5 w9") >= base);
}

TEST_CASE("empty inputs raise EmptyTextError at every party") {
  SessionParams params = mk_params(108);
  ToyWorld w = make_toy_world(506, 30, 16);
  WatermarkParams wp;
  CHECK_THROWS_AS(
      run_session(params, NetworkProfile::unshaped(),
                  [&](PartyContext& ctx) {
                    Vocabulary v =
                        (ctx.me() == PartyId::P1) ? w.vocab : Vocabulary{};
                    EmbeddingSet e =
                        (ctx.me() == PartyId::P2) ? w.docs : EmbeddingSet{};
                    SecTable table = build_sectable(ctx, v, e);
                    EmbedderModel m =
                        (ctx.me() == PartyId::P2) ? w.model : EmbedderModel{};
                    EmbedderParams emb =
                        deal_embedder(ctx, w.model.tokenizer, m);
                    DefaultInserter ins;
                    mark_insert(ctx, table, emb, wp, ins, "!!! ...");
                  }),
      EmptyTextError);
}

TEST_CASE("tiny vocabulary cannot host k' candidates") {
  SessionParams params = mk_params(109);
  ToyWorld w = make_toy_world(507, 4, 16);  // M = 4 < 3k for n >= 17
  WatermarkParams wp;
  std::mt19937_64 rng(5);
  std::string text = random_text(rng, w, 30);
  CHECK_THROWS_AS(
      run_session(params, NetworkProfile::unshaped(),
                  [&](PartyContext& ctx) {
                    Vocabulary v =
                        (ctx.me() == PartyId::P1) ? w.vocab : Vocabulary{};
                    EmbeddingSet e =
                        (ctx.me() == PartyId::P2) ? w.docs : EmbeddingSet{};
                    SecTable table = build_sectable(ctx, v, e);
                    EmbedderModel m =
                        (ctx.me() == PartyId::P2) ? w.model : EmbedderModel{};
                    EmbedderParams emb =
                        deal_embedder(ctx, w.model.tokenizer, m);
                    DefaultInserter ins;
                    mark_insert(ctx, table, emb, wp, ins, text);
                  }),
      SizeError);
}

TEST_CASE("watermark record JSON round-trips") {
  WatermarkRecord r;
  r.id = "abc123";
  r.watermark_words = {"ember", "lagoon"};
  r.params.theta_det = 0.4;
  r.text_sha256 = "00ff";
  WatermarkRecord back = WatermarkRecord::from_json(r.to_json());
  CHECK(back.id == r.id);
  CHECK(back.watermark_words == r.watermark_words);
  CHECK(back.params.theta_det == doctest::Approx(0.4));
  CHECK(back.text_sha256 == "00ff");
  CHECK_THROWS_AS(WatermarkRecord::from_json("{\"id\": 1}"), FormatError);
}

TEST_CASE("default inserter parses prompts and splices words") {
  auto words = DefaultInserter::words_from_prompt(
      "Insert words: [lyrical, lawyer] into the text: We are not!");
  CHECK(words == std::vector<std::string>{"lyrical", "lawyer"});

  DefaultInserter ins;
  std::string text =
      "First sentence here. Second one follows! A third asks? Fourth ends.";
  std::string prompt = make_insertion_prompt({"ember", "lagoon"}, text);
  std::string out = ins.rewrite(prompt, text);
  auto toks = tokenize(out);
  CHECK(std::find(toks.begin(), toks.end(), "ember") != toks.end());
  CHECK(std::find(toks.begin(), toks.end(), "lagoon") != toks.end());
}

TEST_CASE("http inserter talks to a local rewrite endpoint") {
  httplib::Server server;
  server.Post("/rewrite", [](const httplib::Request& req,
                             httplib::Response& res) {
    auto body = nlohmann::json::parse(req.body);
    nlohmann::json out = {
        {"text", body["text"].get<std::string>() + " rewritten"}};
    res.set_content(out.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpInserter ins("127.0.0.1", port, 2000);
  CHECK(ins.rewrite("p", "hello") == "hello rewritten");

  server.stop();
  th.join();

  HttpInserter dead("127.0.0.1", port, 300);
  CHECK_THROWS_AS(dead.rewrite("p", "hello"), InserterError);
}

TEST_CASE("share marginals on the wire stay uniform through the pipeline") {
  SessionParams params = mk_params(110);
  ToyWorld w = make_toy_world(508, 40, 16);
  WatermarkParams wp;
  std::mt19937_64 rng(23);
  std::string text = random_text(rng, w, 40);
  E2EOutcome out = run_e2e(w, params, wp, text, /*record_transcript=*/true);
  std::vector<u64> samples;
  Ring ring = params.ring;
  for (const auto& t : out.transcripts)
    for (const auto& f : t) {
      // only share-bearing payloads; setup keys and public shape/count
      // metadata are not share components
      if (f.phase == "Setup" || f.public_payload) continue;
      RingVec elems = bytes_to_elems(ring, f.payload);
      for (Eigen::Index i = 0; i < elems.size(); ++i)
        samples.push_back(elems[i]);
    }
  REQUIRE(samples.size() > 20000);
  CHECK(testutil::uniformity_p_value(samples, 64) > 0.01);
}

#include "privmark/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "privmark/sha256.hpp"

namespace privmark {

using nlohmann::json;

// --- embedder model -----------------------------------------------------------

EmbedderModel embedder_model_from(TokenizerSpec spec, RealMat rows) {
  if (static_cast<Eigen::Index>(spec.tokens.size()) != rows.rows())
    throw FormatError("token list and row count disagree");
  EmbedderModel m;
  m.tokenizer = std::move(spec);
  m.rows = embeddings_from_rows(std::move(rows)).rows;
  return m;
}

EmbedderModel load_embedder_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open embedder file " + path);
  Eigen::Index t = 0, d = 0;
  if (!(in >> t >> d) || t <= 0 || d <= 0)
    throw FormatError("embedder file header must be 'T d': " + path);
  std::vector<std::string> tokens(t);
  RealMat rows(t, d);
  for (Eigen::Index i = 0; i < t; ++i) {
    if (!(in >> tokens[i]))
      throw FormatError("embedder file truncated at token " +
                        std::to_string(i));
    for (Eigen::Index j = 0; j < d; ++j)
      if (!(in >> rows(i, j)))
        throw FormatError("embedder file truncated at row " +
                          std::to_string(i));
  }
  TokenizerSpec spec = tokenizer_from_tokens(std::move(tokens));
  if (static_cast<Eigen::Index>(spec.token2id.size()) != t)
    throw FormatError("duplicate tokens in embedder file " + path);
  return embedder_model_from(std::move(spec), std::move(rows));
}

TokenizerSpec load_token_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open token file " + path);
  std::string first_line;
  if (!std::getline(in, first_line))
    throw FormatError("empty token file " + path);
  std::istringstream header(first_line);
  Eigen::Index t = 0, d = 0;
  std::vector<std::string> tokens;
  if (header >> t >> d && t > 0 && d > 0) {
    // embedder format: token column of each row
    tokens.reserve(t);
    for (Eigen::Index i = 0; i < t; ++i) {
      std::string tok;
      if (!(in >> tok))
        throw FormatError("token file truncated at " + std::to_string(i));
      tokens.push_back(tok);
      double v;
      for (Eigen::Index j = 0; j < d; ++j)
        if (!(in >> v))
          throw FormatError("token file truncated at row " +
                            std::to_string(i));
    }
  } else {
    // bare list, one token per line
    std::istringstream fl(first_line);
    std::string tok;
    while (fl >> tok) tokens.push_back(tok);
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      while (ls >> tok) tokens.push_back(tok);
    }
  }
  if (tokens.empty()) throw FormatError("no tokens in " + path);
  return tokenizer_from_tokens(std::move(tokens));
}

EmbedderParams deal_embedder(PartyContext& ctx, const TokenizerSpec& spec,
                             const EmbedderModel& model_at_p2) {
  const Ring& ring = ctx.ring();
  PhaseScope scope(ctx, "Embed");
  EmbedderParams out;
  out.tokenizer = spec;
  out.T = spec.size();

  RingVec dims(1);
  if (ctx.me() == PartyId::P2) {
    dims[0] = static_cast<u64>(model_at_p2.rows.cols());
    ctx.send_elems(PartyId::P1, dims, /*public_metadata=*/true);
    ctx.send_elems(PartyId::P3, dims, /*public_metadata=*/true);
  } else {
    dims = ctx.recv_elems(PartyId::P2);
  }
  out.d = static_cast<int>(dims[0]);

  RingMat plain;
  if (ctx.me() == PartyId::P2) {
    if (model_at_p2.tokenizer.tokens != spec.tokens)
      throw ConfigError("embedder token list differs from the shared spec");
    plain.resize(out.T, out.d);
    for (int i = 0; i < out.T; ++i)
      for (int j = 0; j < out.d; ++j)
        plain(i, j) = ring.encode(model_at_p2.rows(i, j));
  }
  out.token_rows =
      deal_matrix(ctx, PartyId::P2, out.T, out.d, plain, ring.frac_bits());
  return out;
}

// --- params ---------------------------------------------------------------------

void WatermarkParams::validate() const {
  if (!(insertion_ratio > 0.0 && insertion_ratio < 1.0))
    throw RangeError("insertion ratio must lie in (0,1)");
  if (!(theta_sim > 0.0 && theta_sim < 1.0))
    throw RangeError("similarity threshold must lie in (0,1)");
  if (!(theta_det > 0.0 && theta_det < 1.0))
    throw RangeError("detection threshold must lie in (0,1)");
  if (coef_bits < 4 || coef_bits > 20)
    throw RangeError("coefficient precision out of range");
}

Counts derive_counts(int n_words, const WatermarkParams& params, int M) {
  if (n_words < 1) throw EmptyTextError("text has no words");
  Counts c;
  c.k = std::max(1, static_cast<int>(std::floor(params.insertion_ratio *
                                                static_cast<double>(n_words))));
  c.k_prime = std::min(3 * c.k, M);
  return c;
}

std::pair<long long, long long> rational_approx(double t, long long max_den) {
  long long best_num = 0, best_den = 1;
  double best_err = std::fabs(t);
  for (long long den = 1; den <= max_den; ++den) {
    long long num = static_cast<long long>(std::llround(t * static_cast<double>(den)));
    double err = std::fabs(t - static_cast<double>(num) / static_cast<double>(den));
    if (err + 1e-18 < best_err) {
      best_err = err;
      best_num = num;
      best_den = den;
      if (err == 0.0) break;
    }
  }
  return {best_num, best_den};
}

// --- embedding protocols ----------------------------------------------------------

namespace {

SecretMatrix transpose(const SecretMatrix& m) {
  SecretMatrix out;
  out.owner = m.owner;
  out.frac_bits = m.frac_bits;
  out.first = m.first.transpose();
  out.second = m.second.transpose();
  return out;
}

SecretMatrix as_column(const SecretVector& v) {
  SecretMatrix out;
  out.owner = v.owner;
  out.frac_bits = v.frac_bits;
  out.first = v.first.matrix();
  out.second = v.second.matrix();
  return out;
}

RingVec count_vector(const Ring& ring, const std::vector<int>& ids, int T,
                     u64 scale_per_token) {
  RingVec counts = RingVec::Zero(T);
  for (int id : ids) {
    if (id == TokenizerSpec::kUnknownId) continue;  // embeds to zero
    if (id < 0 || id >= T) throw RangeError("token id out of range");
    counts[id] = ring.add(counts[id], scale_per_token);
  }
  return counts;
}

void broadcast_from_p1(PartyContext& ctx, RingVec& values) {
  if (ctx.me() == PartyId::P1) {
    ctx.send_elems(PartyId::P2, values, /*public_metadata=*/true);
    ctx.send_elems(PartyId::P3, values, /*public_metadata=*/true);
  } else {
    values = ctx.recv_elems(PartyId::P1);
  }
}

}  // namespace

SecretVector secure_embed_text_counts(PartyContext& ctx,
                                      const EmbedderParams& emb,
                                      const std::vector<int>& text_ids_at_p1) {
  const Ring& ring = ctx.ring();
  RingVec counts;
  if (ctx.me() == PartyId::P1) {
    if (text_ids_at_p1.empty()) throw EmptyTextError("empty text");
    counts = count_vector(ring, text_ids_at_p1, emb.T, 1);
  }
  SecretVector shared = deal_vector(ctx, PartyId::P1, emb.T, counts, 0);
  return secure_matvec(ctx, transpose(emb.token_rows), shared);
}

SecretVector secure_embed_text(PartyContext& ctx, const EmbedderParams& emb,
                               const std::vector<int>& text_ids_at_p1) {
  const Ring& ring = ctx.ring();
  RingVec counts;
  if (ctx.me() == PartyId::P1) {
    if (text_ids_at_p1.empty()) throw EmptyTextError("empty text");
    u64 per_token = static_cast<u64>(std::llround(
        std::ldexp(1.0, ring.frac_bits()) /
        static_cast<double>(text_ids_at_p1.size())));
    counts = count_vector(ring, text_ids_at_p1, emb.T, per_token);
  }
  SecretVector shared =
      deal_vector(ctx, PartyId::P1, emb.T, counts, ring.frac_bits());
  return secure_matvec(ctx, transpose(emb.token_rows), shared);
}

WordSumEmbeddings secure_embed_word_sums(
    PartyContext& ctx, const EmbedderParams& emb,
    const std::vector<std::vector<int>>& word_ids_at_p1, int word_count) {
  const Ring& ring = ctx.ring();
  WordSumEmbeddings out;

  RingVec counts_m(word_count);
  RingMat count_rows;
  if (ctx.me() == PartyId::P1) {
    if (static_cast<int>(word_ids_at_p1.size()) != word_count)
      throw ShapeError("word list size disagrees with the public count");
    count_rows = RingMat::Zero(word_count, emb.T);
    for (int w = 0; w < word_count; ++w) {
      const auto& ids = word_ids_at_p1[w];
      if (ids.empty())
        throw EmptyTextError("word " + std::to_string(w) +
                             " tokenizes to nothing");
      if (ids.size() > 256) throw RangeError("word has too many tokens");
      counts_m[w] = static_cast<u64>(ids.size());
      RingVec row = count_vector(ring, ids, emb.T, 1);
      for (int j = 0; j < emb.T; ++j) count_rows(w, j) = row[j];
    }
  }
  // Per-word token counts are public protocol metadata (like list sizes).
  broadcast_from_p1(ctx, counts_m);
  out.token_counts.resize(word_count);
  for (int w = 0; w < word_count; ++w)
    out.token_counts[w] = static_cast<int>(counts_m[w]);

  SecretMatrix counts_shared =
      deal_matrix(ctx, PartyId::P1, word_count, emb.T, count_rows, 0);
  out.sums = secure_matmul(ctx, counts_shared, emb.token_rows);
  return out;
}

SecretMatrix secure_embed_words(PartyContext& ctx, const EmbedderParams& emb,
                                const std::vector<std::vector<int>>& word_ids_at_p1,
                                int word_count) {
  const Ring& ring = ctx.ring();
  int f = ring.frac_bits();
  WordSumEmbeddings ws =
      secure_embed_word_sums(ctx, emb, word_ids_at_p1, word_count);

  // Single-token rows already are the (unit) token row at scale f. Rows of
  // multi-token words carry the public coefficient round(2^f/m) and one
  // probabilistic truncation back to scale f.
  std::vector<int> multi;
  for (int w = 0; w < word_count; ++w)
    if (ws.token_counts[w] > 1) multi.push_back(w);

  SecretMatrix out = ws.sums;
  if (!multi.empty()) {
    Eigen::Index d = ws.sums.cols();
    SecretVector flat;
    flat.owner = ctx.me();
    flat.frac_bits = 2 * f;
    flat.first.resize(static_cast<Eigen::Index>(multi.size()) * d);
    flat.second.resize(static_cast<Eigen::Index>(multi.size()) * d);
    for (size_t i = 0; i < multi.size(); ++i) {
      u64 coef = static_cast<u64>(
          std::llround(std::ldexp(1.0, f) / ws.token_counts[multi[i]]));
      for (Eigen::Index j = 0; j < d; ++j) {
        flat.first[i * d + j] =
            ring.mul(ws.sums.first(multi[i], j), coef);
        flat.second[i * d + j] =
            ring.mul(ws.sums.second(multi[i], j), coef);
      }
    }
    SecretVector truncated = truncate(ctx, flat, f);
    for (size_t i = 0; i < multi.size(); ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        out.first(multi[i], j) = truncated.first[i * d + j];
        out.second(multi[i], j) = truncated.second[i * d + j];
      }
  }
  out.frac_bits = f;
  return out;
}

// --- record ---------------------------------------------------------------------

std::string WatermarkRecord::to_json() const {
  json j;
  j["id"] = id;
  j["watermark_words"] = watermark_words;
  j["params"] = {{"insertion_ratio", params.insertion_ratio},
                 {"theta_sim", params.theta_sim},
                 {"theta_det", params.theta_det},
                 {"coef_bits", params.coef_bits},
                 {"ell", ell},
                 {"frac_bits", frac_bits}};
  j["text_sha256"] = text_sha256;
  return j.dump(2);
}

WatermarkRecord WatermarkRecord::from_json(const std::string& text) {
  WatermarkRecord r;
  try {
    json j = json::parse(text);
    r.id = j.at("id").get<std::string>();
    r.watermark_words =
        j.at("watermark_words").get<std::vector<std::string>>();
    auto& p = j.at("params");
    r.params.insertion_ratio = p.value("insertion_ratio", 0.12);
    r.params.theta_sim = p.value("theta_sim", 0.85);
    r.params.theta_det = p.value("theta_det", 0.45);
    r.params.coef_bits = p.value("coef_bits", 12);
    r.ell = p.value("ell", 64);
    r.frac_bits = p.value("frac_bits", 18);
    r.text_sha256 = j.value("text_sha256", "");
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad watermark record: ") + e.what());
  }
  return r;
}

// --- insertion ------------------------------------------------------------------

namespace {

// Applies a public per-element factor to a shared vector.
SecretVector apply_public_factors(const Ring& ring, const SecretVector& x,
                                  const RingVec& factors, int out_frac) {
  SecretVector out;
  out.owner = x.owner;
  out.frac_bits = out_frac;
  out.first.resize(x.size());
  out.second.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out.first[i] = ring.mul(x.first[i], factors[i]);
    out.second[i] = ring.mul(x.second[i], factors[i]);
  }
  return out;
}

u64 mean_coefficient(int coef_bits, int tokens) {
  return static_cast<u64>(
      std::llround(std::ldexp(1.0, coef_bits) / static_cast<double>(tokens)));
}

}  // namespace

MarkInResult mark_insert(PartyContext& ctx, const SecTable& table,
                         const EmbedderParams& emb,
                         const WatermarkParams& params, Inserter& inserter,
                         const std::string& text_at_p1) {
  const Ring& ring = ctx.ring();
  params.validate();
  PartyId me = ctx.me();
  MarkInResult result;

  // Word count is public (it fixes k and k'); announce it first so every
  // party fails identically on degenerate inputs.
  std::vector<std::string> tokens;
  RingVec n_vec(1);
  {
    PhaseScope scope(ctx, "Embed");
    if (me == PartyId::P1) {
      tokens = tokenize(text_at_p1);
      n_vec[0] = static_cast<u64>(tokens.size());
    }
    broadcast_from_p1(ctx, n_vec);
  }
  int n = static_cast<int>(n_vec[0]);
  if (n == 0) throw EmptyTextError("text has no words after tokenization");
  Counts counts = derive_counts(n, params, table.M);
  if (3 * counts.k > table.M)
    throw SizeError("vocabulary too small for k' = 3k candidate words");

  // Embed: integer-count text embedding (scale f), exact.
  SecretVector e_t;
  {
    PhaseScope scope(ctx, "Embed");
    std::vector<int> ids;
    if (me == PartyId::P1)
      for (const auto& t : tokens) ids.push_back(emb.tokenizer.id_of(t));
    e_t = secure_embed_text_counts(ctx, emb, ids);
  }

  // Cosine: dot-product ranking against the pre-normalized table rows.
  SecretVector sims;
  {
    PhaseScope scope(ctx, "Cosine");
    sims = secure_matvec(ctx, table.table, e_t);
  }

  // Topk: k' candidates, indices revealed to P1 only.
  RingVec cand_raw;
  {
    PhaseScope scope(ctx, "Topk");
    TopKResult top = secure_topk(ctx, sims, counts.k_prime);
    cand_raw = reveal_to(ctx, top.indices, PartyId::P1);
  }

  // Insert: embed the candidate words, rank against the text embedding,
  // reveal the k winners to P1 and run the inserter there.
  {
    PhaseScope scope(ctx, "Insert");
    std::vector<std::vector<int>> word_ids;
    if (me == PartyId::P1) {
      for (Eigen::Index i = 0; i < cand_raw.size(); ++i) {
        int idx = static_cast<int>(cand_raw[i]);
        result.candidate_indices.push_back(idx);
        const std::string& w = table.vocab.idx2word(idx);
        result.candidate_words.push_back(w);
        auto ids = emb.tokenizer.ids_of_text(w);
        if (ids.empty()) ids.push_back(TokenizerSpec::kUnknownId);
        word_ids.push_back(std::move(ids));
      }
    }
    WordSumEmbeddings ws =
        secure_embed_word_sums(ctx, emb, word_ids, counts.k_prime);
    SecretMatrix raw2 =
        secure_matmul(ctx, ws.sums, as_column(e_t));  // k' x 1, scale 2f
    SecretVector raw2v;
    raw2v.owner = me;
    raw2v.frac_bits = raw2.frac_bits;
    raw2v.first = raw2.first.col(0).array();
    raw2v.second = raw2.second.col(0).array();

    RingVec factors(counts.k_prime);
    for (int i = 0; i < counts.k_prime; ++i)
      factors[i] = mean_coefficient(params.coef_bits, ws.token_counts[i]);
    SecretVector v = apply_public_factors(ring, raw2v, factors,
                                          raw2v.frac_bits + params.coef_bits);

    TopKResult filtered = secure_topk(ctx, v, counts.k);
    RingVec filt_raw = reveal_to(ctx, filtered.indices, PartyId::P1);

    if (me == PartyId::P1) {
      for (Eigen::Index i = 0; i < filt_raw.size(); ++i) {
        int pos = static_cast<int>(filt_raw[i]);
        result.filtered_positions.push_back(pos);
        result.filtered_words.push_back(result.candidate_words[pos]);
      }
      std::string prompt =
          make_insertion_prompt(result.filtered_words, text_at_p1);
      result.t_prime = inserter.rewrite(prompt, text_at_p1);
      std::string lowered = result.t_prime;
      std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      for (const auto& w : result.filtered_words)
        if (lowered.find(w) == std::string::npos)
          throw InserterError("inserter output is missing the word: " + w);

      WatermarkRecord rec;
      rec.watermark_words = result.filtered_words;
      rec.params = params;
      rec.ell = ring.ell();
      rec.frac_bits = ring.frac_bits();
      rec.text_sha256 = Sha256::hex_of(result.t_prime);
      Sha256 idh;
      idh.update(std::to_string(ctx.session_id()));
      idh.update(":");
      idh.update(text_at_p1);
      rec.id = idh.hex_digest().substr(0, 16);
      result.record = std::move(rec);
    }
  }
  return result;
}

// --- detection ------------------------------------------------------------------

namespace {

BoolVector gather_bool(const BoolVector& x, const std::vector<Eigen::Index>& at) {
  BoolVector out;
  out.owner = x.owner;
  out.first.resize(static_cast<Eigen::Index>(at.size()));
  out.second.resize(static_cast<Eigen::Index>(at.size()));
  for (size_t i = 0; i < at.size(); ++i) {
    out.first[static_cast<Eigen::Index>(i)] = x.first[at[i]];
    out.second[static_cast<Eigen::Index>(i)] = x.second[at[i]];
  }
  return out;
}

}  // namespace

DetectionResult detect(PartyContext& ctx, const EmbedderParams& emb,
                       const WatermarkParams& params,
                       const std::string& text_at_p1,
                       const std::vector<std::string>& watermark_words_at_p1,
                       bool verbose_count) {
  const Ring& ring = ctx.ring();
  params.validate();
  PartyId me = ctx.me();
  PhaseScope scope(ctx, "Detect");
  DetectionResult result;

  // P1 extracts the unique candidate words of t' and announces both sizes.
  std::vector<std::vector<int>> wm_ids, cand_ids;
  RingVec sizes(2);
  if (me == PartyId::P1) {
    std::vector<std::string> cand_words;
    for (const auto& t : tokenize(text_at_p1))
      if (std::find(cand_words.begin(), cand_words.end(), t) ==
          cand_words.end())
        cand_words.push_back(t);
    for (const auto& w : watermark_words_at_p1) {
      auto ids = emb.tokenizer.ids_of_text(w);
      if (ids.empty()) ids.push_back(TokenizerSpec::kUnknownId);
      wm_ids.push_back(std::move(ids));
    }
    for (const auto& w : cand_words) {
      auto ids = emb.tokenizer.ids_of_text(w);
      if (ids.empty()) ids.push_back(TokenizerSpec::kUnknownId);
      cand_ids.push_back(std::move(ids));
    }
    sizes[0] = static_cast<u64>(wm_ids.size());
    sizes[1] = static_cast<u64>(cand_ids.size());
  }
  broadcast_from_p1(ctx, sizes);
  int L = static_cast<int>(sizes[0]);
  int C = static_cast<int>(sizes[1]);
  if (L == 0) throw EmptyTextError("watermark word list is empty");
  if (C == 0) throw EmptyTextError("candidate text has no words");
  result.watermark_word_count = L;

  WordSumEmbeddings wm = secure_embed_word_sums(ctx, emb, wm_ids, L);
  WordSumEmbeddings cand = secure_embed_word_sums(ctx, emb, cand_ids, C);

  // Pairwise similarity gram matrix at scale 2f (exact integers).
  SecretMatrix G = secure_matmul(ctx, wm.sums, transpose(cand.sums));

  // sim >= theta  <=>  den*G >= num * m_w * m_c * 2^(2f), all integers.
  auto [num_s, den_s] = rational_approx(params.theta_sim, 1000);
  SecretVector lhs;
  lhs.owner = me;
  lhs.frac_bits = 0;
  lhs.first.resize(static_cast<Eigen::Index>(L) * C);
  lhs.second.resize(static_cast<Eigen::Index>(L) * C);
  RingVec rhs(static_cast<Eigen::Index>(L) * C);
  const int f = ring.frac_bits();
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < C; ++j) {
      Eigen::Index at = static_cast<Eigen::Index>(i) * C + j;
      lhs.first[at] = ring.mul(G.first(i, j), static_cast<u64>(den_s));
      lhs.second[at] = ring.mul(G.second(i, j), static_cast<u64>(den_s));
      unsigned __int128 r = static_cast<unsigned __int128>(num_s) *
                            static_cast<unsigned __int128>(wm.token_counts[i]) *
                            static_cast<unsigned __int128>(cand.token_counts[j]);
      r <<= 2 * f;
      if (r >= (static_cast<unsigned __int128>(1) << (ring.ell() - 2)))
        throw RangeError("similarity threshold overflows the ring");
      rhs[at] = static_cast<u64>(r);
    }

  // ge = NOT (lhs < rhs), kept boolean until after the per-word OR.
  SecretVector rhs_shared = public_sharing(me, rhs, 0);
  SecretVector diff = sub(ring, lhs, rhs_shared);
  BoolVector lt_bits = msb_bits(ctx, diff);
  BoolVector ge = lt_bits;
  // NOT: flip bit 0 of slot 0.
  if (me == PartyId::P1)
    ge.first = ge.first.unaryExpr([](u64 w) { return w ^ 1; });
  if (me == PartyId::P3)
    ge.second = ge.second.unaryExpr([](u64 w) { return w ^ 1; });

  // Existential cap: one hit per watermark word = OR over the candidates.
  int width = C;
  BoolVector acc = ge;
  while (width > 1) {
    int half = width / 2;
    std::vector<Eigen::Index> ia, ib, keep;
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < half; ++j) {
        ia.push_back(static_cast<Eigen::Index>(i) * C + j);
        ib.push_back(static_cast<Eigen::Index>(i) * C + half + j);
      }
      if (width % 2 == 1)
        keep.push_back(static_cast<Eigen::Index>(i) * C + width - 1);
    }
    BoolVector a = gather_bool(acc, ia);
    BoolVector b = gather_bool(acc, ib);
    BoolVector both = bool_and(ctx, a, b);
    BoolVector merged = bool_xor(ring, bool_xor(ring, a, b), both);
    // scatter back into the row prefixes
    size_t cursor = 0;
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < half; ++j) {
        Eigen::Index at = static_cast<Eigen::Index>(i) * C + j;
        acc.first[at] = merged.first[static_cast<Eigen::Index>(cursor)];
        acc.second[at] = merged.second[static_cast<Eigen::Index>(cursor)];
        ++cursor;
      }
    if (width % 2 == 1) {
      // odd leftover ORs into the last kept slot on the next pass; move it
      // next to the merged prefix
      for (int i = 0; i < L; ++i) {
        Eigen::Index src = static_cast<Eigen::Index>(i) * C + width - 1;
        Eigen::Index dst = static_cast<Eigen::Index>(i) * C + half;
        acc.first[dst] = acc.first[src];
        acc.second[dst] = acc.second[src];
      }
      width = half + 1;
    } else {
      width = half;
    }
  }
  std::vector<Eigen::Index> col0;
  for (int i = 0; i < L; ++i)
    col0.push_back(static_cast<Eigen::Index>(i) * C);
  BoolVector word_hits = gather_bool(acc, col0);

  // c = sum of the per-word hit bits.
  SecretBit hits = bit_to_arith(ctx, word_hits);
  SecretVector c_total;
  c_total.owner = me;
  c_total.frac_bits = 0;
  c_total.first = RingVec::Constant(1, 0);
  c_total.second = RingVec::Constant(1, 0);
  for (Eigen::Index i = 0; i < hits.size(); ++i) {
    c_total.first[0] = ring.add(c_total.first[0], hits.first[i]);
    c_total.second[0] = ring.add(c_total.second[0], hits.second[i]);
  }

  // detected <=> den*c > num*L (cross-multiplied presence score).
  auto [num_d, den_d] = rational_approx(params.theta_det, 1000);
  SecretVector lhs_dec = scalar_mul(ring, static_cast<u64>(den_d), c_total);
  RingVec rhs_dec(1);
  rhs_dec[0] = static_cast<u64>(num_d) * static_cast<u64>(L);
  SecretBit b =
      secure_less_than(ctx, public_sharing(me, rhs_dec, 0), lhs_dec);

  RingVec revealed = reveal_to(ctx, b, PartyId::P1);
  if (me == PartyId::P1) result.detected = revealed[0] == 1;
  if (verbose_count) {
    RingVec c_rev = reveal_to(ctx, c_total, PartyId::P1);
    if (me == PartyId::P1)
      result.matched_count = static_cast<int>(c_rev[0]);
  }
  return result;
}

}  // namespace privmark

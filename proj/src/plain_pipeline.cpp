#include "privmark/plain_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "privmark/sha256.hpp"

namespace privmark {

PlainEngine::PlainEngine(Ring ring, WatermarkParams params)
    : ring_(ring), params_(params) {
  params_.validate();
}

void PlainEngine::build_table(const Vocabulary& vocab,
                              const EmbeddingSet& embeddings,
                              u64 session_seed) {
  int M = vocab.size();
  int N = static_cast<int>(embeddings.count());
  if (M > N)
    throw SizeError("vocabulary larger than the embedding pool (M > N)");
  u64 lo = 0, hi = 0;
  for (PartyId p : kAllParties) {
    auto [clo, chi] = sectable_seed_contribution(session_seed, p);
    lo ^= clo;
    hi ^= chi;
  }
  std::vector<int> perm = seeded_permutation(lo, hi, N);
  M_ = M;
  d_ = static_cast<int>(embeddings.dim());
  vocab_ = vocab;
  table_raw_.resize(M_, d_);
  for (int i = 0; i < M_; ++i)
    for (int j = 0; j < d_; ++j)
      table_raw_(i, j) = ring_.encode(embeddings.rows(perm[i], j));
}

void PlainEngine::set_embedder(const EmbedderModel& model) {
  tokenizer_ = model.tokenizer;
  T_ = tokenizer_.size();
  token_rows_raw_.resize(T_, model.rows.cols());
  for (int i = 0; i < T_; ++i)
    for (Eigen::Index j = 0; j < model.rows.cols(); ++j)
      token_rows_raw_(i, j) = ring_.encode(model.rows(i, j));
  if (d_ != 0 && token_rows_raw_.cols() != d_)
    throw ShapeError("embedder dimension differs from the table dimension");
  d_ = static_cast<int>(token_rows_raw_.cols());
}

RingVec PlainEngine::embed_text_counts(const std::vector<int>& ids) const {
  RingVec e = RingVec::Zero(d_);
  for (int id : ids) {
    if (id == TokenizerSpec::kUnknownId) continue;
    for (int j = 0; j < d_; ++j)
      e[j] = ring_.add(e[j], token_rows_raw_(id, j));
  }
  return e;
}

RingVec PlainEngine::word_sum(const std::vector<int>& ids) const {
  return embed_text_counts(ids);
}

std::vector<int> PlainEngine::topk_order(const RingVec& scores, int k) const {
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return ring_.signed_of(scores[a]) > ring_.signed_of(scores[b]);
  });
  idx.resize(k);
  return idx;
}

PlainEngine::Selection PlainEngine::select_watermark_words(
    const std::string& text) const {
  Selection sel;
  std::vector<std::string> tokens = tokenize(text);
  int n = static_cast<int>(tokens.size());
  if (n == 0) throw EmptyTextError("text has no words after tokenization");
  Counts counts = derive_counts(n, params_, M_);
  if (3 * counts.k > M_)
    throw SizeError("vocabulary too small for k' = 3k candidate words");

  std::vector<int> ids;
  for (const auto& t : tokens) ids.push_back(tokenizer_.id_of(t));
  RingVec e_t = embed_text_counts(ids);

  RingVec sims(M_);
  for (int i = 0; i < M_; ++i) {
    u64 acc = 0;
    for (int j = 0; j < d_; ++j)
      acc = ring_.add(acc, ring_.mul(table_raw_(i, j), e_t[j]));
    sims[i] = acc;
  }
  sel.candidate_indices = topk_order(sims, counts.k_prime);
  for (int idx : sel.candidate_indices)
    sel.candidate_words.push_back(vocab_.idx2word(idx));

  RingVec v(counts.k_prime);
  for (int i = 0; i < counts.k_prime; ++i) {
    auto wids = tokenizer_.ids_of_text(sel.candidate_words[i]);
    if (wids.empty()) wids.push_back(TokenizerSpec::kUnknownId);
    RingVec s = word_sum(wids);
    u64 acc = 0;
    for (int j = 0; j < d_; ++j) acc = ring_.add(acc, ring_.mul(s[j], e_t[j]));
    u64 coef = static_cast<u64>(std::llround(
        std::ldexp(1.0, params_.coef_bits) / static_cast<double>(wids.size())));
    v[i] = ring_.mul(acc, coef);
  }
  sel.filtered_positions = topk_order(v, counts.k);
  for (int pos : sel.filtered_positions)
    sel.filtered_words.push_back(sel.candidate_words[pos]);
  return sel;
}

MarkInResult PlainEngine::mark_insert(const std::string& text,
                                      Inserter& inserter,
                                      u64 session_id) const {
  Selection sel = select_watermark_words(text);
  MarkInResult result;
  result.candidate_indices = sel.candidate_indices;
  result.filtered_positions = sel.filtered_positions;
  result.candidate_words = sel.candidate_words;
  result.filtered_words = sel.filtered_words;
  std::string prompt = make_insertion_prompt(sel.filtered_words, text);
  result.t_prime = inserter.rewrite(prompt, text);

  WatermarkRecord rec;
  rec.watermark_words = sel.filtered_words;
  rec.params = params_;
  rec.ell = ring_.ell();
  rec.frac_bits = ring_.frac_bits();
  rec.text_sha256 = Sha256::hex_of(result.t_prime);
  Sha256 idh;
  idh.update(std::to_string(session_id));
  idh.update(":");
  idh.update(text);
  rec.id = idh.hex_digest().substr(0, 16);
  result.record = std::move(rec);
  return result;
}

PlainEngine::Detection PlainEngine::detect(
    const std::string& text,
    const std::vector<std::string>& watermark_words) const {
  Detection out;
  std::vector<std::string> cand_words;
  for (const auto& t : tokenize(text))
    if (std::find(cand_words.begin(), cand_words.end(), t) ==
        cand_words.end())
      cand_words.push_back(t);
  int L = static_cast<int>(watermark_words.size());
  int C = static_cast<int>(cand_words.size());
  if (L == 0) throw EmptyTextError("watermark word list is empty");
  if (C == 0) throw EmptyTextError("candidate text has no words");
  out.watermark_word_count = L;

  const int f = ring_.frac_bits();
  auto [num_s, den_s] = rational_approx(params_.theta_sim, 1000);

  std::vector<RingVec> wm_sums(L), cand_sums(C);
  std::vector<int> wm_m(L), cand_m(C);
  for (int i = 0; i < L; ++i) {
    auto ids = tokenizer_.ids_of_text(watermark_words[i]);
    if (ids.empty()) ids.push_back(TokenizerSpec::kUnknownId);
    wm_m[i] = static_cast<int>(ids.size());
    wm_sums[i] = word_sum(ids);
  }
  for (int j = 0; j < C; ++j) {
    auto ids = tokenizer_.ids_of_text(cand_words[j]);
    if (ids.empty()) ids.push_back(TokenizerSpec::kUnknownId);
    cand_m[j] = static_cast<int>(ids.size());
    cand_sums[j] = word_sum(ids);
  }

  int c = 0;
  for (int i = 0; i < L; ++i) {
    bool hit = false;
    for (int j = 0; j < C && !hit; ++j) {
      u64 g = 0;
      for (int t = 0; t < d_; ++t)
        g = ring_.add(g, ring_.mul(wm_sums[i][t], cand_sums[j][t]));
      u64 lhs = ring_.mul(g, static_cast<u64>(den_s));
      unsigned __int128 r = static_cast<unsigned __int128>(num_s) *
                            static_cast<unsigned __int128>(wm_m[i]) *
                            static_cast<unsigned __int128>(cand_m[j]);
      r <<= 2 * f;
      if (r >= (static_cast<unsigned __int128>(1) << (ring_.ell() - 2)))
        throw RangeError("similarity threshold overflows the ring");
      u64 rhs = static_cast<u64>(r);
      // sim >= theta  <=>  NOT msb(lhs - rhs), same formula as the protocol
      if (!ring_.msb(ring_.sub(lhs, rhs))) hit = true;
    }
    if (hit) ++c;
  }
  out.matched_count = c;

  auto [num_d, den_d] = rational_approx(params_.theta_det, 1000);
  u64 lhs_dec = ring_.mul(static_cast<u64>(den_d), static_cast<u64>(c));
  u64 rhs_dec = ring_.reduce(static_cast<u64>(num_d) * static_cast<u64>(L));
  out.detected = ring_.msb(ring_.sub(rhs_dec, lhs_dec));
  return out;
}

}  // namespace privmark

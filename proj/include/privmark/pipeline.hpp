#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "privmark/sectable.hpp"
#include "privmark/tokenizer.hpp"

namespace privmark {

// Word-mode embedder parameters: the token list is public, the unit-norm
// token rows are P2's input and live secret-shared. A text embeds to the
// mean of its token rows; unknown tokens contribute zero.
struct EmbedderParams {
  TokenizerSpec tokenizer;  // public at all parties
  SecretMatrix token_rows;  // T x d, scale f
  int T = 0;
  int d = 0;
};

// P2's plaintext side of the embedder: tokens plus their matrix.
struct EmbedderModel {
  TokenizerSpec tokenizer;
  RealMat rows;  // T x d, unit rows
};

// File format: header "T d", then T lines of "<token> v1 ... vd".
EmbedderModel load_embedder_model(const std::string& path);
// Reads only the token column, for parties that must not see the values.
TokenizerSpec load_token_list(const std::string& path);
EmbedderModel embedder_model_from(TokenizerSpec spec, RealMat rows);

// Deals the rows from P2; the tokenizer spec must already be shared.
EmbedderParams deal_embedder(PartyContext& ctx, const TokenizerSpec& spec,
                             const EmbedderModel& model_at_p2);

// Public watermarking parameters.
struct WatermarkParams {
  double insertion_ratio = 0.12;   // r
  double theta_sim = 0.85;
  double theta_det = 0.45;
  int coef_bits = 12;              // word-mean coefficient precision (g)

  void validate() const;
};

struct Counts {
  int k = 0;
  int k_prime = 0;
};

// k = max(1, floor(r*n)); k' = 3k capped at M.
Counts derive_counts(int n_words, const WatermarkParams& params, int M);

// Best rational approximation num/den of t with den <= max_den.
std::pair<long long, long long> rational_approx(double t, long long max_den);

// --- embedding protocols -----------------------------------------------------

// Contract embedding: mean of token rows at scale 2f (counts are dealt as
// fixed-point c_j * round(2^f / n)). text_ids is read at P1.
SecretVector secure_embed_text(PartyContext& ctx, const EmbedderParams& emb,
                               const std::vector<int>& text_ids_at_p1);

// Selection-pipeline embedding: integer counts at scale f. Reconstructs to
// n * mean, a positive multiple of the mean, so every ranking it feeds is
// unchanged while all arithmetic stays exact.
SecretVector secure_embed_text_counts(PartyContext& ctx,
                                      const EmbedderParams& emb,
                                      const std::vector<int>& text_ids_at_p1);

// Token-sum embeddings of a word list (scale f) plus the public per-word
// token counts (broadcast by P1). Reconstructs row w to m_w * mean_w.
struct WordSumEmbeddings {
  SecretMatrix sums;            // |words| x d, scale f
  std::vector<int> token_counts;  // public m_w
};
WordSumEmbeddings secure_embed_word_sums(
    PartyContext& ctx, const EmbedderParams& emb,
    const std::vector<std::vector<int>>& word_ids_at_p1, int word_count);

// Contract embedding of words at scale f: single-token words are their
// (pre-normalized) row exactly; multi-token words are the mean via public
// coefficient and probabilistic truncation.
SecretMatrix secure_embed_words(PartyContext& ctx, const EmbedderParams& emb,
                                const std::vector<std::vector<int>>& word_ids_at_p1,
                                int word_count);

// --- inserter ------------------------------------------------------------------

// Rewrites `text` so the watermark words appear; the prompt carries the word
// list in the protocol's fixed format.
class Inserter {
 public:
  virtual ~Inserter() = default;
  virtual std::string rewrite(const std::string& prompt,
                              const std::string& text) = 0;
};

// Deterministic splicer: inserts each word at evenly spaced sentence
// boundaries; by construction the output contains every word.
class DefaultInserter : public Inserter {
 public:
  std::string rewrite(const std::string& prompt,
                      const std::string& text) override;

  static std::vector<std::string> words_from_prompt(const std::string& prompt);
};

// Client for an external generator behind a local HTTP endpoint:
// POST /rewrite {"prompt": ..., "text": ...} -> {"text": ...}.
class HttpInserter : public Inserter {
 public:
  HttpInserter(std::string host, int port, int timeout_ms = 30000);
  std::string rewrite(const std::string& prompt,
                      const std::string& text) override;

 private:
  std::string host_;
  int port_;
  int timeout_ms_;
};

std::string make_insertion_prompt(const std::vector<std::string>& words,
                                  const std::string& text);

// --- watermark insertion and detection ------------------------------------------

struct WatermarkRecord {
  std::string id;
  std::vector<std::string> watermark_words;
  WatermarkParams params;
  int ell = 64;
  int frac_bits = 18;
  std::string text_sha256;

  std::string to_json() const;
  static WatermarkRecord from_json(const std::string& text);
};

struct MarkInResult {
  // Populated at P1 only.
  std::string t_prime;
  WatermarkRecord record;
  std::vector<int> candidate_indices;   // vocab indices, score-descending
  std::vector<int> filtered_positions;  // positions into the candidate list
  std::vector<std::string> candidate_words;
  std::vector<std::string> filtered_words;
};

MarkInResult mark_insert(PartyContext& ctx, const SecTable& table,
                         const EmbedderParams& emb,
                         const WatermarkParams& params, Inserter& inserter,
                         const std::string& text_at_p1);

struct DetectionResult {
  // Populated at P1 only.
  bool detected = false;
  std::optional<int> matched_count;  // revealed only in verbose mode
  int watermark_word_count = 0;
};

DetectionResult detect(PartyContext& ctx, const EmbedderParams& emb,
                       const WatermarkParams& params,
                       const std::string& text_at_p1,
                       const std::vector<std::string>& watermark_words_at_p1,
                       bool verbose_count);

}  // namespace privmark

#pragma once

#include "privmark/pipeline.hpp"

namespace privmark {

// Single-machine baseline with the same fixed-point arithmetic as the 3PC
// engine: identical ring encoding, identical integer score formulas,
// identical tie-breaks and thresholds. Selection indices and detection bits
// must match the secure engine exactly, which is what the equivalence suite
// asserts. Deliberately built on plaintext ring values only -- no share or
// protocol types.
class PlainEngine {
 public:
  PlainEngine(Ring ring, WatermarkParams params);

  // Same permutation derivation as the protocol: XOR of the three
  // deterministic per-party contributions for this session seed.
  void build_table(const Vocabulary& vocab, const EmbeddingSet& embeddings,
                   u64 session_seed);
  void set_embedder(const EmbedderModel& model);

  const Vocabulary& vocab() const { return vocab_; }
  int table_size() const { return M_; }

  struct Selection {
    std::vector<int> candidate_indices;
    std::vector<int> filtered_positions;
    std::vector<std::string> candidate_words;
    std::vector<std::string> filtered_words;
  };

  Selection select_watermark_words(const std::string& text) const;
  MarkInResult mark_insert(const std::string& text, Inserter& inserter,
                           u64 session_id) const;

  struct Detection {
    bool detected = false;
    int matched_count = 0;
    int watermark_word_count = 0;
  };
  Detection detect(const std::string& text,
                   const std::vector<std::string>& watermark_words) const;

  // Exposed for the statistics tests.
  RingVec embed_text_counts(const std::vector<int>& ids) const;

 private:
  RingVec word_sum(const std::vector<int>& ids) const;
  std::vector<int> topk_order(const RingVec& scores, int k) const;

  Ring ring_;
  WatermarkParams params_;
  Vocabulary vocab_;
  RingMat table_raw_;  // M x d, scale f
  int M_ = 0;
  int d_ = 0;
  TokenizerSpec tokenizer_;
  RingMat token_rows_raw_;  // T x d, scale f
  int T_ = 0;
};

}  // namespace privmark

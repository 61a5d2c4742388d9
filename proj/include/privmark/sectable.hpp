#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "privmark/secure_ops.hpp"

namespace privmark {

// Curated word list; plaintext lives only at P1.
struct Vocabulary {
  std::vector<std::string> words;
  std::unordered_map<std::string, int> word2idx;

  int size() const { return static_cast<int>(words.size()); }
  const std::string& idx2word(int i) const { return words.at(i); }
  int index_of(const std::string& w) const {
    auto it = word2idx.find(w);
    return it == word2idx.end() ? -1 : it->second;
  }
};

// Document-embedding pool; plaintext lives only at P2. Rows are
// L2-normalized at load time so cosine ranking reduces to dot products.
struct EmbeddingSet {
  RealMat rows;  // N x d, unit rows

  Eigen::Index count() const { return rows.rows(); }
  Eigen::Index dim() const { return rows.cols(); }
};

Vocabulary load_vocabulary(const std::string& path);
Vocabulary vocabulary_from_words(std::vector<std::string> words);

// Text format: header "N d", then N lines of d reals.
EmbeddingSet load_embeddings(const std::string& path);
// Binary variant: magic "PMEMBED1", u32 N, u32 d, N*d little-endian doubles.
EmbeddingSet load_embeddings_binary(const std::string& path);
void save_embeddings_binary(const std::string& path, const RealMat& rows);
EmbeddingSet embeddings_from_rows(RealMat rows);

// Per-party view of the built table. The secret share matrix exists at all
// parties; the vocabulary maps stay at P1.
struct SecTable {
  SecretMatrix table;  // M x d, scale f
  Vocabulary vocab;    // filled only at P1
  int M = 0;
  int d = 0;
  int frac_bits = 0;
};

// Runs the table-construction protocol: dimensions are exchanged, a joint
// 128-bit seed is XOR-agreed, the first M entries of the seeded permutation
// of [0,N) pick the rows, and P2 deals them in word-index order. vocab is
// read at P1, embeddings at P2.
SecTable build_sectable(PartyContext& ctx, const Vocabulary& vocab,
                        const EmbeddingSet& embeddings);

// Derives the shared permutation from the agreed seed; exposed for the
// plaintext oracle and the statistics tests.
std::vector<int> seeded_permutation(u64 seed_lo, u64 seed_hi, int n);

// Deterministic per-party seed contribution (pure function of session seed).
std::pair<u64, u64> sectable_seed_contribution(u64 session_seed, PartyId p);

// Persistence: one share file per party (frame-encoded) and, at P1, the
// index map JSON next to it.
void save_sectable(const SecTable& table, PartyId me, u64 session_id,
                   const std::string& dir);
SecTable load_sectable(const Ring& ring, PartyId me, const std::string& dir);

}  // namespace privmark

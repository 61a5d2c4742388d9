#pragma once

#include <utility>
#include <vector>

#include "privmark/runtime.hpp"

namespace privmark {

// Interactive 3PC primitives in the arithmetic-black-box style. Every
// operation runs the same code at all three parties against one
// PartyContext; values stay replicated-shared unless a reveal is explicit.
//
// Cost sheet (payload elements, all parties combined):
//   secure_mul(n)        3n   one round
//   secure_dot           3    one round
//   secure_matmul(M,N)   3MN  one round
//   truncate(n)          n    one round (only P2 sends)
//   reveal_to(n)         2n   one round
// Comparisons go through boolean sharings of the packed bit words and cost
// log2(ell)+O(1) rounds.

// Boolean (XOR) replicated sharing of packed bit words, one word per value.
struct BoolVector {
  RingVec first;
  RingVec second;
  PartyId owner = PartyId::P1;

  Eigen::Index size() const { return first.size(); }
};

// Arithmetic sharing whose reconstruction is 0 or 1.
using SecretBit = SecretVector;

// --- local (communication-free) operations ---------------------------------

SecretVector add(const Ring& ring, const SecretVector& x,
                 const SecretVector& y);
SecretVector sub(const Ring& ring, const SecretVector& x,
                 const SecretVector& y);
SecretVector scalar_mul(const Ring& ring, u64 c, const SecretVector& x);
// Adds a public constant: slot-0 holders adjust their component.
SecretVector add_public(const Ring& ring, const SecretVector& x,
                        const RingVec& c);
// Sharing of a value all parties know (component 0 = value, others 0).
SecretVector public_sharing(PartyId me, const RingVec& values, int frac_bits);
SecretVector concat(const SecretVector& a, const SecretVector& b);
SecretVector segment(const SecretVector& x, Eigen::Index start,
                     Eigen::Index len);

// --- input dealing and output reveal ----------------------------------------

// Dealer shares its own plaintext vector: two slots come from pairwise PRFs,
// the third is sent to its two holders. `values` is only read at the dealer;
// the shape is a public protocol parameter every party passes identically.
SecretVector deal_vector(PartyContext& ctx, PartyId dealer, Eigen::Index n,
                         const RingVec& values, int frac_bits);
SecretMatrix deal_matrix(PartyContext& ctx, PartyId dealer, Eigen::Index rows,
                         Eigen::Index cols, const RingMat& values,
                         int frac_bits);

// Target learns the plaintext; the two senders each contribute their copy of
// the missing slot and the copies must agree. Non-targets get an empty
// vector back.
RingVec reveal_to(PartyContext& ctx, const SecretVector& x, PartyId target);

// --- arithmetic protocols ----------------------------------------------------

// Elementwise product; output scale is the sum of the input scales.
SecretVector secure_mul(PartyContext& ctx, const SecretVector& x,
                        const SecretVector& y);

// Probabilistic truncation by `bits` (ABY3-style two-party-assisted, +-1 LSB).
SecretVector truncate(PartyContext& ctx, const SecretVector& x, int bits);

// Elementwise fixed-point product at common scale f: multiply then truncate.
SecretVector fixed_mul(PartyContext& ctx, const SecretVector& x,
                       const SecretVector& y);

// Inner product; single resharing of the locally-summed cross terms.
SecretVector secure_dot(PartyContext& ctx, const SecretVector& x,
                        const SecretVector& y);

// (M x K) * (K x N); one resharing of MN elements.
SecretMatrix secure_matmul(PartyContext& ctx, const SecretMatrix& a,
                           const SecretMatrix& b);
SecretVector secure_matvec(PartyContext& ctx, const SecretMatrix& a,
                           const SecretVector& x);

// --- boolean layer -----------------------------------------------------------

// Bitwise AND of XOR-shared words (same resharing pattern as secure_mul over
// Z_2). The *_many variant batches several AND gates into one frame.
BoolVector bool_and(PartyContext& ctx, const BoolVector& x,
                    const BoolVector& y);
std::vector<BoolVector> bool_and_many(
    PartyContext& ctx, const std::vector<std::pair<const BoolVector*,
                                                   const BoolVector*>>& gates);
BoolVector bool_xor(const Ring& ring, const BoolVector& x, const BoolVector& y);

// XOR-shared packed words of the arithmetic value (three-summand adder, then
// Kogge-Stone carries). Bit i of the result word is bit i of the value.
BoolVector arith_to_bool(PartyContext& ctx, const SecretVector& x);

// Extracted MSB / zero-test as XOR-shared single bits (bit 0 of each word).
BoolVector msb_bits(PartyContext& ctx, const SecretVector& x);
BoolVector eqz_bits(PartyContext& ctx, const SecretVector& x);

// XOR-shared bit -> arithmetic {0,1} sharing.
SecretBit bit_to_arith(PartyContext& ctx, const BoolVector& bits);

// reconstruct(out) = 1 iff signed(x - y) < 0, elementwise.
SecretBit secure_less_than(PartyContext& ctx, const SecretVector& x,
                           const SecretVector& y);
SecretBit secure_eqz(PartyContext& ctx, const SecretVector& x);

// reconstructs to x where b=1, else y.
SecretVector oblivious_select(PartyContext& ctx, const SecretBit& b,
                              const SecretVector& x, const SecretVector& y);

// --- top-k -------------------------------------------------------------------

struct TopKResult {
  SecretVector indices;  // k secret indices, score-descending
  SecretVector values;   // matching scores
};

// k sequential argmax passes over a tournament tree; the winner position is
// masked with the most negative representable score before the next pass.
// Ties break toward the smaller index.
TopKResult secure_topk(PartyContext& ctx, const SecretVector& scores, int k);

// --- debug/testing helpers ---------------------------------------------------

// Cross-checks replication consistency (second(p) == first(next(p))). This
// moves share components between parties, so it is for tests only.
void debug_verify_replication(PartyContext& ctx, const SecretVector& x);

// Exchanges correlated-randomness counters and throws DesyncError on drift.
void debug_verify_counters(PartyContext& ctx);

}  // namespace privmark

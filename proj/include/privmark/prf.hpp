#pragma once

#include <array>
#include <cstdint>
#include <cstring>

#include "privmark/party.hpp"
#include "privmark/ring.hpp"

namespace privmark {

// 128-bit PRF key. Slot s of a replicated sharing is held by parties
// {P_s, P_prev(s)}, and that pair shares exactly one of these keys, so a key
// doubles as "the randomness both holders of slot s can derive locally".
struct PrfKey {
  u64 k0 = 0;
  u64 k1 = 0;
};

// SipHash-2-4 over a 24-byte message (domain, counter, index). Keyed 128-bit
// PRF with 64-bit output blocks; plenty for correlated-randomness derivation
// in the honest-but-curious model.
class Prf64 {
 public:
  Prf64() = default;
  explicit Prf64(PrfKey key) : key_(key) {}

  u64 eval(u64 domain, u64 counter, u64 index) const {
    std::array<u64, 3> msg = {domain, counter, index};
    return siphash24(key_.k0, key_.k1,
                     reinterpret_cast<const unsigned char*>(msg.data()),
                     sizeof(msg));
  }

  const PrfKey& key() const { return key_; }

  static u64 siphash24(u64 k0, u64 k1, const unsigned char* in, size_t len) {
    u64 v0 = 0x736f6d6570736575ULL ^ k0;
    u64 v1 = 0x646f72616e646f6dULL ^ k1;
    u64 v2 = 0x6c7967656e657261ULL ^ k0;
    u64 v3 = 0x7465646279746573ULL ^ k1;
    auto rotl = [](u64 x, int b) { return (x << b) | (x >> (64 - b)); };
    auto round = [&]() {
      v0 += v1;
      v1 = rotl(v1, 13);
      v1 ^= v0;
      v0 = rotl(v0, 32);
      v2 += v3;
      v3 = rotl(v3, 16);
      v3 ^= v2;
      v0 += v3;
      v3 = rotl(v3, 21);
      v3 ^= v0;
      v2 += v1;
      v1 = rotl(v1, 17);
      v1 ^= v2;
      v2 = rotl(v2, 32);
    };
    const unsigned char* end = in + (len - (len % 8));
    u64 b = static_cast<u64>(len) << 56;
    for (; in != end; in += 8) {
      u64 m;
      std::memcpy(&m, in, 8);
      v3 ^= m;
      round();
      round();
      v0 ^= m;
    }
    size_t left = len % 8;
    for (size_t i = 0; i < left; ++i) b |= static_cast<u64>(in[i]) << (8 * i);
    v3 ^= b;
    round();
    round();
    v0 ^= b;
    v2 ^= 0xff;
    round();
    round();
    round();
    round();
    return v0 ^ v1 ^ v2 ^ v3;
  }

 private:
  PrfKey key_;
};

namespace prf_domain {
constexpr u64 kZeroArith = 1;  // additive zero sharings
constexpr u64 kZeroBool = 2;   // XOR zero sharings
constexpr u64 kDeal = 3;       // dealer input sharings
constexpr u64 kPair = 4;       // fresh pairwise randomness (truncation etc.)
}  // namespace prf_domain

// Per-party view of the pairwise correlated randomness. Party p holds the
// keys of slot p (shared with prev(p)) and slot next(p) (shared with
// next(p)). Counters advance in lockstep because every party executes the
// same protocol program.
class ZeroShareContext {
 public:
  ZeroShareContext() = default;

  ZeroShareContext(PartyId me, PrfKey key_slot_self, PrfKey key_slot_next)
      : me_(me), slot_self_(Prf64(key_slot_self)), slot_next_(Prf64(key_slot_next)) {}

  PartyId me() const { return me_; }

  bool has_slot_key(int slot) const {
    return slot == index_of(me_) || slot == index_of(next(me_));
  }

  const Prf64& slot_prf(int slot) const {
    if (slot == index_of(me_)) return slot_self_;
    if (slot == index_of(next(me_))) return slot_next_;
    throw ConsistencyError("party does not hold the requested slot key");
  }

  // alpha_p = PRF(k_{prev(p),p}, ctr) - PRF(k_{p,next(p)}, ctr); the three
  // masks telescope to zero mod 2^ell.
  RingVec next_zero_arith(const Ring& ring, Eigen::Index n) {
    u64 ctr = zero_arith_ctr_++;
    RingVec out(n);
    for (Eigen::Index i = 0; i < n; ++i)
      out[i] = ring.sub(slot_self_.eval(prf_domain::kZeroArith, ctr, i),
                        slot_next_.eval(prf_domain::kZeroArith, ctr, i));
    return out;
  }

  RingVec next_zero_bool(const Ring& ring, Eigen::Index n) {
    u64 ctr = zero_bool_ctr_++;
    RingVec out(n);
    for (Eigen::Index i = 0; i < n; ++i)
      out[i] = ring.reduce(slot_self_.eval(prf_domain::kZeroBool, ctr, i) ^
                           slot_next_.eval(prf_domain::kZeroBool, ctr, i));
    return out;
  }

  // Slot stream for dealer sharings. Every party advances the counter on
  // every deal; only the key holders can evaluate.
  u64 bump_deal() { return deal_ctr_++; }
  u64 bump_pair() { return pair_ctr_++; }

  RingVec slot_stream(const Ring& ring, int slot, u64 domain, u64 ctr,
                      Eigen::Index n) const {
    const Prf64& prf = slot_prf(slot);
    RingVec out(n);
    for (Eigen::Index i = 0; i < n; ++i)
      out[i] = ring.reduce(prf.eval(domain, ctr, i));
    return out;
  }

  u64 zero_arith_counter() const { return zero_arith_ctr_; }
  u64 zero_bool_counter() const { return zero_bool_ctr_; }
  u64 deal_counter() const { return deal_ctr_; }
  u64 pair_counter() const { return pair_ctr_; }

  std::array<u64, 4> counters() const {
    return {zero_arith_ctr_, zero_bool_ctr_, deal_ctr_, pair_ctr_};
  }

 private:
  PartyId me_ = PartyId::P1;
  Prf64 slot_self_;
  Prf64 slot_next_;
  u64 zero_arith_ctr_ = 0;
  u64 zero_bool_ctr_ = 0;
  u64 deal_ctr_ = 0;
  u64 pair_ctr_ = 0;
};

}  // namespace privmark

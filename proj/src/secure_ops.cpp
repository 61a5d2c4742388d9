#include "privmark/secure_ops.hpp"

#include <algorithm>

namespace privmark {

namespace {

void check_same_shape(const SecretVector& x, const SecretVector& y) {
  if (x.size() != y.size()) throw ShapeError("secret vector sizes differ");
}

// Slot s of a sharing is party s's `first` and party prev(s)'s `second`.
bool holds_as_first(PartyId p, int slot) { return index_of(p) == slot; }
bool holds_as_second(PartyId p, int slot) {
  return index_of(next(p)) == slot;
}

RingVec reduce_all(const Ring& ring, RingVec v) {
  return ring.reduce(std::move(v));
}

}  // namespace

// --- local ops ---------------------------------------------------------------

SecretVector add(const Ring& ring, const SecretVector& x,
                 const SecretVector& y) {
  check_same_shape(x, y);
  if (x.frac_bits != y.frac_bits)
    throw ShapeError("fixed-point scales differ in add");
  SecretVector out;
  out.owner = x.owner;
  out.frac_bits = x.frac_bits;
  out.first = reduce_all(ring, x.first + y.first);
  out.second = reduce_all(ring, x.second + y.second);
  return out;
}

SecretVector sub(const Ring& ring, const SecretVector& x,
                 const SecretVector& y) {
  check_same_shape(x, y);
  if (x.frac_bits != y.frac_bits)
    throw ShapeError("fixed-point scales differ in sub");
  SecretVector out;
  out.owner = x.owner;
  out.frac_bits = x.frac_bits;
  out.first = reduce_all(ring, x.first - y.first);
  out.second = reduce_all(ring, x.second - y.second);
  return out;
}

SecretVector scalar_mul(const Ring& ring, u64 c, const SecretVector& x) {
  SecretVector out;
  out.owner = x.owner;
  out.frac_bits = x.frac_bits;
  out.first = reduce_all(ring, x.first * c);
  out.second = reduce_all(ring, x.second * c);
  return out;
}

SecretVector add_public(const Ring& ring, const SecretVector& x,
                        const RingVec& c) {
  if (c.size() != x.size()) throw ShapeError("constant size mismatch");
  SecretVector out = x;
  if (holds_as_first(x.owner, 0)) out.first = reduce_all(ring, out.first + c);
  if (holds_as_second(x.owner, 0))
    out.second = reduce_all(ring, out.second + c);
  return out;
}

SecretVector public_sharing(PartyId me, const RingVec& values, int frac_bits) {
  SecretVector out;
  out.owner = me;
  out.frac_bits = frac_bits;
  out.first = RingVec::Zero(values.size());
  out.second = RingVec::Zero(values.size());
  if (holds_as_first(me, 0)) out.first = values;
  if (holds_as_second(me, 0)) out.second = values;
  return out;
}

SecretVector concat(const SecretVector& a, const SecretVector& b) {
  if (a.frac_bits != b.frac_bits)
    throw ShapeError("fixed-point scales differ in concat");
  SecretVector out;
  out.owner = a.owner;
  out.frac_bits = a.frac_bits;
  out.first.resize(a.size() + b.size());
  out.second.resize(a.size() + b.size());
  out.first << a.first, b.first;
  out.second << a.second, b.second;
  return out;
}

SecretVector segment(const SecretVector& x, Eigen::Index start,
                     Eigen::Index len) {
  SecretVector out;
  out.owner = x.owner;
  out.frac_bits = x.frac_bits;
  out.first = x.first.segment(start, len);
  out.second = x.second.segment(start, len);
  return out;
}

// --- dealing and reveal -------------------------------------------------------

SecretVector deal_vector(PartyContext& ctx, PartyId dealer, Eigen::Index n,
                         const RingVec& values, int frac_bits) {
  const Ring& ring = ctx.ring();
  PartyId me = ctx.me();
  if (me == dealer && values.size() != n)
    throw ShapeError("dealer plaintext does not match the announced shape");
  u64 ctr = ctx.zctx().bump_deal();

  int slot_a = index_of(dealer);            // PRF slot shared with prev(d)
  int slot_b = index_of(next(dealer));      // PRF slot shared with next(d)
  int slot_c = index_of(prev(dealer));      // explicit component

  SecretVector out;
  out.owner = me;
  out.frac_bits = frac_bits;
  out.first = RingVec::Zero(n);
  out.second = RingVec::Zero(n);

  auto fill = [&](int slot, const RingVec& vals) {
    if (holds_as_first(me, slot)) out.first = vals;
    if (holds_as_second(me, slot)) out.second = vals;
  };

  if (me == dealer) {
    RingVec a = ctx.zctx().slot_stream(ring, slot_a, prf_domain::kDeal, ctr, n);
    RingVec b = ctx.zctx().slot_stream(ring, slot_b, prf_domain::kDeal, ctr, n);
    RingVec c = reduce_all(ring, values - a - b);
    fill(slot_a, a);
    fill(slot_b, b);
    // slot_c is held by prev(dealer) and next(dealer).
    if (n > 0) {
      ctx.send_elems(prev(dealer), c);
      ctx.send_elems(next(dealer), c);
    }
  } else {
    int my_prf_slot = (me == prev(dealer)) ? slot_a : slot_b;
    RingVec mine =
        ctx.zctx().slot_stream(ring, my_prf_slot, prf_domain::kDeal, ctr, n);
    fill(my_prf_slot, mine);
    if (n > 0) fill(slot_c, ctx.recv_elems(dealer));
  }
  return out;
}

SecretMatrix deal_matrix(PartyContext& ctx, PartyId dealer, Eigen::Index r,
                         Eigen::Index c, const RingMat& values,
                         int frac_bits) {
  RingVec flat;
  if (ctx.me() == dealer) {
    if (values.rows() != r || values.cols() != c)
      throw ShapeError("dealer matrix does not match the announced shape");
    flat.resize(r * c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) flat[i * c + j] = values(i, j);
  }
  SecretVector shared = deal_vector(ctx, dealer, r * c, flat, frac_bits);

  SecretMatrix out;
  out.owner = ctx.me();
  out.frac_bits = frac_bits;
  out.first.resize(r, c);
  out.second.resize(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) {
      out.first(i, j) = shared.first[i * c + j];
      out.second(i, j) = shared.second[i * c + j];
    }
  return out;
}

RingVec reveal_to(PartyContext& ctx, const SecretVector& x, PartyId target) {
  const Ring& ring = ctx.ring();
  PartyId me = ctx.me();
  int missing = index_of(prev(target));
  if (me == target) {
    RingVec a = ctx.recv_elems(prev(me));
    RingVec b = ctx.recv_elems(next(me));
    for (Eigen::Index i = 0; i < a.size(); ++i)
      if (a[i] != b[i])
        throw ConsistencyError("reveal copies of the missing slot disagree");
    return reduce_all(ring, x.first + x.second + a);
  }
  if (holds_as_first(me, missing)) ctx.send_elems(target, x.first);
  if (holds_as_second(me, missing)) ctx.send_elems(target, x.second);
  return RingVec();
}

// --- multiplication family ----------------------------------------------------

namespace {

// Local cross terms of the replicated product, one output element per input
// element; adding the three parties' results gives x*y.
RingVec mul_cross_terms(const Ring& ring, const SecretVector& x,
                        const SecretVector& y) {
  return reduce_all(ring, x.first * y.first + x.first * y.second +
                              x.second * y.first);
}

SecretVector reshare_additive(PartyContext& ctx, RingVec mine, int frac_bits) {
  SecretVector out;
  out.owner = ctx.me();
  out.frac_bits = frac_bits;
  ctx.send_elems(prev(ctx.me()), mine);
  out.second = ctx.recv_elems(next(ctx.me()));
  out.first = std::move(mine);
  return out;
}

}  // namespace

SecretVector secure_mul(PartyContext& ctx, const SecretVector& x,
                        const SecretVector& y) {
  check_same_shape(x, y);
  const Ring& ring = ctx.ring();
  RingVec t = mul_cross_terms(ring, x, y) +
              ctx.zctx().next_zero_arith(ring, x.size());
  return reshare_additive(ctx, reduce_all(ring, std::move(t)),
                          x.frac_bits + y.frac_bits);
}

SecretVector truncate(PartyContext& ctx, const SecretVector& x, int bits) {
  const Ring& ring = ctx.ring();
  PartyId me = ctx.me();
  Eigen::Index n = x.size();
  u64 ctr = ctx.zctx().bump_pair();

  SecretVector out;
  out.owner = me;
  out.frac_bits = x.frac_bits - bits;
  out.first = RingVec::Zero(n);
  out.second = RingVec::Zero(n);

  auto sshift = [&](u64 v) { return ring.shift_signed(v, bits); };

  if (me == PartyId::P1) {
    // slot0 locally truncated; masked slot1 arrives from P2.
    for (Eigen::Index i = 0; i < n; ++i) out.first[i] = sshift(x.first[i]);
    out.second = ctx.recv_elems(PartyId::P2);
  } else if (me == PartyId::P2) {
    RingVec rho =
        ctx.zctx().slot_stream(ring, 2, prf_domain::kPair, ctr, n);
    RingVec w(n);
    for (Eigen::Index i = 0; i < n; ++i)
      w[i] = ring.sub(sshift(ring.add(x.first[i], x.second[i])), rho[i]);
    ctx.send_elems(PartyId::P1, w);
    out.first = std::move(w);
    out.second = std::move(rho);
  } else {
    RingVec rho =
        ctx.zctx().slot_stream(ring, 2, prf_domain::kPair, ctr, n);
    out.first = std::move(rho);
    for (Eigen::Index i = 0; i < n; ++i) out.second[i] = sshift(x.second[i]);
  }
  return out;
}

SecretVector fixed_mul(PartyContext& ctx, const SecretVector& x,
                       const SecretVector& y) {
  if (x.frac_bits != y.frac_bits)
    throw ShapeError("fixed_mul operands must share one scale");
  return truncate(ctx, secure_mul(ctx, x, y), x.frac_bits);
}

SecretVector secure_dot(PartyContext& ctx, const SecretVector& x,
                        const SecretVector& y) {
  check_same_shape(x, y);
  const Ring& ring = ctx.ring();
  RingVec cross = mul_cross_terms(ring, x, y);
  u64 acc = 0;
  for (Eigen::Index i = 0; i < cross.size(); ++i) acc = ring.add(acc, cross[i]);
  RingVec t(1);
  t[0] = ring.add(acc, ctx.zctx().next_zero_arith(ring, 1)[0]);
  return reshare_additive(ctx, std::move(t), x.frac_bits + y.frac_bits);
}

SecretMatrix secure_matmul(PartyContext& ctx, const SecretMatrix& a,
                           const SecretMatrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul shape mismatch");
  const Ring& ring = ctx.ring();
  RingMat cross = a.first * b.first + a.first * b.second + a.second * b.first;
  Eigen::Index m = cross.rows(), ncol = cross.cols();
  RingVec flat(m * ncol);
  RingVec mask = ctx.zctx().next_zero_arith(ring, m * ncol);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < ncol; ++j)
      flat[i * ncol + j] = ring.add(ring.reduce(cross(i, j)), mask[i * ncol + j]);
  SecretVector re = reshare_additive(ctx, std::move(flat),
                                     a.frac_bits + b.frac_bits);
  SecretMatrix out;
  out.owner = ctx.me();
  out.frac_bits = re.frac_bits;
  out.first.resize(m, ncol);
  out.second.resize(m, ncol);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < ncol; ++j) {
      out.first(i, j) = re.first[i * ncol + j];
      out.second(i, j) = re.second[i * ncol + j];
    }
  return out;
}

SecretVector secure_matvec(PartyContext& ctx, const SecretMatrix& a,
                           const SecretVector& x) {
  if (a.cols() != x.size()) throw ShapeError("matvec shape mismatch");
  SecretMatrix xm;
  xm.owner = x.owner;
  xm.frac_bits = x.frac_bits;
  xm.first = x.first.matrix();
  xm.second = x.second.matrix();
  SecretMatrix prod = secure_matmul(ctx, a, xm);
  SecretVector out;
  out.owner = prod.owner;
  out.frac_bits = prod.frac_bits;
  out.first = prod.first.col(0).array();
  out.second = prod.second.col(0).array();
  return out;
}

// --- boolean layer -------------------------------------------------------------

BoolVector bool_xor(const Ring& ring, const BoolVector& x, const BoolVector& y) {
  BoolVector out;
  out.owner = x.owner;
  out.first = vxor(x.first, y.first);
  out.second = vxor(x.second, y.second);
  (void)ring;
  return out;
}

namespace {

RingVec and_cross_terms(const BoolVector& x, const BoolVector& y) {
  return vxor(vxor(vand(x.first, y.first), vand(x.first, y.second)),
              vand(x.second, y.first));
}

BoolVector shl(const Ring& ring, const BoolVector& x, int k) {
  BoolVector out;
  out.owner = x.owner;
  out.first = vshl(x.first, k, ring.mask());
  out.second = vshl(x.second, k, ring.mask());
  return out;
}

BoolVector shr(const BoolVector& x, int k) {
  BoolVector out;
  out.owner = x.owner;
  out.first = vshr(x.first, k);
  out.second = vshr(x.second, k);
  return out;
}

}  // namespace

std::vector<BoolVector> bool_and_many(
    PartyContext& ctx, const std::vector<std::pair<const BoolVector*,
                                                   const BoolVector*>>& gates) {
  const Ring& ring = ctx.ring();
  Eigen::Index total = 0;
  for (const auto& g : gates) total += g.first->size();
  RingVec batch(total);
  RingVec mask = ctx.zctx().next_zero_bool(ring, total);
  Eigen::Index off = 0;
  for (const auto& g : gates) {
    if (g.first->size() != g.second->size())
      throw ShapeError("bool_and size mismatch");
    RingVec cross = and_cross_terms(*g.first, *g.second);
    for (Eigen::Index i = 0; i < cross.size(); ++i)
      batch[off + i] = ring.reduce(cross[i] ^ mask[off + i]);
    off += cross.size();
  }
  ctx.send_elems(prev(ctx.me()), batch);
  RingVec from_next = ctx.recv_elems(next(ctx.me()));
  std::vector<BoolVector> out;
  out.reserve(gates.size());
  off = 0;
  for (const auto& g : gates) {
    BoolVector v;
    v.owner = ctx.me();
    v.first = batch.segment(off, g.first->size());
    v.second = from_next.segment(off, g.first->size());
    out.push_back(std::move(v));
    off += g.first->size();
  }
  return out;
}

BoolVector bool_and(PartyContext& ctx, const BoolVector& x,
                    const BoolVector& y) {
  if (x.size() != y.size()) throw ShapeError("bool_and size mismatch");
  return bool_and_many(ctx, {{&x, &y}})[0];
}

BoolVector arith_to_bool(PartyContext& ctx, const SecretVector& x) {
  const Ring& ring = ctx.ring();
  PartyId me = ctx.me();
  Eigen::Index n = x.size();

  // XOR constant-sharings of the three arithmetic slots.
  auto slot_bool = [&](int slot, const RingVec& vals) {
    BoolVector b;
    b.owner = me;
    b.first = RingVec::Zero(n);
    b.second = RingVec::Zero(n);
    if (holds_as_first(me, slot)) b.first = vals;
    if (holds_as_second(me, slot)) b.second = vals;
    return b;
  };
  RingVec zero = RingVec::Zero(n);
  BoolVector a = slot_bool(0, holds_as_first(me, 0)   ? x.first
                              : holds_as_second(me, 0) ? x.second
                                                       : zero);
  BoolVector b = slot_bool(1, holds_as_first(me, 1)   ? x.first
                              : holds_as_second(me, 1) ? x.second
                                                       : zero);
  BoolVector c = slot_bool(2, holds_as_first(me, 2)   ? x.first
                              : holds_as_second(me, 2) ? x.second
                                                       : zero);

  // Three summands -> carry-save: x = (a^b^c) + 2*maj(a,b,c).
  BoolVector s = bool_xor(ring, bool_xor(ring, a, b), c);
  auto maj_parts = bool_and_many(ctx, {{&a, &b}, {&a, &c}, {&b, &c}});
  BoolVector maj = bool_xor(ring, bool_xor(ring, maj_parts[0], maj_parts[1]),
                            maj_parts[2]);
  BoolVector carry2 = shl(ring, maj, 1);

  // Two-summand Kogge-Stone: all carries of s + carry2.
  BoolVector g = bool_and(ctx, s, carry2);
  BoolVector p = bool_xor(ring, s, carry2);
  for (int k = 1; k < ring.ell(); k <<= 1) {
    BoolVector gs = shl(ring, g, k);
    BoolVector ps = shl(ring, p, k);
    auto r = bool_and_many(ctx, {{&p, &gs}, {&p, &ps}});
    g = bool_xor(ring, g, r[0]);
    p = std::move(r[1]);
  }
  // sum = s ^ carry2 ^ (carries shifted into place)
  BoolVector carries = shl(ring, g, 1);
  return bool_xor(ring, bool_xor(ring, s, carry2), carries);
}

BoolVector msb_bits(PartyContext& ctx, const SecretVector& x) {
  BoolVector sum = arith_to_bool(ctx, x);
  return shr(sum, ctx.ring().ell() - 1);
}

BoolVector eqz_bits(PartyContext& ctx, const SecretVector& x) {
  const Ring& ring = ctx.ring();
  BoolVector v = arith_to_bool(ctx, x);
  // OR-fold all bits into bit 0, then negate.
  for (int k = ring.ell() / 2; k >= 1; k >>= 1) {
    BoolVector sh = shr(v, k);
    BoolVector both = bool_and(ctx, v, sh);
    v = bool_xor(ring, bool_xor(ring, v, sh), both);
  }
  BoolVector out;
  out.owner = ctx.me();
  out.first = vand_const(v.first, 1);
  out.second = vand_const(v.second, 1);
  // NOT: flip slot 0.
  if (holds_as_first(ctx.me(), 0))
    out.first = out.first.unaryExpr([](u64 w) { return w ^ 1; });
  if (holds_as_second(ctx.me(), 0))
    out.second = out.second.unaryExpr([](u64 w) { return w ^ 1; });
  return out;
}

SecretBit bit_to_arith(PartyContext& ctx, const BoolVector& bits) {
  const Ring& ring = ctx.ring();
  PartyId me = ctx.me();
  Eigen::Index n = bits.size();

  auto slot_arith = [&](int slot) {
    SecretVector v;
    v.owner = me;
    v.frac_bits = 0;
    v.first = RingVec::Zero(n);
    v.second = RingVec::Zero(n);
    if (holds_as_first(me, slot)) v.first = vand_const(bits.first, 1);
    if (holds_as_second(me, slot)) v.second = vand_const(bits.second, 1);
    return v;
  };
  SecretVector b0 = slot_arith(0);
  SecretVector b1 = slot_arith(1);
  SecretVector b2 = slot_arith(2);

  // XOR over the arithmetic ring: x ^ y = x + y - 2xy.
  SecretVector m1 = secure_mul(ctx, b0, b1);
  SecretVector u =
      sub(ring, add(ring, b0, b1), scalar_mul(ring, 2, m1));
  SecretVector m2 = secure_mul(ctx, u, b2);
  return sub(ring, add(ring, u, b2), scalar_mul(ring, 2, m2));
}

SecretBit secure_less_than(PartyContext& ctx, const SecretVector& x,
                           const SecretVector& y) {
  check_same_shape(x, y);
  if (x.frac_bits != y.frac_bits)
    throw ShapeError("comparison operands must share one scale");
  SecretVector d = sub(ctx.ring(), x, y);
  return bit_to_arith(ctx, msb_bits(ctx, d));
}

SecretBit secure_eqz(PartyContext& ctx, const SecretVector& x) {
  return bit_to_arith(ctx, eqz_bits(ctx, x));
}

SecretVector oblivious_select(PartyContext& ctx, const SecretBit& b,
                              const SecretVector& x, const SecretVector& y) {
  check_same_shape(x, y);
  if (b.size() != x.size()) throw ShapeError("selector size mismatch");
  if (x.frac_bits != y.frac_bits)
    throw ShapeError("fixed-point scales differ in select");
  const Ring& ring = ctx.ring();
  SecretVector diff = sub(ring, x, y);
  SecretVector scaled = secure_mul(ctx, b, diff);
  scaled.frac_bits = x.frac_bits;  // selector carries scale 0
  return add(ring, y, scaled);
}

// --- top-k ---------------------------------------------------------------------

namespace {

struct RankedVec {
  SecretVector vals;
  SecretVector idxs;
};

// Tournament entries mix score and index payloads in one vector to share the
// communication round; scales are tracked by the caller.
SecretVector concat_raw(const SecretVector& a, const SecretVector& b) {
  SecretVector out;
  out.owner = a.owner;
  out.frac_bits = a.frac_bits;
  out.first.resize(a.size() + b.size());
  out.second.resize(a.size() + b.size());
  out.first << a.first, b.first;
  out.second << a.second, b.second;
  return out;
}

SecretVector gather(const SecretVector& x, const std::vector<Eigen::Index>& at) {
  SecretVector out;
  out.owner = x.owner;
  out.frac_bits = x.frac_bits;
  out.first.resize(static_cast<Eigen::Index>(at.size()));
  out.second.resize(static_cast<Eigen::Index>(at.size()));
  for (size_t i = 0; i < at.size(); ++i) {
    out.first[static_cast<Eigen::Index>(i)] = x.first[at[i]];
    out.second[static_cast<Eigen::Index>(i)] = x.second[at[i]];
  }
  return out;
}

// One tournament reduction; ties keep the left (smaller-index) entry.
RankedVec argmax_tournament(PartyContext& ctx, RankedVec cur) {
  const Ring& ring = ctx.ring();
  while (cur.vals.size() > 1) {
    Eigen::Index n = cur.vals.size();
    Eigen::Index pairs = n / 2;
    std::vector<Eigen::Index> li, ri;
    for (Eigen::Index i = 0; i < pairs; ++i) {
      li.push_back(2 * i);
      ri.push_back(2 * i + 1);
    }
    SecretVector lv = gather(cur.vals, li), rv = gather(cur.vals, ri);
    SecretVector lx = gather(cur.idxs, li), rx = gather(cur.idxs, ri);
    SecretBit right_wins = secure_less_than(ctx, lv, rv);
    SecretBit bb = concat_raw(right_wins, right_wins);
    SecretVector picked = oblivious_select(ctx, bb, concat_raw(rv, rx),
                                           concat_raw(lv, lx));
    RankedVec nxt;
    nxt.vals = segment(picked, 0, pairs);
    nxt.idxs = segment(picked, pairs, pairs);
    nxt.idxs.frac_bits = 0;
    if (n % 2 == 1) {
      std::vector<Eigen::Index> last = {n - 1};
      nxt.vals = concat(nxt.vals, gather(cur.vals, last));
      nxt.idxs = concat(nxt.idxs, gather(cur.idxs, last));
    }
    cur = std::move(nxt);
    (void)ring;
  }
  return cur;
}

}  // namespace

TopKResult secure_topk(PartyContext& ctx, const SecretVector& scores, int k) {
  const Ring& ring = ctx.ring();
  Eigen::Index n = scores.size();
  if (k < 1 || static_cast<Eigen::Index>(k) > n)
    throw RangeError("top-k count out of range");

  RingVec positions(n);
  for (Eigen::Index i = 0; i < n; ++i) positions[i] = static_cast<u64>(i);
  SecretVector pos_shared = public_sharing(ctx.me(), positions, 0);

  // Below every legal score, above the signed minimum so comparison
  // differences stay in range.
  u64 sentinel = ring.from_signed(-(i64{1} << (ring.ell() - 2)) + 1);
  SecretVector sentinel_vec = public_sharing(
      ctx.me(), RingVec::Constant(n, sentinel), scores.frac_bits);

  TopKResult out;
  out.indices.owner = ctx.me();
  out.indices.frac_bits = 0;
  out.values.owner = ctx.me();
  out.values.frac_bits = scores.frac_bits;
  out.indices.first.resize(k);
  out.indices.second.resize(k);
  out.values.first.resize(k);
  out.values.second.resize(k);

  SecretVector cur = scores;
  for (int pass = 0; pass < k; ++pass) {
    RankedVec winner = argmax_tournament(ctx, RankedVec{cur, pos_shared});
    out.indices.first[pass] = winner.idxs.first[0];
    out.indices.second[pass] = winner.idxs.second[0];
    out.values.first[pass] = winner.vals.first[0];
    out.values.second[pass] = winner.vals.second[0];
    if (pass + 1 == k) break;

    // Mask the winner with the sentinel before the next pass.
    SecretVector widx;
    widx.owner = ctx.me();
    widx.frac_bits = 0;
    widx.first = RingVec::Constant(n, winner.idxs.first[0]);
    widx.second = RingVec::Constant(n, winner.idxs.second[0]);
    SecretVector diff = sub(ring, pos_shared, widx);
    SecretBit onehot = secure_eqz(ctx, diff);
    cur = oblivious_select(ctx, onehot, sentinel_vec, cur);
  }
  return out;
}

// --- debug helpers ---------------------------------------------------------------

void debug_verify_replication(PartyContext& ctx, const SecretVector& x) {
  // second(p) must equal first(next(p)): everyone ships `first` to prev.
  ctx.send_elems(prev(ctx.me()), x.first);
  RingVec from_next = ctx.recv_elems(next(ctx.me()));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (from_next[i] != x.second[i])
      throw ConsistencyError("replication consistency violated");
}

void debug_verify_counters(PartyContext& ctx) {
  auto c = ctx.zctx().counters();
  RingVec mine(4);
  for (int i = 0; i < 4; ++i) mine[i] = c[i];
  ctx.send_elems(next(ctx.me()), mine);
  ctx.send_elems(prev(ctx.me()), mine);
  RingVec a = ctx.recv_elems(next(ctx.me()));
  RingVec b = ctx.recv_elems(prev(ctx.me()));
  for (int i = 0; i < 4; ++i)
    if (a[i] != mine[i] || b[i] != mine[i])
      throw DesyncError("correlated randomness counters diverged");
}

}  // namespace privmark

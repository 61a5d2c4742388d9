#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "privmark/errors.hpp"

namespace privmark {

using u64 = std::uint64_t;
using i64 = std::int64_t;

// Dense ring tensors. Wrapping arithmetic on unsigned types is well defined,
// so Eigen expressions over these are valid mod-2^64 math; narrower rings
// mask after the fact.
using RingVec = Eigen::Array<u64, Eigen::Dynamic, 1>;
using RingMat = Eigen::Matrix<u64, Eigen::Dynamic, Eigen::Dynamic>;
using RealVec = Eigen::VectorXd;
using RealMat = Eigen::MatrixXd;

// Z_{2^ell} with a fixed-point convention of `frac_bits` fractional bits.
// ell and frac_bits are chosen at session construction and never change
// within a session. Signed interpretation is two's complement over ell bits;
// comparison and MSB extraction depend on that.
class Ring {
 public:
  Ring() : Ring(64, 18) {}

  Ring(int ell, int frac_bits) : ell_(ell), frac_bits_(frac_bits) {
    if (ell != 16 && ell != 32 && ell != 64)
      throw RangeError("ring width must be 16, 32 or 64 bits");
    if (frac_bits < 0 || frac_bits >= ell - 2)
      throw RangeError("frac_bits out of range for ring width");
    mask_ = (ell == 64) ? ~u64{0} : ((u64{1} << ell) - 1);
  }

  int ell() const { return ell_; }
  int frac_bits() const { return frac_bits_; }
  u64 mask() const { return mask_; }
  int element_bytes() const { return ell_ / 8; }

  u64 reduce(u64 x) const { return x & mask_; }
  u64 add(u64 a, u64 b) const { return (a + b) & mask_; }
  u64 sub(u64 a, u64 b) const { return (a - b) & mask_; }
  u64 mul(u64 a, u64 b) const { return (a * b) & mask_; }
  u64 neg(u64 a) const { return (~a + 1) & mask_; }

  // Two's complement read-back of a reduced element.
  i64 signed_of(u64 x) const {
    x &= mask_;
    if (ell_ == 64) return static_cast<i64>(x);
    u64 sign_bit = u64{1} << (ell_ - 1);
    if (x & sign_bit) return static_cast<i64>(x) - static_cast<i64>(u64{1} << ell_);
    return static_cast<i64>(x);
  }

  u64 from_signed(i64 v) const { return static_cast<u64>(v) & mask_; }

  bool msb(u64 x) const { return (x >> (ell_ - 1)) & 1; }

  // Arithmetic right shift in two's complement, result reduced again.
  u64 shift_signed(u64 x, int bits) const {
    return from_signed(signed_of(x) >> bits);
  }

  // Fixed-point encode at an explicit scale. Rounds to nearest with ties
  // toward zero so every party and the plaintext oracle agree bit for bit.
  u64 encode_at(double r, int f) const {
    double limit = std::ldexp(1.0, ell_ - 1 - f);
    if (!(std::fabs(r) < limit))
      throw RangeError("fixed-point encode out of range");
    double s = std::ldexp(r, f);
    double fl = std::floor(s);
    double frac = s - fl;
    double rounded;
    if (frac > 0.5)
      rounded = fl + 1.0;
    else if (frac < 0.5)
      rounded = fl;
    else
      rounded = (s >= 0.0) ? fl : fl + 1.0;
    return from_signed(static_cast<i64>(rounded));
  }

  double decode_at(u64 raw, int f) const {
    return std::ldexp(static_cast<double>(signed_of(raw)), -f);
  }

  u64 encode(double r) const { return encode_at(r, frac_bits_); }
  double decode(u64 raw) const { return decode_at(raw, frac_bits_); }

  RingVec reduce(RingVec v) const {
    if (ell_ != 64) {
      u64 m = mask_;
      v = v.unaryExpr([m](u64 x) { return x & m; });
    }
    return v;
  }

  RingVec encode_vec(const RealVec& r, int f) const {
    RingVec out(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) out[i] = encode_at(r[i], f);
    return out;
  }

  RealVec decode_vec(const RingVec& v, int f) const {
    RealVec out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = decode_at(v[i], f);
    return out;
  }

  bool operator==(const Ring& o) const {
    return ell_ == o.ell_ && frac_bits_ == o.frac_bits_;
  }

 private:
  int ell_;
  int frac_bits_;
  u64 mask_;
};

// Bitwise helpers for packed-word vectors (Eigen integer arrays have no
// native bit operators).
inline RingVec vxor(const RingVec& a, const RingVec& b) {
  return a.binaryExpr(b, [](u64 x, u64 y) { return x ^ y; });
}
inline RingVec vand(const RingVec& a, const RingVec& b) {
  return a.binaryExpr(b, [](u64 x, u64 y) { return x & y; });
}
inline RingVec vand_const(const RingVec& a, u64 m) {
  return a.unaryExpr([m](u64 x) { return x & m; });
}
inline RingVec vshl(const RingVec& a, int k, u64 mask) {
  return a.unaryExpr([k, mask](u64 x) { return (x << k) & mask; });
}
inline RingVec vshr(const RingVec& a, int k) {
  return a.unaryExpr([k](u64 x) { return x >> k; });
}

// A single fixed-point scalar: a reduced ring element plus its scale.
struct FixedPointValue {
  u64 raw = 0;
  int frac_bits = 0;
};

inline FixedPointValue encode_fixed(const Ring& ring, double r, int f) {
  return FixedPointValue{ring.encode_at(r, f), f};
}

inline double decode_fixed(const Ring& ring, const FixedPointValue& v) {
  return ring.decode_at(v.raw, v.frac_bits);
}

}  // namespace privmark

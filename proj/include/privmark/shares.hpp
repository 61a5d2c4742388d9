#pragma once

#include <array>
#include <optional>
#include <random>

#include "privmark/party.hpp"
#include "privmark/ring.hpp"

namespace privmark {

// One party's view of one secret: the pair (x_p, x_{next(p)}) of the
// additive decomposition x = x_0 + x_1 + x_2 mod 2^ell. Slot s is held by
// parties {P_s, P_prev(s)}; replication consistency means second(p) equals
// first(next(p)).
struct ReplicatedShare {
  u64 first = 0;
  u64 second = 0;
  PartyId owner = PartyId::P1;
};

// Element-wise replicated sharings with shape metadata. frac_bits is the
// fixed-point scale of the reconstructed values; scale 0 means plain ring
// integers.
struct SecretVector {
  RingVec first;
  RingVec second;
  PartyId owner = PartyId::P1;
  int frac_bits = 0;

  Eigen::Index size() const { return first.size(); }
};

struct SecretMatrix {
  RingMat first;
  RingMat second;
  PartyId owner = PartyId::P1;
  int frac_bits = 0;

  Eigen::Index rows() const { return first.rows(); }
  Eigen::Index cols() const { return first.cols(); }

  SecretVector row(Eigen::Index i) const {
    SecretVector v;
    v.first = first.row(i).transpose().array();
    v.second = second.row(i).transpose().array();
    v.owner = owner;
    v.frac_bits = frac_bits;
    return v;
  }
};

// Dealer-side sharing with explicit randomness: x0, x1 uniform, x2 forced.
// Used by host code and tests; in-protocol dealing goes through the
// PRF-compressed path in secure_ops.
template <typename Rng>
std::array<ReplicatedShare, 3> share(const Ring& ring, u64 secret, Rng& rng) {
  std::array<u64, 3> comp;
  comp[0] = ring.reduce(rng());
  comp[1] = ring.reduce(rng());
  comp[2] = ring.sub(ring.sub(ring.reduce(secret), comp[0]), comp[1]);
  std::array<ReplicatedShare, 3> out;
  for (int p = 0; p < 3; ++p) {
    out[p].owner = party_from_index(p);
    out[p].first = comp[p];
    out[p].second = comp[(p + 1) % 3];
  }
  return out;
}

// Reconstruct from any >=2 party views. Overlapping replicated components
// must agree; a mismatch is a consistency failure, not a best-effort merge.
inline u64 reconstruct(const Ring& ring,
                       const std::vector<ReplicatedShare>& views) {
  if (views.size() < 2) throw ConsistencyError("need shares from >=2 parties");
  std::array<std::optional<u64>, 3> comp;
  for (const auto& v : views) {
    int p = index_of(v.owner);
    int slots[2] = {p, (p + 1) % 3};
    u64 vals[2] = {v.first, v.second};
    for (int i = 0; i < 2; ++i) {
      if (comp[slots[i]].has_value() && *comp[slots[i]] != vals[i])
        throw ConsistencyError("replicated components disagree");
      comp[slots[i]] = vals[i];
    }
  }
  for (const auto& c : comp)
    if (!c.has_value()) throw ConsistencyError("missing share component");
  return ring.add(ring.add(*comp[0], *comp[1]), *comp[2]);
}

inline u64 reconstruct(const Ring& ring,
                       const std::array<ReplicatedShare, 3>& views) {
  return reconstruct(ring, std::vector<ReplicatedShare>(views.begin(), views.end()));
}

// Host-side reconstruction of a full vector from all three party views.
inline RingVec reconstruct_vec(const Ring& ring,
                               const std::array<SecretVector, 3>& views) {
  Eigen::Index n = views[0].size();
  for (const auto& v : views)
    if (v.size() != n) throw ShapeError("share vector sizes disagree");
  RingVec out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<ReplicatedShare> elem;
    elem.reserve(3);
    for (int p = 0; p < 3; ++p)
      elem.push_back(ReplicatedShare{views[p].first[i], views[p].second[i],
                                     party_from_index(p)});
    out[i] = reconstruct(ring, elem);
  }
  return out;
}

inline RingMat reconstruct_mat(const Ring& ring,
                               const std::array<SecretMatrix, 3>& views) {
  Eigen::Index r = views[0].rows(), c = views[0].cols();
  RingMat out(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    std::array<SecretVector, 3> rows;
    for (int p = 0; p < 3; ++p) rows[p] = views[p].row(i);
    out.row(i) = reconstruct_vec(ring, rows).matrix().transpose();
  }
  return out;
}

}  // namespace privmark

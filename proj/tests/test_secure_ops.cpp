#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "privmark/secure_ops.hpp"

using namespace privmark;

namespace {

SessionParams mk_params(u64 seed, int ell = 64, int f = 18) {
  SessionParams p;
  p.ring = Ring(ell, f);
  p.session_id = 0x5e55;
  p.seed = seed;
  return p;
}

// Runs a program that returns each party's share vector and reconstructs.
RingVec run_and_reconstruct(
    const SessionParams& params,
    const std::function<SecretVector(PartyContext&)>& program,
    SessionStats* stats_out = nullptr) {
  auto res = run_session_typed(params, NetworkProfile::unshaped(), program);
  if (stats_out) *stats_out = res.stats;
  return reconstruct_vec(params.ring,
                         {res.outputs[0], res.outputs[1], res.outputs[2]});
}

RingVec encode_vec(const Ring& ring, const std::vector<double>& xs, int f) {
  RingVec out(static_cast<Eigen::Index>(xs.size()));
  for (size_t i = 0; i < xs.size(); ++i) out[i] = ring.encode_at(xs[i], f);
  return out;
}

// Plaintext top-k oracle on fixed-point decoded scores: sort by value
// descending, ties toward the smaller index.
std::vector<int> topk_oracle(const Ring& ring, const RingVec& raw, int k) {
  std::vector<int> idx(raw.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return ring.signed_of(raw[a]) > ring.signed_of(raw[b]);
  });
  idx.resize(k);
  return idx;
}

}  // namespace

TEST_CASE("dealing distributes a valid replicated sharing from any dealer") {
  for (int d = 0; d < 3; ++d) {
    PartyId dealer = party_from_index(d);
    SessionParams params = mk_params(10 + d);
    RingVec plain(5);
    for (int i = 0; i < 5; ++i) plain[i] = 1000 * d + i;
    auto got = run_and_reconstruct(params, [&](PartyContext& ctx) {
      PhaseScope scope(ctx, "Deal");
      RingVec mine = (ctx.me() == dealer) ? plain : RingVec();
      SecretVector x = deal_vector(ctx, dealer, 5, mine, 0);
      debug_verify_replication(ctx, x);
      return x;
    });
    CHECK((got == plain).all());
  }
}

TEST_CASE("local linear ops cost zero communication") {
  SessionParams params = mk_params(20);
  SessionStats stats;
  auto got = run_and_reconstruct(
      params,
      [&](PartyContext& ctx) {
        SecretVector a = deal_vector(ctx, PartyId::P1, 2,
                                     encode_vec(ctx.ring(), {1, 2}, 0), 0);
        SecretVector b = deal_vector(ctx, PartyId::P2, 2,
                                     encode_vec(ctx.ring(), {3, 4}, 0), 0);
        PhaseScope scope(ctx, "Local");
        SecretVector s = add(ctx.ring(), a, b);
        s = scalar_mul(ctx.ring(), 3, s);
        s = sub(ctx.ring(), s, b);
        return s;  // 3*(a+b) - b = [9, 14]
      },
      &stats);
  CHECK(got[0] == 9);
  CHECK(got[1] == 14);
  CHECK(stats.phase_total("Local").bytes == 0);
  CHECK(stats.phase_total("Local").messages == 0);
}

TEST_CASE("secure_mul reconstructs products; 3n elements, one round") {
  SessionParams params = mk_params(21);
  SessionStats stats;
  std::mt19937_64 rng(77);
  Eigen::Index n = 100;
  RingVec xs(n), ys(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    xs[i] = rng();
    ys[i] = rng();
  }
  auto got = run_and_reconstruct(
      params,
      [&](PartyContext& ctx) {
        SecretVector x = deal_vector(ctx, PartyId::P1, xs.size(), xs, 0);
        SecretVector y = deal_vector(ctx, PartyId::P2, ys.size(), ys, 0);
        PhaseScope scope(ctx, "Mul");
        return secure_mul(ctx, x, y);
      },
      &stats);
  for (Eigen::Index i = 0; i < n; ++i)
    CHECK(got[i] == params.ring.mul(xs[i], ys[i]));
  auto mul_stats = stats.phase_total("Mul");
  CHECK(mul_stats.bytes == static_cast<u64>(24 * n));
  CHECK(mul_stats.messages == 3);
  CHECK(stats.max_rounds("Mul") == 1);
}

TEST_CASE("scalar secure_mul: three messages of eight bytes, one round") {
  SessionParams params = mk_params(22);
  SessionStats stats;
  auto got = run_and_reconstruct(
      params,
      [&](PartyContext& ctx) {
        RingVec three(1), four(1);
        three[0] = 3;
        four[0] = 4;
        SecretVector x = deal_vector(ctx, PartyId::P1, 1, three, 0);
        SecretVector y = deal_vector(ctx, PartyId::P1, 1, four, 0);
        PhaseScope scope(ctx, "Mul1");
        return secure_mul(ctx, x, y);
      },
      &stats);
  CHECK(got[0] == 12);
  auto st = stats.phase_total("Mul1");
  CHECK(st.messages == 3);
  CHECK(st.bytes == 24);
  CHECK(stats.max_rounds("Mul1") == 1);
}

TEST_CASE("multiplying by a zero sharing gives zero") {
  SessionParams params = mk_params(23);
  std::mt19937_64 rng(5);
  RingVec xs(8);
  for (int i = 0; i < 8; ++i) xs[i] = rng();
  auto got = run_and_reconstruct(params, [&](PartyContext& ctx) {
    SecretVector x = deal_vector(ctx, PartyId::P1, xs.size(), xs, 0);
    SecretVector z = deal_vector(ctx, PartyId::P2, 8, RingVec::Zero(8), 0);
    return secure_mul(ctx, x, z);
  });
  CHECK((got == 0).all());
}

TEST_CASE("k sequential multiplications cost k rounds") {
  SessionParams params = mk_params(24);
  SessionStats stats;
  auto got = run_and_reconstruct(
      params,
      [&](PartyContext& ctx) {
        RingVec two(1);
        two[0] = 2;
        SecretVector x = deal_vector(ctx, PartyId::P1, 1, two, 0);
        PhaseScope scope(ctx, "Chain");
        SecretVector acc = x;
        for (int i = 0; i < 5; ++i) acc = secure_mul(ctx, acc, x);
        return acc;
      },
      &stats);
  CHECK(got[0] == 64);  // 2^6
  CHECK(stats.max_rounds("Chain") == 5);
}

TEST_CASE("reveal_to delivers plaintext to the target only, 16n bytes") {
  SessionParams params = mk_params(25);
  std::mt19937_64 rng(6);
  RingVec xs(7);
  for (int i = 0; i < 7; ++i) xs[i] = rng();
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretVector x = deal_vector(ctx, PartyId::P2, xs.size(), xs, 0);
        PhaseScope scope(ctx, "Reveal");
        return reveal_to(ctx, x, PartyId::P1);
      });
  CHECK((res.outputs[0] == xs).all());
  CHECK(res.outputs[1].size() == 0);
  CHECK(res.outputs[2].size() == 0);
  auto st = res.stats.phase_total("Reveal");
  CHECK(st.bytes == static_cast<u64>(16 * 7));
  CHECK(st.messages == 2);
}

TEST_CASE("reveal of an empty vector moves no payload bytes") {
  SessionParams params = mk_params(26);
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretVector x = deal_vector(ctx, PartyId::P1, 0, RingVec(), 0);
        PhaseScope scope(ctx, "Reveal0");
        return reveal_to(ctx, x, PartyId::P1);
      });
  CHECK(res.outputs[0].size() == 0);
  CHECK(res.stats.phase_total("Reveal0").bytes == 0);
}

TEST_CASE("fixed_mul truncates back to f with at most 2^-17 error") {
  SessionParams params = mk_params(27);
  const Ring& ring = params.ring;
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretVector x = deal_vector(ctx, PartyId::P1, 3,
                                     encode_vec(ctx.ring(), {1.5, -2.25, 7.0},
                                                18),
                                     18);
        SecretVector y = deal_vector(ctx, PartyId::P2, 3,
                                     encode_vec(ctx.ring(), {2.0, 3.0, 1.0},
                                                18),
                                     18);
        return fixed_mul(ctx, x, y);
      });
  RingVec raw = reconstruct_vec(ring, {res.outputs[0], res.outputs[1],
                                       res.outputs[2]});
  double tol = std::ldexp(1.0, -17);
  CHECK(std::fabs(ring.decode(raw[0]) - 3.0) <= tol);
  CHECK(std::fabs(ring.decode(raw[1]) - (-6.75)) <= tol);
  CHECK(std::fabs(ring.decode(raw[2]) - 7.0) <= tol);
}

TEST_CASE("fixed_mul random pairs in +-32 stay within 2^-17") {
  SessionParams params = mk_params(28);
  const Ring& ring = params.ring;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-32.0, 32.0);
  const int n = 10000;
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = dist(rng);
    ys[i] = dist(rng);
  }
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretVector x =
            deal_vector(ctx, PartyId::P1, n, encode_vec(ctx.ring(), xs, 18), 18);
        SecretVector y =
            deal_vector(ctx, PartyId::P2, n, encode_vec(ctx.ring(), ys, 18), 18);
        return fixed_mul(ctx, x, y);
      });
  RingVec raw = reconstruct_vec(ring, {res.outputs[0], res.outputs[1],
                                       res.outputs[2]});
  double tol = std::ldexp(1.0, -17);
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    double want = ring.decode(ring.encode(xs[i])) * ring.decode(ring.encode(ys[i]));
    worst = std::max(worst, std::fabs(ring.decode(raw[i]) - want));
  }
  CHECK(worst <= tol);
}

TEST_CASE("secure_dot equals the float oracle on unit vectors") {
  SessionParams params = mk_params(29);
  const Ring& ring = params.ring;
  const int d = 64;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> gauss;
  std::vector<double> a(d), b(d);
  double na = 0, nb = 0;
  for (int i = 0; i < d; ++i) {
    a[i] = gauss(rng);
    b[i] = gauss(rng);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  for (int i = 0; i < d; ++i) {
    a[i] /= std::sqrt(na);
    b[i] /= std::sqrt(nb);
  }
  SessionStats stats;
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretVector x =
            deal_vector(ctx, PartyId::P1, d, encode_vec(ctx.ring(), a, 18), 18);
        SecretVector y =
            deal_vector(ctx, PartyId::P2, d, encode_vec(ctx.ring(), b, 18), 18);
        PhaseScope scope(ctx, "Dot");
        return secure_dot(ctx, x, y);
      });
  RingVec raw = reconstruct_vec(ring, {res.outputs[0], res.outputs[1],
                                       res.outputs[2]});
  double got = ring.decode_at(raw[0], 36);  // dot of two f=18 vectors
  double want = 0;
  for (int i = 0; i < d; ++i) want += a[i] * b[i];
  CHECK(std::fabs(got - want) <= 1e-4);
  CHECK(res.stats.phase_total("Dot").bytes == 24);
  CHECK(res.stats.max_rounds("Dot") == 1);
}

TEST_CASE("self-dot of a unit vector is 1, orthogonal dot is 0") {
  SessionParams params = mk_params(30);
  const Ring& ring = params.ring;
  std::vector<double> e1(8, 0.0), e2(8, 0.0);
  e1[0] = 1.0;
  e2[1] = 1.0;
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretVector x =
            deal_vector(ctx, PartyId::P1, 8, encode_vec(ctx.ring(), e1, 18), 18);
        SecretVector y =
            deal_vector(ctx, PartyId::P2, 8, encode_vec(ctx.ring(), e2, 18), 18);
        SecretVector self = secure_dot(ctx, x, x);
        SecretVector orth = secure_dot(ctx, x, y);
        return concat(self, orth);
      });
  RingVec raw = reconstruct_vec(ring, {res.outputs[0], res.outputs[1],
                                       res.outputs[2]});
  double tol = std::ldexp(1.0, -18);
  CHECK(std::fabs(ring.decode_at(raw[0], 36) - 1.0) <= tol);
  CHECK(std::fabs(ring.decode_at(raw[1], 36) - 0.0) <= tol);
}

TEST_CASE("secure_matmul matches the float oracle; 3M elements, one round") {
  SessionParams params = mk_params(31);
  const Ring& ring = params.ring;
  const int M = 100, d = 64;
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss;
  RealMat A(M, d);
  RealVec x(d);
  for (int i = 0; i < M; ++i) {
    double norm = 0;
    for (int j = 0; j < d; ++j) {
      A(i, j) = gauss(rng);
      norm += A(i, j) * A(i, j);
    }
    A.row(i) /= std::sqrt(norm);
  }
  double nx = 0;
  for (int j = 0; j < d; ++j) {
    x[j] = gauss(rng);
    nx += x[j] * x[j];
  }
  x /= std::sqrt(nx);

  RingMat Araw(M, d);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < d; ++j) Araw(i, j) = ring.encode(A(i, j));
  RingVec xraw(d);
  for (int j = 0; j < d; ++j) xraw[j] = ring.encode(x[j]);

  SessionStats stats;
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretMatrix As = deal_matrix(ctx, PartyId::P2, M, d, Araw, 18);
        SecretVector xs = deal_vector(ctx, PartyId::P1, d, xraw, 18);
        PhaseScope scope(ctx, "Matmul");
        return secure_matvec(ctx, As, xs);
      });
  RingVec raw = reconstruct_vec(ring, {res.outputs[0], res.outputs[1],
                                       res.outputs[2]});
  RealVec want = A * x;
  for (int i = 0; i < M; ++i)
    CHECK(std::fabs(ring.decode_at(raw[i], 36) - want[i]) <= 1e-4);
  auto st = res.stats.phase_total("Matmul");
  CHECK(st.bytes == static_cast<u64>(24 * M));
  CHECK(res.stats.max_rounds("Matmul") == 1);
}

TEST_CASE("identity matmul returns its input") {
  SessionParams params = mk_params(32);
  const Ring& ring = params.ring;
  const int d = 6;
  RingMat I = RingMat::Zero(d, d);
  for (int i = 0; i < d; ++i) I(i, i) = ring.encode(1.0);
  std::vector<double> xs = {0.5, -0.25, 0.125, 0.75, -0.5, 0.0625};
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretMatrix Is = deal_matrix(ctx, PartyId::P2, d, d, I, 18);
        SecretVector v =
            deal_vector(ctx, PartyId::P1, d, encode_vec(ctx.ring(), xs, 18), 18);
        return secure_matvec(ctx, Is, v);
      });
  RingVec raw = reconstruct_vec(ring, {res.outputs[0], res.outputs[1],
                                       res.outputs[2]});
  for (int i = 0; i < d; ++i)
    CHECK(std::fabs(ring.decode_at(raw[i], 36) - xs[i]) <=
          std::ldexp(1.0, -18));
}

TEST_CASE("secure_less_than basic semantics") {
  SessionParams params = mk_params(33);
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretVector x = deal_vector(
            ctx, PartyId::P1, 4,
            encode_vec(ctx.ring(), {1.0, 2.0, -3.0, 5.0}, 18), 18);
        SecretVector y = deal_vector(
            ctx, PartyId::P2, 4,
            encode_vec(ctx.ring(), {2.0, 2.0, -2.0, -5.0}, 18), 18);
        return secure_less_than(ctx, x, y);
      });
  RingVec raw = reconstruct_vec(params.ring, {res.outputs[0], res.outputs[1],
                                              res.outputs[2]});
  CHECK(raw[0] == 1);  // 1 < 2
  CHECK(raw[1] == 0);  // strictness
  CHECK(raw[2] == 1);  // -3 < -2
  CHECK(raw[3] == 0);
}

TEST_CASE("comparison exhaustive at reduced ring width 16") {
  SessionParams params = mk_params(34, 16, 4);
  const Ring& ring = params.ring;
  const Eigen::Index n = 1 << 16;
  RingVec all(n);
  for (Eigen::Index i = 0; i < n; ++i) all[i] = static_cast<u64>(i);
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretVector d = deal_vector(ctx, PartyId::P1, n, all, 0);
        SecretVector zero;
        zero.owner = ctx.me();
        zero.frac_bits = 0;
        zero.first = RingVec::Zero(n);
        zero.second = RingVec::Zero(n);
        // less_than(d, 0) = MSB(d): sign of every possible difference
        return secure_less_than(ctx, d, zero);
      });
  RingVec raw = reconstruct_vec(ring, {res.outputs[0], res.outputs[1],
                                       res.outputs[2]});
  for (Eigen::Index i = 0; i < n; ++i) {
    u64 want = (ring.signed_of(static_cast<u64>(i)) < 0) ? 1 : 0;
    REQUIRE(raw[i] == want);
  }
}

TEST_CASE("secure_eqz flags exactly the zeros") {
  SessionParams params = mk_params(35);
  RingVec xs(5);
  xs << 0, 1, (~u64{0}), 0, 123456789;
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretVector x = deal_vector(ctx, PartyId::P1, xs.size(), xs, 0);
        return secure_eqz(ctx, x);
      });
  RingVec raw = reconstruct_vec(params.ring, {res.outputs[0], res.outputs[1],
                                              res.outputs[2]});
  CHECK(raw[0] == 1);
  CHECK(raw[1] == 0);
  CHECK(raw[2] == 0);
  CHECK(raw[3] == 1);
  CHECK(raw[4] == 0);
}

TEST_CASE("oblivious_select picks x when b=1 and y when b=0") {
  SessionParams params = mk_params(36);
  std::mt19937_64 rng(17);
  const int trials = 1000;
  RingVec xs(trials), ys(trials), bs(trials);
  for (int i = 0; i < trials; ++i) {
    xs[i] = rng();
    ys[i] = rng();
    bs[i] = rng() & 1;
  }
  auto res = run_session_typed(
      params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
        SecretVector x = deal_vector(ctx, PartyId::P1, xs.size(), xs, 0);
        SecretVector y = deal_vector(ctx, PartyId::P2, ys.size(), ys, 0);
        SecretVector b = deal_vector(ctx, PartyId::P3, bs.size(), bs, 0);
        return oblivious_select(ctx, b, x, y);
      });
  RingVec raw = reconstruct_vec(params.ring, {res.outputs[0], res.outputs[1],
                                              res.outputs[2]});
  for (int i = 0; i < trials; ++i)
    CHECK(raw[i] == (bs[i] ? xs[i] : ys[i]));
}

TEST_CASE("top-k on a hand vector and the tie-break rule") {
  SessionParams params = mk_params(37);
  const Ring& ring = params.ring;
  auto run_topk = [&](const std::vector<double>& scores, int k) {
    auto res = run_session_typed(
        params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
          SecretVector s = deal_vector(
              ctx, PartyId::P1, static_cast<Eigen::Index>(scores.size()),
              encode_vec(ctx.ring(), scores, 18), 18);
          TopKResult r = secure_topk(ctx, s, k);
          return r.indices;
        });
    RingVec raw = reconstruct_vec(ring, {res.outputs[0], res.outputs[1],
                                         res.outputs[2]});
    std::vector<int> out;
    for (Eigen::Index i = 0; i < raw.size(); ++i)
      out.push_back(static_cast<int>(raw[i]));
    return out;
  };
  CHECK(run_topk({0.1, 0.9, 0.5}, 2) == std::vector<int>{1, 2});
  CHECK(run_topk({0.4, 0.4, 0.4, 0.4}, 2) == std::vector<int>{0, 1});
}

TEST_CASE("top-k matches the plaintext sort oracle on random vectors") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    SessionParams params = mk_params(1000 + trial);
    const Ring& ring = params.ring;
    int n = 4 + static_cast<int>(rng() % 61);
    int k = 1 + static_cast<int>(rng() % std::min(8, n));
    std::vector<double> scores(n);
    for (auto& s : scores) s = dist(rng);
    RingVec raw_scores = encode_vec(ring, scores, 18);
    auto res = run_session_typed(
        params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
          SecretVector s = deal_vector(ctx, PartyId::P1, raw_scores.size(), raw_scores, 18);
          return secure_topk(ctx, s, k).indices;
        });
    RingVec got = reconstruct_vec(ring, {res.outputs[0], res.outputs[1],
                                         res.outputs[2]});
    auto want = topk_oracle(ring, raw_scores, k);
    for (int i = 0; i < k; ++i)
      REQUIRE(static_cast<int>(got[i]) == want[i]);
  }
}

TEST_CASE("top-k is invariant under positive public scaling") {
  SessionParams params = mk_params(40);
  const Ring& ring = params.ring;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> scores(24);
  for (auto& s : scores) s = dist(rng);
  RingVec raw = encode_vec(ring, scores, 18);
  auto run_case = [&](u64 scale) {
    auto res = run_session_typed(
        params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
          SecretVector s = deal_vector(ctx, PartyId::P1, raw.size(), raw, 18);
          s = scalar_mul(ctx.ring(), scale, s);
          return secure_topk(ctx, s, 5).indices;
        });
    return reconstruct_vec(ring, {res.outputs[0], res.outputs[1],
                                  res.outputs[2]});
  };
  RingVec base = run_case(1);
  RingVec scaled = run_case(7);
  CHECK((base == scaled).all());
}

TEST_CASE("range errors on bad top-k counts") {
  SessionParams params = mk_params(41);
  auto run_bad = [&](int k) {
    run_session(params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
      SecretVector s = deal_vector(ctx, PartyId::P1, 2,
                                   encode_vec(params.ring, {0.1, 0.2}, 18), 18);
      secure_topk(ctx, s, k);
    });
  };
  CHECK_THROWS_AS(run_bad(3), RangeError);
  CHECK_THROWS_AS(run_bad(0), RangeError);
}

TEST_CASE("shape errors on mismatched operands") {
  SessionParams params = mk_params(42);
  CHECK_THROWS_AS(
      run_session(params, NetworkProfile::unshaped(),
                  [&](PartyContext& ctx) {
                    SecretVector a = deal_vector(ctx, PartyId::P1, 3,
                                                 RingVec::Zero(3), 0);
                    SecretVector b = deal_vector(ctx, PartyId::P2, 4,
                                                 RingVec::Zero(4), 0);
                    secure_mul(ctx, a, b);
                  }),
      ShapeError);
}

TEST_CASE("counter desync is detectable") {
  SessionParams params = mk_params(43);
  CHECK_THROWS_AS(
      run_session(params, NetworkProfile::unshaped(),
                  [&](PartyContext& ctx) {
                    if (ctx.me() == PartyId::P1)
                      ctx.zctx().bump_pair();  // P1 drifts
                    debug_verify_counters(ctx);
                  }),
      DesyncError);
}

TEST_CASE("counters stay synchronized through a mixed workload") {
  SessionParams params = mk_params(44);
  run_session(params, NetworkProfile::unshaped(), [&](PartyContext& ctx) {
    SecretVector a = deal_vector(ctx, PartyId::P1, 2,
                                 encode_vec(params.ring, {1.0, 2.0}, 18), 18);
    SecretVector b = deal_vector(ctx, PartyId::P2, 2,
                                 encode_vec(params.ring, {0.5, 0.25}, 18), 18);
    SecretVector m = fixed_mul(ctx, a, b);
    secure_less_than(ctx, m, a);
    debug_verify_counters(ctx);
    debug_verify_replication(ctx, m);
  });
}

#pragma once

#include <chrono>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "privmark/comm_stats.hpp"
#include "privmark/frame.hpp"
#include "privmark/prf.hpp"
#include "privmark/ring.hpp"
#include "privmark/shares.hpp"
#include "privmark/transport.hpp"

namespace privmark {

struct SessionParams {
  Ring ring;
  u64 session_id = 0;
  u64 seed = 1;
  std::chrono::milliseconds recv_timeout{60000};
  bool record_transcript = false;
};

// One record of a sent frame, kept when transcript recording is on. Tests
// use these for determinism hashes and share-marginal statistics.
struct SentFrame {
  std::string phase;
  PartyId from;
  PartyId to;
  std::vector<std::uint8_t> frame_bytes;  // full encoded frame
  std::vector<std::uint8_t> payload;
  // Public protocol metadata (shapes, counts, seeds) rather than share
  // components; the share-marginal statistics skip these.
  bool public_payload = false;
};

// The per-party protocol execution environment: framed channels to both
// neighbors, correlated randomness, communication accounting and the phase
// stack. One protocol program runs on one context at a time.
class PartyContext {
 public:
  PartyContext(PartyId me, SessionParams params, PartyChannels channels);

  // Pairwise PRF key establishment; every party must call it first thing,
  // in lockstep. Keys travel in the clear over the configured transport,
  // which is acceptable against honest-but-curious parties; deployments
  // wanting wire privacy need authenticated encrypted channels underneath.
  void setup();

  PartyId me() const { return me_; }
  const Ring& ring() const { return params_.ring; }
  u64 session_id() const { return params_.session_id; }
  u64 session_seed() const { return params_.seed; }
  ZeroShareContext& zctx() { return zctx_; }
  std::mt19937_64& host_rng() { return host_rng_; }
  CommStats& stats() { return stats_; }
  const CommStats& stats() const { return stats_; }

  void push_phase(const std::string& name);
  void pop_phase();
  const std::string& phase() const { return phase_stack_.back(); }

  void send_elems(PartyId to, const RingVec& elems,
                  bool public_metadata = false);
  RingVec recv_elems(PartyId from);

  // Raw byte payloads (control messages); padded with '\n' to the element
  // width so the frame invariant holds.
  void send_raw(PartyId to, std::span<const std::uint8_t> bytes);
  std::vector<std::uint8_t> recv_raw(PartyId from);

  const std::vector<SentFrame>& transcript() const { return transcript_; }

 private:
  Transport* out_channel(PartyId to);
  Transport* in_channel(PartyId from);
  std::uint16_t phase_tag();

  void send_frame(PartyId to, std::vector<std::uint8_t> payload,
                  bool public_metadata);
  std::vector<std::uint8_t> recv_frame(PartyId from);

  PartyId me_;
  SessionParams params_;
  PartyChannels channels_;
  ZeroShareContext zctx_;
  std::mt19937_64 host_rng_;
  CommStats stats_;
  std::vector<std::string> phase_stack_{"Setup"};
  std::vector<std::chrono::steady_clock::time_point> phase_started_;
  std::vector<std::string> phase_names_;
  u64 send_seq_[3] = {0, 0, 0};  // by destination party index
  u64 recv_seq_[3] = {0, 0, 0};  // by source party index
  std::vector<SentFrame> transcript_;
};

// Scoped phase label.
class PhaseScope {
 public:
  PhaseScope(PartyContext& ctx, const std::string& name) : ctx_(ctx) {
    ctx_.push_phase(name);
  }
  ~PhaseScope() { ctx_.pop_phase(); }

 private:
  PartyContext& ctx_;
};

// Runs the same program at all three parties over an in-memory hub and
// collects outputs plus per-party stats. Any party's exception is rethrown
// after all threads have stopped.
struct SessionResult {
  SessionStats stats;
  std::array<std::vector<SentFrame>, 3> transcripts;
};

SessionResult run_session(
    const SessionParams& params, NetworkProfile profile,
    const std::function<void(PartyContext&)>& program);

// Typed variant for programs that return a value per party.
template <typename T>
struct TypedSessionResult {
  std::array<T, 3> outputs;
  SessionStats stats;
  std::array<std::vector<SentFrame>, 3> transcripts;
};

template <typename F>
auto run_session_typed(const SessionParams& params, NetworkProfile profile,
                       F&& program)
    -> TypedSessionResult<std::invoke_result_t<F&, PartyContext&>> {
  using T = std::invoke_result_t<F&, PartyContext&>;
  std::array<std::optional<T>, 3> outs;
  auto res = run_session(params, profile, [&](PartyContext& ctx) {
    outs[index_of(ctx.me())].emplace(program(ctx));
  });
  TypedSessionResult<T> tr{{std::move(*outs[0]), std::move(*outs[1]),
                            std::move(*outs[2])},
                           std::move(res.stats),
                           std::move(res.transcripts)};
  return tr;
}

}  // namespace privmark

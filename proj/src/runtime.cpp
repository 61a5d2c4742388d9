#include "privmark/runtime.hpp"

#include <algorithm>
#include <thread>

namespace privmark {

PartyContext::PartyContext(PartyId me, SessionParams params,
                           PartyChannels channels)
    : me_(me), params_(params), channels_(channels) {
  host_rng_.seed(params_.seed + 0x9e3779b97f4a7c15ULL * (index_of(me) + 1));
  phase_names_.push_back("Setup");
}

void PartyContext::setup() {
  // Party p samples the key of the pair (p, next(p)) -- that is, slot
  // next(p) -- and passes it to next(p). It receives slot p's key from
  // prev(p).
  PrfKey mine{host_rng_(), host_rng_()};
  RingVec key_elems(2);
  // Keys are 128 bits regardless of ring width; ship as raw bytes.
  std::vector<std::uint8_t> key_bytes(16);
  for (int i = 0; i < 8; ++i) {
    key_bytes[i] = static_cast<std::uint8_t>((mine.k0 >> (8 * i)) & 0xff);
    key_bytes[8 + i] = static_cast<std::uint8_t>((mine.k1 >> (8 * i)) & 0xff);
  }
  send_raw(next(me_), key_bytes);
  auto got = recv_raw(prev(me_));
  if (got.size() < 16) throw ConsistencyError("short key exchange message");
  PrfKey theirs{};
  for (int i = 0; i < 8; ++i) {
    theirs.k0 |= static_cast<u64>(got[i]) << (8 * i);
    theirs.k1 |= static_cast<u64>(got[8 + i]) << (8 * i);
  }
  zctx_ = ZeroShareContext(me_, theirs, mine);
}

void PartyContext::push_phase(const std::string& name) {
  phase_stack_.push_back(name);
  phase_started_.push_back(std::chrono::steady_clock::now());
  if (std::find(phase_names_.begin(), phase_names_.end(), name) ==
      phase_names_.end())
    phase_names_.push_back(name);
}

void PartyContext::pop_phase() {
  if (phase_stack_.size() <= 1) throw ConsistencyError("phase stack underflow");
  auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          phase_started_.back());
  stats_.add_seconds(phase_stack_.back(), dt.count());
  phase_stack_.pop_back();
  phase_started_.pop_back();
}

std::uint16_t PartyContext::phase_tag() {
  auto it = std::find(phase_names_.begin(), phase_names_.end(), phase());
  return static_cast<std::uint16_t>(it - phase_names_.begin());
}

Transport* PartyContext::out_channel(PartyId to) {
  if (to == next(me_)) return channels_.to_next;
  if (to == prev(me_)) return channels_.to_prev;
  throw TransportError("no channel to self");
}

Transport* PartyContext::in_channel(PartyId from) {
  if (from == next(me_)) return channels_.from_next;
  if (from == prev(me_)) return channels_.from_prev;
  throw TransportError("no channel from self");
}

void PartyContext::send_frame(PartyId to, std::vector<std::uint8_t> payload,
                              bool public_metadata) {
  Frame f;
  f.session = params_.session_id;
  f.phase = phase_tag();
  f.sequence = ++send_seq_[index_of(to)];
  f.payload = std::move(payload);
  auto bytes = encode_frame(f);
  stats_.on_send(phase(), f.payload.size());
  if (params_.record_transcript)
    transcript_.push_back(
        SentFrame{phase(), me_, to, bytes, f.payload, public_metadata});
  out_channel(to)->send(bytes);
}

std::vector<std::uint8_t> PartyContext::recv_frame(PartyId from) {
  auto bytes = in_channel(from)->recv(params_.recv_timeout);
  Frame f = decode_frame(bytes);
  if (f.session != params_.session_id)
    throw DesyncError("frame from a different session");
  u64 expect = recv_seq_[index_of(from)] + 1;
  if (f.sequence != expect) throw DesyncError("frame sequence gap");
  recv_seq_[index_of(from)] = f.sequence;
  stats_.on_recv(phase());
  return std::move(f.payload);
}

void PartyContext::send_elems(PartyId to, const RingVec& elems,
                              bool public_metadata) {
  send_frame(to, elems_to_bytes(ring(), elems), public_metadata);
}

RingVec PartyContext::recv_elems(PartyId from) {
  return bytes_to_elems(ring(), recv_frame(from));
}

void PartyContext::send_raw(PartyId to, std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> payload(bytes.begin(), bytes.end());
  size_t w = static_cast<size_t>(ring().element_bytes());
  while (payload.size() % w != 0) payload.push_back('\n');
  send_frame(to, std::move(payload), /*public_metadata=*/true);
}

std::vector<std::uint8_t> PartyContext::recv_raw(PartyId from) {
  return recv_frame(from);
}

SessionResult run_session(
    const SessionParams& params, NetworkProfile profile,
    const std::function<void(PartyContext&)>& program) {
  InMemoryHub hub(profile);
  SessionResult result;
  std::array<std::exception_ptr, 3> errors{};
  std::vector<std::thread> threads;
  std::array<std::unique_ptr<PartyContext>, 3> ctxs;
  for (int p = 0; p < 3; ++p) {
    PartyId id = party_from_index(p);
    ctxs[p] = std::make_unique<PartyContext>(id, params, hub.channels_for(id));
  }
  for (int p = 0; p < 3; ++p) {
    threads.emplace_back([&, p]() {
      try {
        ctxs[p]->setup();
        program(*ctxs[p]);
      } catch (...) {
        errors[p] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (int p = 0; p < 3; ++p) {
    result.stats.per_party[p] = ctxs[p]->stats().phases();
    result.transcripts[p] = ctxs[p]->transcript();
  }
  return result;
}

}  // namespace privmark

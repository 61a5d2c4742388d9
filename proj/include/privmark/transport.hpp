#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "privmark/errors.hpp"
#include "privmark/net_profile.hpp"
#include "privmark/party.hpp"

namespace privmark {

// One direction of one ordered party pair. Message boundaries are preserved
// and delivery is FIFO per channel. recv blocks; a zero timeout means wait
// forever.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(std::span<const std::uint8_t> bytes) = 0;
  virtual std::vector<std::uint8_t> recv(std::chrono::milliseconds timeout) = 0;
};

// The four channel endpoints one party uses: sends toward both neighbors,
// receives from both.
struct PartyChannels {
  Transport* to_next = nullptr;
  Transport* to_prev = nullptr;
  Transport* from_next = nullptr;
  Transport* from_prev = nullptr;
};

// All six directed in-process channels, optionally shaped by a network
// profile: each message is serialized on its link (payload_bits/bandwidth)
// and then delayed by the one-way latency; FIFO order survives shaping.
class InMemoryHub {
 public:
  explicit InMemoryHub(NetworkProfile profile = NetworkProfile::unshaped(),
                       size_t queue_capacity = 1 << 16);
  ~InMemoryHub();

  PartyChannels channels_for(PartyId p);

  // Total queued-but-undelivered messages; used by shutdown assertions.
  size_t in_flight() const;

 private:
  class Queue;
  std::unique_ptr<Queue> queues_[3][3];  // [from][to], from != to
  NetworkProfile profile_;
};

}  // namespace privmark

#pragma once

#include <array>
#include <memory>
#include <string>

#include "privmark/ring.hpp"
#include "privmark/transport.hpp"

namespace privmark {

// Handshake parameters every connection validates. A mismatch anywhere is a
// configuration error: the engine refuses to run with inconsistent rings,
// scales or sessions.
struct HandshakeInfo {
  u64 session_id = 0;
  std::uint8_t ell = 64;
  std::uint8_t frac_bits = 18;
  u64 seed = 0;
};

// One long-lived TCP connection per ordered party pair (six total). The
// party binds its listen address first, then dials both peers; connect
// retries until the deadline so start order does not matter. Reconnection is
// never attempted: a broken stream surfaces as TransportError.
class TcpMesh {
 public:
  TcpMesh(PartyId me, const std::string& listen_addr, HandshakeInfo info,
          std::chrono::milliseconds io_timeout);
  ~TcpMesh();

  TcpMesh(const TcpMesh&) = delete;
  TcpMesh& operator=(const TcpMesh&) = delete;

  int listen_port() const;

  // Dials peers and accepts inbound connections; blocks until the mesh is
  // complete or the deadline passes. peer_addrs is indexed by party; the own
  // entry is ignored.
  void connect_peers(const std::array<std::string, 3>& peer_addrs,
                     std::chrono::milliseconds connect_timeout);

  PartyChannels channels();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace privmark

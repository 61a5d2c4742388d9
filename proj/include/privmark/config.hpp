#pragma once

#include <array>
#include <string>

#include "privmark/net_profile.hpp"
#include "privmark/party.hpp"
#include "privmark/ring.hpp"

namespace privmark {

// Session configuration file (JSON). One file per party; ring parameters,
// seed and session id must agree across the three files and are checked in
// the transport handshake.
struct SessionConfig {
  PartyId party = PartyId::P1;
  std::string transport = "memory";  // "memory" | "tcp"
  std::string listen;                // host:port, tcp mode
  std::array<std::string, 3> peers;  // host:port per party, tcp mode
  int ell = 64;
  int frac_bits = 18;
  u64 seed = 1;
  u64 session_id = 0;  // 0: derived from the seed
  NetworkProfile profile = NetworkProfile::unshaped();
  int connect_timeout_ms = 10000;
  int io_timeout_ms = 60000;

  // Input data; each party reads only what it owns.
  std::string vocab_path;             // P1
  std::string doc_embeddings_path;    // P2
  std::string token_embeddings_path;  // P2 (full), others read token column
  std::string table_dir;              // per-party share files + P1 index map

  Ring ring() const { return Ring(ell, frac_bits); }
  u64 effective_session_id() const;
};

SessionConfig load_session_config(const std::string& path);
SessionConfig parse_session_config(const std::string& json_text);

}  // namespace privmark

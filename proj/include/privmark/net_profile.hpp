#pragma once

#include <string>

#include "privmark/errors.hpp"

namespace privmark {

// Bandwidth/latency pair used to shape the in-memory transport. The three
// named presets follow the evaluation setup: localhost (26 Gbps, 0.05 ms),
// LAN (1.5 Gbps, 1.5 ms), WAN (400 Mbps, 10 ms).
struct NetworkProfile {
  std::string name = "unshaped";
  double bandwidth_bps = 0.0;  // 0 means unlimited
  double latency_s = 0.0;      // one-way

  bool shaped() const { return bandwidth_bps > 0.0 || latency_s > 0.0; }

  static NetworkProfile unshaped() { return {}; }

  static NetworkProfile localhost() { return {"localhost", 26e9, 0.05e-3}; }
  static NetworkProfile lan() { return {"lan", 1.5e9, 1.5e-3}; }
  static NetworkProfile wan() { return {"wan", 400e6, 10e-3}; }

  static NetworkProfile by_name(const std::string& name) {
    if (name == "localhost") return localhost();
    if (name == "lan") return lan();
    if (name == "wan") return wan();
    if (name == "unshaped" || name.empty()) return unshaped();
    throw ConfigError("unknown network profile: " + name);
  }
};

}  // namespace privmark

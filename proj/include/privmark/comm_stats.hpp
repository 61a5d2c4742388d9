#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "privmark/party.hpp"

namespace privmark {

// Per-phase counters for one party. Rounds count the longest chain of
// sequential send->recv dependencies as observed by this party's serial
// protocol execution: consecutive sends batch into one round, a send after a
// receive opens a new one.
struct PhaseStats {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;  // payload bytes only, framing excluded
  std::uint64_t rounds = 0;
  double seconds = 0.0;  // wall time inside the phase scope

  PhaseStats& operator+=(const PhaseStats& o) {
    messages += o.messages;
    bytes += o.bytes;
    rounds += o.rounds;
    seconds += o.seconds;
    return *this;
  }
};

class CommStats {
 public:
  enum class LastAction { kNone, kSent, kReceived };

  void on_send(const std::string& phase, std::uint64_t payload_bytes) {
    auto& e = entries_[phase];
    e.stats.messages += 1;
    e.stats.bytes += payload_bytes;
    if (e.last != LastAction::kSent) {
      e.stats.rounds += 1;
      e.last = LastAction::kSent;
    }
  }

  void on_recv(const std::string& phase) {
    auto& e = entries_[phase];
    if (e.last == LastAction::kNone) e.stats.rounds += 1;
    e.last = LastAction::kReceived;
  }

  void add_seconds(const std::string& phase, double s) {
    entries_[phase].stats.seconds += s;
  }

  const std::map<std::string, PhaseStats> phases() const {
    std::map<std::string, PhaseStats> out;
    for (const auto& [k, v] : entries_) out[k] = v.stats;
    return out;
  }

  PhaseStats total() const {
    PhaseStats t;
    for (const auto& [k, v] : entries_) t += v.stats;
    return t;
  }

  PhaseStats phase(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? PhaseStats{} : it->second.stats;
  }

 private:
  struct Entry {
    PhaseStats stats;
    LastAction last = LastAction::kNone;
  };
  std::map<std::string, Entry> entries_;
};

// Stats of a whole session: one CommStats snapshot per party.
struct SessionStats {
  std::array<std::map<std::string, PhaseStats>, 3> per_party;

  PhaseStats phase_total(const std::string& name) const {
    PhaseStats t;
    for (const auto& m : per_party) {
      auto it = m.find(name);
      if (it != m.end()) t += it->second;
    }
    return t;
  }

  std::uint64_t total_bytes() const {
    std::uint64_t b = 0;
    for (const auto& m : per_party)
      for (const auto& [k, v] : m) b += v.bytes;
    return b;
  }

  std::uint64_t max_rounds(const std::string& name) const {
    std::uint64_t r = 0;
    for (const auto& m : per_party) {
      auto it = m.find(name);
      if (it != m.end() && it->second.rounds > r) r = it->second.rounds;
    }
    return r;
  }

  double max_seconds(const std::string& name) const {
    double s = 0;
    for (const auto& m : per_party) {
      auto it = m.find(name);
      if (it != m.end() && it->second.seconds > s) s = it->second.seconds;
    }
    return s;
  }
};

}  // namespace privmark

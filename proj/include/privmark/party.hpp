#pragma once

#include <array>

namespace privmark {

// Exactly three computing parties, arranged in a ring.
enum class PartyId : int { P1 = 0, P2 = 1, P3 = 2 };

constexpr std::array<PartyId, 3> kAllParties = {PartyId::P1, PartyId::P2,
                                                PartyId::P3};

constexpr int index_of(PartyId p) { return static_cast<int>(p); }

constexpr PartyId party_from_index(int i) {
  return static_cast<PartyId>(((i % 3) + 3) % 3);
}

constexpr PartyId next(PartyId p) { return party_from_index(index_of(p) + 1); }
constexpr PartyId prev(PartyId p) { return party_from_index(index_of(p) + 2); }

constexpr const char* party_name(PartyId p) {
  switch (p) {
    case PartyId::P1: return "P1";
    case PartyId::P2: return "P2";
    case PartyId::P3: return "P3";
  }
  return "?";
}

}  // namespace privmark

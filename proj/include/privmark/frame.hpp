#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "privmark/ring.hpp"

namespace privmark {

// Wire frame. Fixed little-endian layout so transcripts are comparable
// across transports and implementations:
//   session id   8 bytes
//   phase tag    2 bytes
//   sequence     8 bytes
//   payload len  4 bytes
//   payload      len bytes, little-endian ring elements (len % (ell/8) == 0)
struct Frame {
  u64 session = 0;
  std::uint16_t phase = 0;
  u64 sequence = 0;
  std::vector<std::uint8_t> payload;

  static constexpr size_t kHeaderBytes = 8 + 2 + 8 + 4;
};

std::vector<std::uint8_t> encode_frame(const Frame& f);

// Parses a complete frame buffer (header + payload). Throws FormatError on
// truncation or length mismatch.
Frame decode_frame(std::span<const std::uint8_t> bytes);

// Payload helpers: ring elements are ell/8 bytes each, little endian.
std::vector<std::uint8_t> elems_to_bytes(const Ring& ring, const RingVec& v);
RingVec bytes_to_elems(const Ring& ring, std::span<const std::uint8_t> bytes);

}  // namespace privmark

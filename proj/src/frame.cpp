#include "privmark/frame.hpp"

#include <cstring>

#include "privmark/errors.hpp"

namespace privmark {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& f) {
  std::vector<std::uint8_t> out;
  out.reserve(Frame::kHeaderBytes + f.payload.size());
  put_le<u64>(out, f.session);
  put_le<std::uint16_t>(out, f.phase);
  put_le<u64>(out, f.sequence);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.payload.size()));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < Frame::kHeaderBytes)
    throw FormatError("frame shorter than header");
  Frame f;
  f.session = get_le<u64>(bytes.data());
  f.phase = get_le<std::uint16_t>(bytes.data() + 8);
  f.sequence = get_le<u64>(bytes.data() + 10);
  std::uint32_t len = get_le<std::uint32_t>(bytes.data() + 18);
  if (bytes.size() != Frame::kHeaderBytes + len)
    throw FormatError("frame length mismatch");
  f.payload.assign(bytes.begin() + Frame::kHeaderBytes, bytes.end());
  return f;
}

std::vector<std::uint8_t> elems_to_bytes(const Ring& ring, const RingVec& v) {
  const int w = ring.element_bytes();
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<size_t>(v.size()) * w);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    u64 x = ring.reduce(v[i]);
    for (int b = 0; b < w; ++b)
      out.push_back(static_cast<std::uint8_t>((x >> (8 * b)) & 0xff));
  }
  return out;
}

RingVec bytes_to_elems(const Ring& ring, std::span<const std::uint8_t> bytes) {
  const int w = ring.element_bytes();
  if (bytes.size() % w != 0)
    throw FormatError("payload not a multiple of the element width");
  RingVec out(static_cast<Eigen::Index>(bytes.size() / w));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    u64 x = 0;
    for (int b = 0; b < w; ++b)
      x |= static_cast<u64>(bytes[static_cast<size_t>(i) * w + b]) << (8 * b);
    out[i] = x;
  }
  return out;
}

}  // namespace privmark

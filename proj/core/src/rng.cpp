#include "idslab/rng.hpp"

namespace idslab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> round_once(const std::array<std::uint32_t, 4>& c,
                                               const std::array<std::uint32_t, 2>& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    counter = round_once(counter, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  // Fold the substream into the key with an odd-multiplier bijection so that
  // (counter, key) pairs are distinct across (stream, substream, draw) triples.
  const std::uint64_t folded = seed ^ (substream * 0x9E3779B97F4A7C15ull);
  key_ = {static_cast<std::uint32_t>(folded), static_cast<std::uint32_t>(folded >> 32)};
  stream_lo_ = static_cast<std::uint32_t>(stream);
  stream_hi_ = static_cast<std::uint32_t>(stream >> 32);
}

std::uint64_t RandomStream::next_u64() {
  const std::array<std::uint32_t, 4> ctr = {
      stream_lo_, stream_hi_,
      static_cast<std::uint32_t>(draw_), static_cast<std::uint32_t>(draw_ >> 32)};
  ++draw_;
  const auto out = philox4x32(ctr, key_);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double RandomStream::next() {
  // Top 53 bits -> [0, 1) with full double resolution.
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

}  // namespace idslab

#pragma once

#include <array>
#include <cstdint>

namespace idslab {

// Philox4x32-10 counter-based block function (Salmon, Moraes, Dror, Shaw 2011).
// Output is a pure function of (counter, key): streams can be evaluated in any
// order, on any thread, and always reproduce bit-for-bit.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// One logical stream of uniform variates identified by (seed, stream, substream).
// Typical use: stream = flat site index, substream = realization index, so each
// site's draws are independent of every other site's and of evaluation order.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

  // Uniform on [0, 1), 53 random bits.
  double next();
  std::uint64_t next_u64();

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t draw_ = 0;
};

}  // namespace idslab

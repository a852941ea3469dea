#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).  A stream is
// identified by (seed, stream id); the n-th draw is a pure function of
// (seed, stream, n), so results do not depend on call order or threading.

#include <array>
#include <cstdint>

namespace nfrlab {

// Raw 10-round Philox bijection.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  // Four 32-bit words for the given counter.
  std::array<std::uint32_t, 4> block(std::uint64_t counter) const;

  // Uniform double in [0, 1) for draw index i.
  double uniform(std::uint64_t i) const;
  // Standard normal via Box-Muller for draw index i (uses one block).
  double normal(std::uint64_t i) const;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
};

// Sequential convenience wrapper.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream = 0)
      : gen_(seed, stream) {}
  double uniform() { return gen_.uniform(next_++); }
  double normal() { return gen_.normal(next_++); }
  // Integer in [lo, hi].
  long long integer(long long lo, long long hi);

 private:
  Philox gen_;
  std::uint64_t next_ = 0;
};

}  // namespace nfrlab

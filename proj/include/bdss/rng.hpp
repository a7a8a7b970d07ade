#pragma once

#include <cstdint>
#include <initializer_list>

namespace bdss::rng {

// splitmix64 finalizer; also used to fold substream paths.
std::uint64_t mix(std::uint64_t x);

// Named substream tags. All randomness in the toolkit flows from one master
// seed through substream(seed, {tag, index...}) so that every consumer owns
// an independent, reorderable stream.
inline constexpr std::uint64_t kNoise = 0x6e6f697365ull;  // "noise"
inline constexpr std::uint64_t kInit = 0x696e6974ull;     // "init"
inline constexpr std::uint64_t kData = 0x64617461ull;     // "data"
inline constexpr std::uint64_t kLooks = 0x6c6f6f6b73ull;  // "looks"

std::uint64_t substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

// xoshiro256++ with explicitly coded uniform / normal / gamma transforms.
// Standard-library distributions are implementation-defined, which would
// break bit-reproducibility contracts, so the transforms live here.
class Stream {
 public:
  explicit Stream(std::uint64_t seed);

  std::uint64_t next();
  double uniform();      // [0, 1)
  double uniform_pos();  // (0, 1]
  double uniform_in(double lo, double hi);
  double normal();  // standard normal, Box-Muller
  // Unit-rate Gamma via the Marsaglia-Tsang squeeze/rejection method.
  // Valid for shape >= 1; integer shapes take the same path.
  double gamma(double shape);

 private:
  std::uint64_t s_[4];
};

}  // namespace bdss::rng

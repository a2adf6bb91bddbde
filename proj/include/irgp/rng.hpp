#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace irgp {

// Stream purposes used to key independent substreams of one replication.
enum class Stream : std::uint64_t {
  kInstance = 1,
  kInitialDesign = 2,
  kNoise = 3,
  kAcquisition = 4,
  kZetaSequence = 5,
  kMonteCarlo = 6,
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Hashes an ordered key tuple into one 64-bit seed.
std::uint64_t hash_key(std::initializer_list<std::uint64_t> key) noexcept;

// xoshiro256++ generator. Satisfies UniformRandomBitGenerator so it can feed
// the standard distributions. Copyable; copies replay the same sequence.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept;

  // Generator for the stream addressed by the key tuple, e.g.
  // (base_seed, replication, Stream::kAcquisition, t).
  static Rng keyed(std::initializer_list<std::uint64_t> key) noexcept {
    return Rng(hash_key(key));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  // Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform() noexcept;

  // Standard normal via the Marsaglia polar method. The spare variate is
  // part of the generator state.
  double normal() noexcept;

  // Child generator seeded from exactly one output of this one.
  Rng split() noexcept { return Rng((*this)()); }

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::uint64_t key_of(Stream s) noexcept {
  return static_cast<std::uint64_t>(s);
}

}  // namespace irgp

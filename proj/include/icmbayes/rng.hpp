#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace icmbayes {

namespace detail {

inline std::uint64_t splitmix64_step(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t v, int k) {
  return (v << k) | (v >> (64 - k));
}

}  // namespace detail

// Purpose tags keep independently keyed streams from ever colliding.
enum class StreamPurpose : std::uint64_t {
  kTrueParams = 1,
  kObservations = 2,
  kTrajectory = 3,
};

// Key-addressable xoshiro256++ stream. A stream is identified by the master
// seed plus a short integer key (purpose tag, cell indices, trial index), so
// any stream can be reconstructed later regardless of execution order or
// thread scheduling. All draws are deterministic functions of the key.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> key) {
    std::uint64_t h = detail::splitmix64_step(master_seed);
    for (std::uint64_t k : key) {
      h = detail::splitmix64_step(h ^ k);
    }
    for (auto& s : state_) {
      h = detail::splitmix64_step(h);
      s = h;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl64(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes exactly two words per call so
  // stream consumption is easy to audit.
  double normal() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;          // [0, 1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double stddev) {
    return mean + stddev * normal();
  }

 private:
  std::array<std::uint64_t, 4> state_;
};

}  // namespace icmbayes

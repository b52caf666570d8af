#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace tvsieve {

/// Counter-based random stream (Philox-4x32-10).
///
/// A stream is fully determined by (seed, stream_id), so replicates and
/// bootstrap draws can be generated in any order, on any number of workers,
/// with identical results.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t k = mix64(seed ^ mix64(stream_id + 0x9e3779b97f4a7c15ull));
    key_[0] = static_cast<std::uint32_t>(k);
    key_[1] = static_cast<std::uint32_t>(k >> 32);
    counter_ = {0, 0, 0, 0};
    buffer_pos_ = 4;
    have_normal_ = false;
  }

  /// Uniform draw on (0,1).
  double uniform() {
    std::uint64_t bits = (static_cast<std::uint64_t>(next_word()) << 32) | next_word();
    double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    return u > 0.0 ? u : 0x1.0p-53;
  }

  /// Standard normal draw (Box-Muller, pairwise).
  double normal() {
    if (have_normal_) {
      have_normal_ = false;
      return cached_normal_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * M_PI * u2;
    cached_normal_ = radius * std::sin(angle);
    have_normal_ = true;
    return radius * std::cos(angle);
  }

 private:
  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint32_t next_word() {
    if (buffer_pos_ == 4) {
      refill();
      buffer_pos_ = 0;
    }
    return buffer_[buffer_pos_++];
  }

  void refill() {
    std::array<std::uint32_t, 4> c = counter_;
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = 0xD2511F53ull * c[0];
      std::uint64_t p1 = 0xCD9E8D57ull * c[2];
      std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    buffer_ = c;
    if (++counter_[0] == 0)
      if (++counter_[1] == 0)
        if (++counter_[2] == 0) ++counter_[3];
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_;
  int buffer_pos_;
  bool have_normal_;
  double cached_normal_ = 0.0;
};

}  // namespace tvsieve

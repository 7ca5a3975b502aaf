#pragma once

#include <array>
#include <cstdint>

namespace rpde {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Output is a pure function of (key, counter), so any draw can be
/// regenerated from its coordinates without replaying a sequence.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Sequential view of one Philox stream identified by (seed, stream id).
///
/// Distinct stream ids give statistically independent sequences; the
/// stream id is how callers split work across iterations, ensemble members
/// and purposes without sharing mutable generator state.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t bits = next_u64();
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() {
    if (lane_ == 2) {
      const Philox4x32::Counter ctr{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                    static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
      buffer_ = Philox4x32::block(ctr, key_);
      ++counter_;
      lane_ = 0;
    }
    const std::uint64_t out = (std::uint64_t{buffer_[2 * lane_ + 1]} << 32) | buffer_[2 * lane_];
    ++lane_;
    return out;
  }

  std::uint64_t counter() const { return counter_; }
  std::uint64_t stream() const { return stream_; }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Philox4x32::Counter buffer_{};
  int lane_ = 2;
};

/// Stream ids used by the library. The high bits name the purpose; the low
/// bits carry the iteration or member index.
namespace streams {
inline constexpr std::uint64_t kInit = 0x1ull << 56;
inline constexpr std::uint64_t kTrainBatch = 0x2ull << 56;
inline constexpr std::uint64_t kOracleMember = 0x3ull << 56;
inline constexpr std::uint64_t kEvaluate = 0x4ull << 56;
inline constexpr std::uint64_t kCheck = 0x5ull << 56;
}  // namespace streams

}  // namespace rpde

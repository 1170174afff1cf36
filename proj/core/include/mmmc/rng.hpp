#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace mmmc {

/// Name of the generator algorithm, written into every output file.
inline constexpr std::string_view kRngAlgorithm = "philox4x32-10";

/// Counter-based Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// A reproducible random stream identified by (seed, stream id).
///
/// The seed is the Philox key; the stream id occupies the upper half of the
/// 128-bit counter, so each stream owns 2^64 blocks and streams never overlap.
/// Each block yields two 64-bit words, low word first. Normal deviates use the
/// Boost ziggurat on top of the 64-bit stream.
class RngStream {
 public:
  using result_type = std::uint64_t;
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  std::uint64_t next_u64() noexcept {
    if (pos_ == kWords) refill();
    return buffer_[pos_++];
  }
  result_type operator()() noexcept { return next_u64(); }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal();

 private:
  static constexpr int kBlocks = 8;
  static constexpr int kWords = 2 * kBlocks;

  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, kWords> buffer_{};
  int pos_ = kWords;
};

}  // namespace mmmc

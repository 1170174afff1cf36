#include "mmmc/rng.hpp"

#include <boost/random/normal_distribution.hpp>

namespace mmmc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// N independent blocks round by round, so the multiplies vectorize.
template <int N>
void philox_rounds(std::uint32_t (&c)[N][4], std::uint32_t k0, std::uint32_t k1) {
  for (int round = 0; round < 10; ++round) {
    for (int j = 0; j < N; ++j) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[j][0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[j][2];
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c[j][1] ^ k0;
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c[j][3] ^ k1;
      c[j][0] = n0;
      c[j][1] = static_cast<std::uint32_t>(p1);
      c[j][2] = n2;
      c[j][3] = static_cast<std::uint32_t>(p0);
    }
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) {
  std::uint32_t c[1][4] = {{counter[0], counter[1], counter[2], counter[3]}};
  philox_rounds<1>(c, key[0], key[1]);
  return {c[0][0], c[0][1], c[0][2], c[0][3]};
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_(stream_id) {}

void RngStream::refill() noexcept {
  std::uint32_t c[kBlocks][4];
  for (int j = 0; j < kBlocks; ++j) {
    const std::uint64_t b = block_ + static_cast<std::uint64_t>(j);
    c[j][0] = static_cast<std::uint32_t>(b);
    c[j][1] = static_cast<std::uint32_t>(b >> 32);
    c[j][2] = static_cast<std::uint32_t>(stream_);
    c[j][3] = static_cast<std::uint32_t>(stream_ >> 32);
  }
  philox_rounds<kBlocks>(c, static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32));
  for (int j = 0; j < kBlocks; ++j) {
    buffer_[2 * j] = (static_cast<std::uint64_t>(c[j][1]) << 32) | c[j][0];
    buffer_[2 * j + 1] = (static_cast<std::uint64_t>(c[j][3]) << 32) | c[j][2];
  }
  block_ += kBlocks;
  pos_ = 0;
}

double RngStream::normal() {
  // Stateless ziggurat: no cached spare, so the stream position is the whole state.
  return boost::random::normal_distribution<double>()(*this);
}

}  // namespace mmmc

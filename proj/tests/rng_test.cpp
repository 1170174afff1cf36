#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "mmmc/rng.hpp"

namespace mmmc {
namespace {

using Block = std::array<std::uint32_t, 4>;

TEST(Philox, KnownAnswerZero) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          {0xffffffffu, 0xffffffffu}),
            (Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          {0xa4093822u, 0x299f31d0u}),
            (Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, WordsFollowTheBlockFunction) {
  const std::uint64_t seed = 0x0123456789abcdefull;
  const std::uint64_t stream = 0xfedcba9876543210ull;
  RngStream rng(seed, stream);
  for (std::uint64_t block = 0; block < 40; ++block) {
    const Block out = philox4x32_10(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
        {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
    EXPECT_EQ(rng.next_u64(), (std::uint64_t{out[1]} << 32) | out[0]) << "block " << block;
    EXPECT_EQ(rng.next_u64(), (std::uint64_t{out[3]} << 32) | out[2]) << "block " << block;
  }
}

TEST(RngStream, Reproducible) {
  RngStream a(7, 3), b(7, 3);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.next_u64(), b.next_u64());
    ASSERT_EQ(a.uniform(), b.uniform());
    ASSERT_EQ(a.normal(), b.normal());
  }
}

TEST(RngStream, StreamsAndSeedsDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t s = 0; s < 4; ++s) {
    for (std::uint64_t id = 0; id < 4; ++id) first.insert(RngStream(s, id).next_u64());
  }
  EXPECT_EQ(first.size(), 16u);
}

TEST(RngStream, UniformOpenInterval) {
  RngStream rng(1, 0);
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RngStream, NormalMoments) {
  RngStream rng(2, 0);
  const int n = 1000000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  std::size_t beyond3 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
    beyond3 += std::abs(x) > 3.0;
  }
  EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
  // P(|X| > 3) = 2.6998e-3
  EXPECT_NEAR(static_cast<double>(beyond3) / n, 2.6998e-3, 5.0 * std::sqrt(2.7e-3 / n));
}

}  // namespace
}  // namespace mmmc

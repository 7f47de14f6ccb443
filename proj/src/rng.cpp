#include "hprobit/rng.hpp"

#include "hprobit/stats.hpp"

#include <cmath>

namespace hprobit {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, StreamKey key) : seed_(seed), key_(key) {
  const std::uint64_t k =
      splitmix64(seed ^ splitmix64(key.chain + 0x632BE59BD9B4E019ull * (key.iteration >> 32)));
  philox_key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void RngStream::refill() {
  buffer_ = philox4x32_10({block_++, static_cast<std::uint32_t>(key_.iteration),
                           static_cast<std::uint32_t>(key_.entity),
                           static_cast<std::uint32_t>(key_.entity >> 32)},
                          philox_key_);
  buffered_ = 4;
}

std::uint64_t RngStream::next_u64() {
  if (buffered_ < 2) refill();
  const std::uint64_t hi = buffer_[4 - buffered_];
  const std::uint64_t lo = buffer_[5 - buffered_];
  buffered_ -= 2;
  return (hi << 32) | lo;
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return std_normal_quantile(uniform()); }

double RngStream::exponential() { return -std::log(uniform()); }

}  // namespace hprobit

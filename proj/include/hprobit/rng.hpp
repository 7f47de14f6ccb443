#pragma once

#include <array>
#include <cstdint>

namespace hprobit {

// Identifies one independent random stream. Samplers key streams by
// (chain, iteration, entity) so that conditionally independent updates can be
// drawn in any order, on any thread, and still reproduce bit for bit.
struct StreamKey {
  std::uint64_t chain = 0;
  std::uint64_t iteration = 0;
  std::uint64_t entity = 0;
};

// Update stage tags folded into the entity id.
enum class Stage : std::uint64_t {
  init = 1,
  omega = 2,
  tau = 3,
  mu = 4,
  theta = 5,
  beta = 6,
  assignment = 7,
  atoms = 8,
  weights = 9,
  support = 10,
  predictive = 11,
  simulate = 12,
  forward = 13,
  outcome = 14,
};

constexpr std::uint64_t entity_id(Stage stage, std::uint64_t index) {
  return (static_cast<std::uint64_t>(stage) << 48) ^ index;
}

// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

// Counter-based stream: the key is derived from (seed, chain), the counter
// carries (block, iteration, entity). Copying a stream copies its position.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamKey key);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double exponential();

  std::uint64_t seed() const { return seed_; }
  const StreamKey& key() const { return key_; }

 private:
  void refill();

  std::uint64_t seed_;
  StreamKey key_;
  std::array<std::uint32_t, 2> philox_key_{};
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
};

// Per-iteration helper handing out keyed streams for one update stage.
struct IterationRng {
  std::uint64_t seed = 0;
  std::uint64_t chain = 0;
  std::uint64_t iteration = 0;

  RngStream stream(Stage stage, std::uint64_t index = 0) const {
    return RngStream(seed, StreamKey{chain, iteration, entity_id(stage, index)});
  }
};

}  // namespace hprobit

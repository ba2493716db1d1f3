#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace lsbound {

// Counter-based generator: Philox4x32-10. Every draw is addressable by
// (seed, stream, index), so parallel chunks produce bit-identical output
// regardless of thread count, and sample i never depends on n.
inline constexpr const char* kRngName = "philox4x32-10";

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key);

std::uint64_t splitmix64(std::uint64_t z);

// Stream ids are pure (name, index) hashes; the top-level seed enters as the
// Philox key. Adding a new named stream never perturbs existing ones.
std::uint64_t stream_id(std::string_view name, std::uint64_t index = 0);

// Child seed for an independent sub-run (sweep grid point, trial, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  RandomStream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0)
      : RandomStream(seed, stream_id(name, index)) {}

  std::array<std::uint32_t, 4> block(std::uint64_t block_index) const;

  // Two 64-bit words per block.
  std::uint64_t bits64(std::uint64_t index) const;

  // uniform01 in [0,1), uniform01_open in (0,1]; two per block.
  double uniform01(std::uint64_t index) const;
  double uniform01_open(std::uint64_t index) const;

  // Standard normals via Box-Muller; a pair costs one block.
  double normal(std::uint64_t index) const;

  // Unbiased-enough integer in [0, bound) via 128-bit multiply.
  std::uint64_t below(std::uint64_t index, std::uint64_t bound) const;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
};

}  // namespace lsbound

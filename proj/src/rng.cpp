#include "lsbound/rng.hpp"

#include <cmath>

namespace lsbound {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> philox_round(const std::array<std::uint32_t, 4>& c,
                                                 const std::array<std::uint32_t, 2>& k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kPhiloxM0, c[0], hi0, lo0);
  mulhilo(kPhiloxM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key) {
  std::array<std::uint32_t, 4> c = counter;
  std::array<std::uint32_t, 2> k = key;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kPhiloxW0;
      k[1] += kPhiloxW1;
    }
    c = philox_round(c, k);
  }
  return c;
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t stream_id(std::string_view name, std::uint64_t index) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return splitmix64(splitmix64(h) ^ index);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t index) {
  return splitmix64(seed ^ stream_id(name, index));
}

std::array<std::uint32_t, 4> RandomStream::block(std::uint64_t block_index) const {
  const std::array<std::uint32_t, 4> counter = {
      static_cast<std::uint32_t>(block_index), static_cast<std::uint32_t>(block_index >> 32),
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  return philox4x32(counter, key_);
}

std::uint64_t RandomStream::bits64(std::uint64_t index) const {
  const auto b = block(index / 2);
  const std::size_t j = 2 * (index % 2);
  return (static_cast<std::uint64_t>(b[j + 1]) << 32) | b[j];
}

double RandomStream::uniform01(std::uint64_t index) const {
  return static_cast<double>(bits64(index) >> 11) * kInv53;
}

double RandomStream::uniform01_open(std::uint64_t index) const {
  return static_cast<double>((bits64(index) >> 11) + 1) * kInv53;
}

double RandomStream::normal(std::uint64_t index) const {
  const auto b = block(index / 2);
  const std::uint64_t w0 = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
  const std::uint64_t w1 = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
  const double u1 = static_cast<double>((w0 >> 11) + 1) * kInv53;  // (0,1]
  const double u2 = static_cast<double>(w1 >> 11) * kInv53;        // [0,1)
  const double r = std::sqrt(-2.0 * std::log(u1));
  return (index % 2 == 0) ? r * std::cos(kTwoPi * u2) : r * std::sin(kTwoPi * u2);
}

std::uint64_t RandomStream::below(std::uint64_t index, std::uint64_t bound) const {
  const unsigned __int128 p = static_cast<unsigned __int128>(bits64(index)) * bound;
  return static_cast<std::uint64_t>(p >> 64);
}

}  // namespace lsbound

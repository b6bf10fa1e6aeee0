#ifndef OULDP_RNG_HPP
#define OULDP_RNG_HPP

// Counter-based random streams. Every simulated path owns the stream
// keyed by (seed, path index), so a path's draws do not depend on how
// paths are scheduled across workers.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace ouldp {

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Stateless bijection from (counter, key) to 128 bits.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
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

  static constexpr Counter single_round(const Counter& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Identifies one reproducible stream: a run seed plus a path index.
struct StreamId {
  std::uint64_t seed = 0;
  std::uint64_t path = 0;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// Standard normal draws from the Philox stream of one path (Box-Muller on
/// 52-bit uniforms, two normals per block).
class NormalStream {
 public:
  explicit NormalStream(StreamId id) noexcept
      : key_{static_cast<std::uint32_t>(id.seed),
             static_cast<std::uint32_t>(id.seed >> 32)},
        path_(id.path) {}

  double operator()() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const auto block = Philox4x32::generate(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32)},
        key_);
    ++block_;
    const double u1 = to_open_unit(block[0], block[1]);
    const double u2 = to_open_unit(block[2], block[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform on (0, 1) built from 64 bits; exposed for tests.
  static double to_open_unit(std::uint32_t lo, std::uint32_t hi) noexcept {
    const std::uint64_t bits = (std::uint64_t{hi} << 32) | lo;
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
  }

 private:
  Philox4x32::Key key_;
  std::uint64_t path_;
  std::uint64_t block_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ouldp

#endif  // OULDP_RNG_HPP

#pragma once

#include <array>
#include <cstdint>

namespace qfb {

/// Philox-4x32 with 10 rounds (Salmon et al., SC'11). Stateless: the output
/// is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// Two independent standard normals from one Philox block (Box-Muller on two
/// 53-bit uniforms).
std::array<double, 2> normal_pair(const Philox4x32::Counter& ctr, const Philox4x32::Key& key);

/// Per-trajectory source of Wiener increments, keyed by (master seed,
/// trajectory index, step index, channel). Increments are order-independent:
/// any step can be drawn without drawing the ones before it.
///
/// With `refinement` r > 0 the stream produces increments for dt = base_dt/2^r
/// whose consecutive blocks of 2^r sum exactly (up to rounding) to the
/// increments the r = 0 stream produces for base_dt, via Brownian-bridge
/// midpoint splitting. This couples runs at different step sizes to the same
/// Wiener path.
class WienerStream {
 public:
  WienerStream(std::uint64_t master_seed, std::uint64_t trajectory, double base_dt,
               int refinement = 0);

  /// Increments (dW_1, dW_2) for fine step `step`.
  std::array<double, 2> increments(std::uint64_t step) const;

  double dt() const { return fine_dt_; }

 private:
  std::array<double, 2> node(std::uint64_t coarse_step, int level, std::uint64_t index) const;

  Philox4x32::Key key_;
  std::uint64_t trajectory_;
  double base_dt_;
  double fine_dt_;
  int refinement_;
};

}  // namespace qfb

#include "qfb/rng.hpp"

#include <cmath>
#include <numbers>

#include "qfb/error.hpp"

namespace qfb {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Uniform in (0, 1) from 53 random bits; never returns 0.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return (static_cast<double>(bits & ((1ULL << 53) - 1)) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

std::array<double, 2> normal_pair(const Philox4x32::Counter& ctr, const Philox4x32::Key& key) {
  const auto r = Philox4x32::generate(ctr, key);
  const double u1 = to_unit(r[0], r[1]);
  const double u2 = to_unit(r[2], r[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

WienerStream::WienerStream(std::uint64_t master_seed, std::uint64_t trajectory, double base_dt,
                           int refinement)
    : key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)},
      trajectory_(trajectory),
      base_dt_(base_dt),
      fine_dt_(std::ldexp(base_dt, -refinement)),
      refinement_(refinement) {
  if (!(base_dt > 0.0)) throw Error(ErrorKind::InvalidParameter, "base_dt must be positive");
  if (refinement < 0 || refinement > 20)
    throw Error(ErrorKind::InvalidParameter, "refinement must lie in [0, 20]");
}

std::array<double, 2> WienerStream::node(std::uint64_t coarse_step, int level,
                                         std::uint64_t index) const {
  const auto traj_lo = static_cast<std::uint32_t>(trajectory_);
  const auto traj_hi = static_cast<std::uint32_t>(trajectory_ >> 32);
  const auto step_lo = static_cast<std::uint32_t>(coarse_step);
  if (level == 0) {
    const auto z = normal_pair({step_lo, 0u, traj_lo, traj_hi}, key_);
    const double s = std::sqrt(base_dt_);
    return {s * z[0], s * z[1]};
  }
  const std::uint64_t parent_index = index >> 1;
  const auto parent = node(coarse_step, level - 1, parent_index);
  const double parent_dt = std::ldexp(base_dt_, -(level - 1));
  const auto tag = (static_cast<std::uint32_t>(level) << 24) |
                   static_cast<std::uint32_t>(parent_index & 0xFFFFFF);
  const auto z = normal_pair({step_lo, tag, traj_lo, traj_hi}, key_);
  const double half_sd = 0.5 * std::sqrt(parent_dt);
  const double sign = (index & 1) ? -1.0 : 1.0;
  return {0.5 * parent[0] + sign * half_sd * z[0], 0.5 * parent[1] + sign * half_sd * z[1]};
}

std::array<double, 2> WienerStream::increments(std::uint64_t step) const {
  const std::uint64_t coarse = step >> refinement_;
  const std::uint64_t local = step & ((1ULL << refinement_) - 1);
  return node(coarse, refinement_, local);
}

}  // namespace qfb

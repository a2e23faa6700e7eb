#pragma once

#include <cstdint>

namespace nmwf {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Per-trajectory random substream. The state is a counter keyed on
// (master_seed, trajectory_id), so any trajectory's stream can be
// regenerated independently of scheduling or worker count.
class TrajectoryStream {
 public:
  TrajectoryStream(std::uint64_t master_seed, std::uint64_t trajectory_id)
      : state_(detail::mix64(master_seed ^ detail::mix64(trajectory_id))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1).
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace nmwf

#ifndef CELLFREE_RNG_HPP
#define CELLFREE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace cellfree {

// Draw kinds with dedicated substreams. Adding draws of one kind never
// perturbs draws of another (each (kind, index) pair seeds its own stream).
enum class DrawKind : std::uint64_t {
  UePosition = 1,
  ChannelG = 2,
  ChannelV = 3,
  ChannelH = 4,
  ThetaInit = 5,
  BaselineTheta = 6,
  TuneBatch = 7,
  Test = 99,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic counter-based stream: one instance per (seed, kind, i, j).
// All distribution conversions are hand-rolled so output is identical across
// standard libraries and platforms.
class RngStream {
 public:
  RngStream(std::uint64_t seed, DrawKind kind, std::uint64_t i = 0,
            std::uint64_t j = 0) {
    std::uint64_t s = seed;
    state_ = detail::splitmix64(s);
    s = state_ ^ (0x6a09e667f3bcc909ull + static_cast<std::uint64_t>(kind));
    state_ = detail::splitmix64(s);
    s = state_ ^ (0xbb67ae8584caa73bull + i);
    state_ = detail::splitmix64(s);
    s = state_ ^ (0x3c6ef372fe94f82bull + j);
    state_ = detail::splitmix64(s);
  }

  std::uint64_t next_u64() { return detail::splitmix64(state_); }

  // Uniform on [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; second value cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    // Guard log(0).
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cellfree

#endif  // CELLFREE_RNG_HPP

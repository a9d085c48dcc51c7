#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace cosens {

// Deterministic splittable RNG built on the splitmix64 finalizer.
// Streams derived from (master seed, tag path) are independent of execution
// order, so replicated computations stay bit-reproducible under any
// scheduling. No libstdc++ distributions are used; normals come from
// Box-Muller so the byte stream is identical across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(finalize(seed)) {}

  // Derives an independent stream by folding each tag into the master seed.
  static RngStream derive(std::uint64_t master,
                          std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = finalize(master);
    for (std::uint64_t t : tags) {
      s = finalize(s ^ (t + 0x9e3779b97f4a7c15ull + (s << 6) + (s >> 2)));
    }
    return RngStream(raw_tag{}, s);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return finalize_mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform in {0, ..., n-1} via multiply-shift (bias < n / 2^64).
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  // Inclusive integer range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    uniform_int(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // in (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  struct raw_tag {};
  RngStream(raw_tag, std::uint64_t state) : state_(state) {}

  static std::uint64_t finalize_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t finalize(std::uint64_t z) {
    return finalize_mix(z + 0x9e3779b97f4a7c15ull);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cosens

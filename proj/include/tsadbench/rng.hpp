#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace tsadbench {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Order-sensitive seed combinator. Streams derived with mix_seed are the
// only sanctioned way to hand randomness to primitives, which keeps runs
// reproducible regardless of scheduling.
inline std::uint64_t mix_seed(std::uint64_t seed) { return detail::splitmix64(seed); }

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t v) {
  return detail::splitmix64(seed ^ detail::splitmix64(v + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return mix_seed(seed, h);
}

template <typename First, typename Second, typename... Rest>
std::uint64_t mix_seed(std::uint64_t seed, First&& f, Second&& s, Rest&&... rest) {
  return mix_seed(mix_seed(seed, std::forward<First>(f)), std::forward<Second>(s),
                  std::forward<Rest>(rest)...);
}

// mt19937_64 with self-contained value mappings. The standard pins down the
// raw engine output but not the distributions, so uniform/normal are done by
// hand to keep sequences identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi], rejection sampled for exactness
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) std::swap(lo, hi);
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return lo + static_cast<std::int64_t>(draw % span);
  }

  // Box-Muller; one value per call, cached pair member discarded for
  // simplicity of reasoning about stream positions.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tsadbench

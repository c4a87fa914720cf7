#pragma once

#include <cmath>
#include <cstdint>

namespace fagcn {

// SplitMix64. The state advance is a plain counter increment and the output
// is a bijective mix of the counter, so draw k is a pure function of
// (seed, k) and streams are reproducible across platforms. Constants are the
// public-domain reference ones (Steele, Lea, Flood).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; each pair of uniforms yields two draws
  // and the second one is handed out on the following call.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;  // keep log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n) by 128-bit multiply-shift.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(n)) >> 64);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Consumers that share one user-facing seed (edge sampling, feature noise,
// splits, init, dropout) each run on a salted sub-stream so that adding draws
// to one of them never shifts another.
enum class StreamTag : std::uint64_t {
  edges = 1,
  features = 2,
  split = 3,
  init = 4,
  dropout = 5,
};

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t tag) {
  return SplitMix64(mix64(seed ^ (tag * 0xD1B54A32D192ED03ULL)));
}

inline SplitMix64 substream(std::uint64_t seed, StreamTag tag) {
  return substream(seed, static_cast<std::uint64_t>(tag));
}

}  // namespace fagcn

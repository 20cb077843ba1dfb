#pragma once

#include <cmath>
#include <cstdint>

#include "orthofield/lattice.hpp"

namespace orthofield {

// Counter-based seeding: every lattice site gets its own short stream whose
// seed is a pure hash of (root seed, replication, site). Draws are therefore
// independent of evaluation order and of any threading schedule.

namespace rng_detail {

inline std::uint64_t mix64(std::uint64_t z) {
  // splitmix64 finalizer (Steele, Lea, Flood 2014).
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t absorb(std::uint64_t h, std::uint64_t x) {
  return mix64(h ^ (x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

inline std::uint64_t zigzag(int v) {
  const auto s = static_cast<std::int64_t>(v);
  return static_cast<std::uint64_t>((s << 1) ^ (s >> 63));
}

}  // namespace rng_detail

/// Pure function of its arguments; identical inputs give identical seeds.
inline std::uint64_t derive_site_seed(std::uint64_t root_seed, std::uint64_t replication,
                                      const MultiIndex& site) {
  using namespace rng_detail;
  std::uint64_t h = mix64(root_seed);
  h = absorb(h, replication);
  h = absorb(h, static_cast<std::uint64_t>(site.dim()));
  for (int i = 0; i < site.dim(); ++i) h = absorb(h, zigzag(site[i]));
  return h;
}

/// Deterministic stream of 64-bit words seeded from a site seed.
class SiteStream {
 public:
  explicit SiteStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on the open interval (0,1); never returns 0 or 1.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes two words.
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  /// Exp(1).
  double next_exponential() { return -std::log(next_uniform()); }

  /// Gamma(shape, 1) via Marsaglia-Tsang; rejection stays inside this stream.
  double next_gamma(double shape) {
    if (shape < 1.0) {
      // boost to shape+1 and scale back
      const double u = next_uniform();
      return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double w = t * t * t;
      const double u = next_uniform();
      if (std::log(u) < 0.5 * x * x + d - d * w + d * std::log(w)) return d * w;
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace orthofield

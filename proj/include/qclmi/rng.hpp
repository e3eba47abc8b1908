#pragma once

#include <cmath>
#include <cstdint>

#include "qclmi/core.hpp"

namespace qclmi {

// splitmix64: seed expansion and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// xoshiro256++ with hand-rolled transforms so sampled streams are identical
// across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }
  // Independent deterministic substream (e.g. one per Monte Carlo block).
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t sm = seed;
    const std::uint64_t a = splitmix64(sm);
    sm = stream_id ^ 0x6a09e667f3bcc909ull;
    return Rng(a ^ splitmix64(sm));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }  // [0,1)
  double uniform_pos() { return 1.0 - uniform(); }                            // (0,1]

  // Box–Muller (cosine branch only, for a context-free deterministic stream).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

// One exact draw from a Husimi factor.
inline void sample_factor(const DensityFactor& f, double hbar, Rng& rng, double& q, double& p) {
  if (f.kind == FactorKind::GaussianHusimi) {
    const double s = std::sqrt(hbar);
    q = f.qc + s * rng.normal();
    p = f.pc + s * rng.normal();
    return;
  }
  // Fock n=1: radial action u = (q²+p²)/2ħ ~ Gamma(2,1), angle uniform.
  const double u = -std::log(rng.uniform_pos() * rng.uniform_pos());
  const double r = std::sqrt(2.0 * hbar * u);
  const double th = 6.283185307179586477 * rng.uniform();
  q = r * std::cos(th);
  p = r * std::sin(th);
}

inline PhasePoint sample_initial(const DensitySpec& d, double hbar, Rng& rng) {
  PhasePoint x;
  sample_factor(d.sub1, hbar, rng, x.q1, x.p1);
  sample_factor(d.sub2, hbar, rng, x.q2, x.p2);
  return x;
}

}  // namespace qclmi

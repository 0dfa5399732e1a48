#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace watrec {

// splitmix64 finalizer. Used both as the generator step and as the word mixer
// for stream derivation, so equal inputs give equal outputs on any platform.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives a child seed from a parent seed plus a sequence of key words.
// The chain is order- and length-sensitive: derive(s, {a}) != derive(s, {a, 0}).
constexpr std::uint64_t derive_stream(std::uint64_t seed,
                                      std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(seed ^ 0x5bf0f5e42c1fbb01ull);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k));
  return h;
}

// Small counter-based generator (splitmix64). Streams are cheap to create, need
// no warm-up, and two streams with different seeds are effectively independent,
// which is what the per-sample derivation scheme relies on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); rejects the measure-zero 0 so log() stays finite.
  double uniform_open() noexcept {
    double u;
    do {
      u = uniform01();
    } while (u == 0.0);
    return u;
  }

  // Strictly positive exponential deviate.
  double exponential(double mean) noexcept {
    return -mean * std::log(uniform_open());
  }

  // Integer in [0, n), n >= 1. Bounded rejection keeps it exactly uniform.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace watrec

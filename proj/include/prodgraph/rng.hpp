#pragma once

#include <cmath>
#include <cstdint>

namespace prodgraph {

// Counter-based splittable generator. Every draw is a pure function of
// (seed, stream, counter), so independent substreams can be handed out to
// parallel workers and replayed in any order with identical results.
//
// The core mixer is the SplitMix64 finalizer; output k of a stream is the
// SplitMix64 sequence seeded with that stream's key, fetched at index k.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  // Child generator with an independent key.
  CounterRng split(std::uint64_t substream) const {
    CounterRng r(0);
    r.key_ = mix(key_ ^ mix(substream + 0x9e3779b97f4a7c15ULL));
    return r;
  }

  std::uint64_t raw(std::uint64_t counter) const {
    return mix(key_ + counter * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on (0, 1]; never returns 0 so log() is always safe.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>((raw(counter) >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal draw k, Box-Muller cosine branch over counters (2k, 2k+1).
  double normal(std::uint64_t k) const {
    const double u1 = uniform(2 * k);
    const double u2 = uniform(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Sequential convenience; state is just the next counter.
  double next_uniform() { return uniform(cursor_++); }
  double next_normal() { return normal(cursor_++); }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t key_;
  std::uint64_t cursor_ = 0;
};

}  // namespace prodgraph

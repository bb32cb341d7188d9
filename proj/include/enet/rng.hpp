#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace enet {

// splitmix64 step; the engine of choice for stable seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable replication-seed derivation: hash(master_seed, index).
// Replications and nested streams hang off a master seed through this
// function only, so a study is reproducible in any execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s = a ^ (0x632be59bd9b4e019ULL + index * 0x9e3779b97f4a7c15ULL);
  return splitmix64(s);
}

// Deterministic sampler. mt19937_64 output is fully specified by the
// standard and the transforms below avoid the implementation-defined
// std::*_distribution classes, so streams are identical across
// platforms and stdlib versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed ? seed : 0x853c49e6748fea9bULL) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Box-Muller; the spare value is cached, so draws come in a fixed order.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Independent child stream.
  Rng split() { return Rng(derive_seed(next_u64(), 0x5eedULL)); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace enet

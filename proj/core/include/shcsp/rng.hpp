#pragma once

#include <cstdint>
#include <random>

namespace shcsp {

/// splitmix64 finalizer; used to derive independent seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of run `index` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Seed of substream `stream` inside a run. Stream 0 drives the scheduler,
/// stream k+1 belongs to parallel component k.
std::uint64_t stream_seed(std::uint64_t run_seed, std::uint64_t stream);

/// Deterministic random source: 64-bit Mersenne Twister, 53-bit uniforms and
/// Box-Muller normals, so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace shcsp

#pragma once

#include <cstdint>
#include <random>

namespace latentconn {

/// Seeded random stream used for every stochastic step in the pipeline.
///
/// Raw bits come from std::mt19937_64 (the 64-bit Mersenne Twister, whose
/// output sequence is fixed by the C++ standard). The distribution
/// transforms are implemented here rather than taken from <random>, since
/// the standard leaves those implementation-defined:
///
///   uniform()  = (next() >> 11) * 2^-53               in [0, 1)
///   normal()   = Box-Muller on two uniforms, cosine branch only,
///                u1 replaced by 1 - u1 so the log argument is in (0, 1]
///
/// so any reimplementation seeded identically reproduces the stream.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Uniform integer in [0, n), by rejection to avoid modulo bias.
  std::uint64_t below(std::uint64_t n);

  /// Derive an independent child seed for a named sub-stream.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

private:
  std::mt19937_64 engine_;
};

}  // namespace latentconn

#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace semisup {

std::uint64_t splitmix64(std::uint64_t x);

// Seeded random stream. std::mt19937_64 output is fully specified by the
// standard; the draw transforms below replace the std::*_distribution
// classes, whose output is implementation-defined, so identical seeds give
// identical draws on every platform. Every stochastic operation in the
// library takes one of these streams explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  // Independent stream derived from (seed, tag). Distinct tags give
  // decorrelated streams for the same run seed.
  static Rng stream(std::uint64_t seed, std::uint64_t tag);

  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; exactly two uniform draws per pair.
  double normal();
  double normal(double mean, double sd);

  // Uniform integer in [0, n), unbiased (rejection sampling). n >= 1.
  std::uint64_t bounded(std::uint64_t n);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace semisup

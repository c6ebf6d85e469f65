#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "drdqn/tensor.hpp"

namespace drdqn::testing {

// Seeded case generator for property tests. Every property runs a fixed
// number of cases from a fixed seed so failures replay exactly.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(make_rng(seed, 99)) {}

  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  Tensor tensor(const Shape& shape, double lo = -1.0, double hi = 1.0) {
    Tensor t(shape);
    for (auto& v : t.data()) v = real(lo, hi);
    return t;
  }

  // Values drawn from a small set so ties actually occur.
  Tensor tied_tensor(std::size_t n) {
    Tensor t({n});
    for (auto& v : t.data()) v = static_cast<double>(index(0, 3)) * 0.5;
    return t;
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

}  // namespace drdqn::testing

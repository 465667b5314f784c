// SPDX-License-Identifier: Apache-2.0
#pragma once

// Small seeded generators for property tests.

#include <cstddef>
#include <string>
#include <vector>

#include "mmcr/backends/types.hpp"
#include "mmcr/common/hash.hpp"

namespace mmcr::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double real(double lo, double hi) { return rng_.uniform(lo, hi); }
  std::size_t size(std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng_.next() % (hi - lo + 1)); }
  bool coin() { return (rng_.next() & 1) != 0; }

  std::vector<double> vec(std::size_t n, double lo = -3.0, double hi = 3.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = real(lo, hi);
    return v;
  }

  // Strictly positive probabilities summing to 1.
  std::vector<double> distribution(std::size_t n) {
    std::vector<double> v = vec(n, 0.01, 1.0);
    double s = 0.0;
    for (double x : v) s += x;
    for (auto& x : v) x /= s;
    return v;
  }

  VisualFeatures patches(std::size_t rows, std::size_t cols, std::size_t dim) {
    return VisualFeatures{rows, cols, dim, vec(rows * cols * dim, -1.0, 1.0)};
  }

  std::string word() {
    static const char* kSyllables[] = {"ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "ze", "po"};
    std::string w;
    const std::size_t n = size(1, 3);
    for (std::size_t i = 0; i < n; ++i) w += kSyllables[rng_.next() % 10];
    return w;
  }

  std::string phrase(std::size_t lo, std::size_t hi) {
    std::string p;
    const std::size_t n = size(lo, hi);
    for (std::size_t i = 0; i < n; ++i) p += (i ? " " : "") + word();
    return p;
  }

 private:
  SplitMix64 rng_;
};

}  // namespace mmcr::testing

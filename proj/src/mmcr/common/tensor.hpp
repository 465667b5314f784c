// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mmcr {

// Dense row-major tensor of doubles. Rank 1 and 2 are all the models here use.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape_, double fill = 0.0);

  static Tensor vector(std::size_t n, double fill = 0.0) { return Tensor({n}, fill); }
  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }

  std::size_t size() const noexcept { return values.size(); }
  std::size_t rows() const noexcept { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const noexcept { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }

  bool operator==(const Tensor&) const = default;
};

// Named parameter tensors. Ordered so that iteration (checksums, checkpoint
// layout, gradient vectors) is deterministic.
using ParamSet = std::map<std::string, Tensor>;

std::size_t parameter_count(const ParamSet& params);

// SHA-256 over names, shapes and the raw little-endian IEEE-754 bytes.
std::string checksum(const ParamSet& params);

ParamSet zeros_like(const ParamSet& params);

// out = W x (+ b). W is rows x cols, x has cols entries.
void matvec(const Tensor& w, std::span<const double> x, std::span<double> out);
void matvec_add_bias(const Tensor& w, const Tensor& b, std::span<const double> x, std::span<double> out);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

}  // namespace mmcr

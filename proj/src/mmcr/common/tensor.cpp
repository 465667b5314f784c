// SPDX-License-Identifier: Apache-2.0
#include "mmcr/common/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>

#include "mmcr/common/hash.hpp"

namespace mmcr {

Tensor::Tensor(std::vector<std::size_t> shape_, double fill) : shape(std::move(shape_)) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  values.assign(n, fill);
}

std::size_t parameter_count(const ParamSet& params) {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.size();
  return n;
}

std::string checksum(const ParamSet& params) {
  static_assert(std::endian::native == std::endian::little, "checksums assume little-endian hosts");
  std::string buf;
  for (const auto& [name, t] : params) {
    buf += name;
    buf.push_back('\0');
    for (auto s : t.shape) {
      const auto dim = static_cast<std::uint64_t>(s);
      buf.append(reinterpret_cast<const char*>(&dim), sizeof dim);
    }
    buf.append(reinterpret_cast<const char*>(t.values.data()), t.values.size() * sizeof(double));
  }
  return sha256_hex(buf);
}

ParamSet zeros_like(const ParamSet& params) {
  ParamSet out;
  for (const auto& [name, t] : params) out.emplace(name, Tensor(t.shape, 0.0));
  return out;
}

void matvec(const Tensor& w, std::span<const double> x, std::span<double> out) {
  const std::size_t rows = w.rows(), cols = w.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w.values.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    out[r] = acc;
  }
}

void matvec_add_bias(const Tensor& w, const Tensor& b, std::span<const double> x, std::span<double> out) {
  matvec(w, x, out);
  for (std::size_t r = 0; r < out.size(); ++r) out[r] += b.values[r];
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace mmcr

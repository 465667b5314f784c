// SPDX-License-Identifier: Apache-2.0
#pragma once

// Independent reference implementations used as test oracles. They are
// written for clarity in long double and never call into the library.

#include <cmath>
#include <cstddef>
#include <vector>

namespace mmcr::oracle {

inline long double hinge_loss(const std::vector<double>& s, int y, double margin) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (static_cast<int>(i) == y) continue;
    const long double h = static_cast<long double>(margin) - s[static_cast<std::size_t>(y)] + s[i];
    if (h > 0.0L) total += h;
  }
  return total / static_cast<long double>(s.size());
}

inline std::vector<long double> softmax(const std::vector<double>& s) {
  std::vector<long double> e(s.size());
  long double z = 0.0L;
  for (std::size_t i = 0; i < s.size(); ++i) z += e[i] = std::exp(static_cast<long double>(s[i]));
  for (auto& v : e) v /= z;
  return e;
}

inline long double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  long double ab = 0.0L, aa = 0.0L, bb = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<long double>(a[i]) * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// Attention over identity-projected patches: weights and pooled vector.
struct Attention {
  std::vector<long double> weights;
  std::vector<long double> c;
};

inline Attention attention(const std::vector<double>& t, const std::vector<std::vector<double>>& patches) {
  const std::size_t d = t.size();
  Attention out;
  std::vector<long double> logits;
  long double mx = -INFINITY;
  for (const auto& v : patches) {
    long double l = 0.0L;
    for (std::size_t k = 0; k < d; ++k) l += static_cast<long double>(t[k]) * v[k];
    l /= std::sqrt(static_cast<long double>(d));
    logits.push_back(l);
    mx = std::max(mx, l);
  }
  long double z = 0.0L;
  for (auto& l : logits) z += l = std::exp(l - mx);
  out.c.assign(d, 0.0L);
  for (std::size_t i = 0; i < patches.size(); ++i) {
    out.weights.push_back(logits[i] / z);
    for (std::size_t k = 0; k < d; ++k) out.c[k] += out.weights.back() * patches[i][k];
  }
  return out;
}

}  // namespace mmcr::oracle

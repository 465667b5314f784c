// SPDX-License-Identifier: Apache-2.0
#include "mmcr/training/adapter_state.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "mmcr/common/error.hpp"
#include "mmcr/common/hash.hpp"

namespace mmcr {

namespace {

void fill_uniform(Tensor& t, double bound, std::uint64_t seed) {
  SplitMix64 gen(seed);
  for (auto& v : t.values) v = gen.uniform(-bound, bound);
}

void check_shape(const ParamSet& group, const std::string& name, std::vector<std::size_t> shape) {
  auto it = group.find(name);
  if (it == group.end()) fail(ErrorCode::InvalidInput, "adapter tensor missing: " + name);
  if (it->second.shape != shape) fail(ErrorCode::DimensionError, "adapter tensor has wrong shape: " + name);
}

void add_into(ParamSet& dst, const ParamSet& src) {
  for (auto& [name, t] : dst) {
    const auto& s = src.at(name).values;
    for (std::size_t i = 0; i < t.values.size(); ++i) t.values[i] += s[i];
  }
}

}  // namespace

AdapterState AdapterState::initialize(std::size_t text_dim, std::size_t visual_dim, int reduction_factor,
                                      std::uint64_t seed) {
  require(text_dim > 0 && visual_dim > 0, ErrorCode::InvalidInput, "adapter dimensions must be positive");
  require(reduction_factor > 0, ErrorCode::InvalidInput, "reduction factor must be positive");
  AdapterState s;
  s.text_dim = text_dim;
  s.visual_dim = visual_dim;
  s.reduction_factor = reduction_factor;
  const std::size_t r = s.bottleneck();
  const double down_bound = std::sqrt(3.0 / static_cast<double>(text_dim));

  // Up-projections start at zero so an untrained adapter leaves the backbone
  // output untouched.
  for (auto* group : {&s.lm, &s.itm}) {
    const std::string prefix = group == &s.lm ? "lm." : "itm.";
    Tensor down = Tensor::matrix(r, text_dim);
    fill_uniform(down, down_bound, combine(seed, fnv1a64(prefix + "down")));
    group->emplace(prefix + "down.weight", std::move(down));
    group->emplace(prefix + "down.bias", Tensor::vector(r));
    group->emplace(prefix + "up.weight", Tensor::matrix(text_dim, r));
    group->emplace(prefix + "up.bias", Tensor::vector(text_dim));
  }

  Tensor proj = Tensor::matrix(text_dim, visual_dim);
  if (text_dim == visual_dim) {
    for (std::size_t i = 0; i < text_dim; ++i) proj.at(i, i) = 1.0;
  } else {
    fill_uniform(proj, std::sqrt(6.0 / static_cast<double>(text_dim + visual_dim)),
                 combine(seed, fnv1a64("itm.proj")));
  }
  s.itm.emplace("itm.proj.weight", std::move(proj));
  s.itm.emplace("itm.proj.bias", Tensor::vector(text_dim));
  return s;
}

std::size_t AdapterState::bottleneck() const noexcept {
  return std::max<std::size_t>(1, text_dim / static_cast<std::size_t>(std::max(1, reduction_factor)));
}

std::size_t AdapterState::trainable_count() const noexcept {
  return parameter_count(lm) + parameter_count(itm) + parameter_count(backbone);
}

void AdapterState::validate() const {
  require(reduction_factor > 0, ErrorCode::InvalidInput, "reduction factor must be positive");
  for (const auto& [name, t] : lm) {
    require(name.rfind("lm.", 0) == 0, ErrorCode::InvalidInput, "LM adapter tensor outside lm.*: " + name);
    require(!itm.contains(name), ErrorCode::InvalidInput, "adapter name sets intersect at " + name);
  }
  for (const auto& [name, t] : itm) {
    require(name.rfind("itm.", 0) == 0, ErrorCode::InvalidInput, "ITM adapter tensor outside itm.*: " + name);
  }
  for (const auto& [name, t] : backbone) {
    require(name.rfind("lm.", 0) != 0 && name.rfind("itm.", 0) != 0, ErrorCode::InvalidInput,
            "backbone tensor carries an adapter prefix: " + name);
  }
  const std::size_t r = bottleneck();
  for (const std::string prefix : {"lm.", "itm."}) {
    const auto& group = prefix == "lm." ? lm : itm;
    check_shape(group, prefix + "down.weight", {r, text_dim});
    check_shape(group, prefix + "down.bias", {r});
    check_shape(group, prefix + "up.weight", {text_dim, r});
    check_shape(group, prefix + "up.bias", {text_dim});
  }
  check_shape(itm, "itm.proj.weight", {text_dim, visual_dim});
  check_shape(itm, "itm.proj.bias", {text_dim});
}

std::string AdapterState::checksum() const {
  ParamSet all = lm;
  all.insert(itm.begin(), itm.end());
  all.insert(backbone.begin(), backbone.end());
  return mmcr::checksum(all);
}

AdapterGrads AdapterGrads::zeros_for(const AdapterState& state, const ParamSet& trainable_backbone) {
  return {zeros_like(state.lm), zeros_like(state.itm), zeros_like(trainable_backbone)};
}

void AdapterGrads::scale(double factor) {
  for (auto* group : {&lm, &itm, &backbone}) {
    for (auto& [name, t] : *group) {
      for (auto& v : t.values) v *= factor;
    }
  }
}

void AdapterGrads::add(const AdapterGrads& other) {
  add_into(lm, other.lm);
  add_into(itm, other.itm);
  add_into(backbone, other.backbone);
}

}  // namespace mmcr

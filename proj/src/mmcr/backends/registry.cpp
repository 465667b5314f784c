// SPDX-License-Identifier: Apache-2.0
#include "mmcr/backends/registry.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>

#include "mmcr/backends/stub_image.hpp"
#include "mmcr/backends/toy_text.hpp"
#include "mmcr/common/error.hpp"
#include "mmcr/common/text.hpp"

namespace mmcr {

namespace {

constexpr BackendKind kAllKinds[] = {BackendKind::TextScorer, BackendKind::VisualEncoder, BackendKind::T2IGenerator,
                                     BackendKind::Captioner};

std::int64_t parse_config_value(const std::string& key, const std::string& text) {
  if (key == "mode") {
    if (text == "masked") return 0;
    if (text == "autoregressive") return 1;
  }
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorCode::UsageError, "backend option " + key + " expects an integer, got '" + text + "'");
  }
  return value;
}

}  // namespace

BackendDescriptor parse_backend_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) fail(ErrorCode::UsageError, "backend spec must look like kind=name: " + spec);
  BackendDescriptor d;
  d.kind = parse_backend_kind(trim(spec.substr(0, eq)));
  std::string rest = spec.substr(eq + 1);
  const auto colon = rest.find(':');
  d.name = trim(rest.substr(0, colon));
  if (d.name.empty()) fail(ErrorCode::UsageError, "backend spec has no name: " + spec);
  if (colon != std::string::npos) {
    std::string opts = rest.substr(colon + 1);
    std::size_t start = 0;
    while (start <= opts.size()) {
      const auto comma = std::min(opts.find(',', start), opts.size());
      const std::string item = trim(opts.substr(start, comma - start));
      if (!item.empty()) {
        const auto kv = item.find('=');
        if (kv == std::string::npos) fail(ErrorCode::UsageError, "backend option must be key=value: " + item);
        const std::string key = trim(item.substr(0, kv));
        d.config[key] = parse_config_value(key, trim(item.substr(kv + 1)));
      }
      start = comma + 1;
    }
  }
  d.validate();
  return d;
}

std::vector<BackendDescriptor> resolve_backends(
    const std::vector<std::string>& specs,
    const std::function<std::optional<std::string>(const std::string&)>& getenv) {
  std::map<BackendKind, BackendDescriptor> chosen;
  for (const auto& s : specs) {
    auto d = parse_backend_spec(s);
    if (!chosen.emplace(d.kind, d).second) {
      fail(ErrorCode::UsageError, "backend kind given twice: " + to_string(d.kind));
    }
  }
  std::vector<BackendDescriptor> out;
  for (BackendKind kind : kAllKinds) {
    auto it = chosen.find(kind);
    if (it != chosen.end()) {
      out.push_back(it->second);
      continue;
    }
    std::string var = "MMCR_BACKEND_" + to_string(kind);
    std::transform(var.begin(), var.end(), var.begin(), [](unsigned char c) { return std::toupper(c); });
    if (auto env = getenv ? getenv(var) : std::nullopt; env && !env->empty()) {
      // The variable may hold either "name[:opts]" or a full "kind=name[:opts]".
      auto d = parse_backend_spec(env->find('=') != std::string::npos && env->find('=') < env->find(':')
                                      ? *env
                                      : to_string(kind) + "=" + *env);
      require(d.kind == kind, ErrorCode::UsageError, var + " names a different backend kind");
      out.push_back(std::move(d));
    } else {
      out.push_back(BackendDescriptor{kind, "stub", {}});
    }
  }
  return out;
}

Backends make_backends(const std::vector<BackendDescriptor>& descriptors) {
  Backends b;
  for (const auto& d : descriptors) {
    if (d.name != "stub") {
      fail(ErrorCode::UsageError, "no built-in " + to_string(d.kind) + " backend named '" + d.name +
                                      "' (only 'stub' ships with this build)");
    }
    switch (d.kind) {
      case BackendKind::TextScorer: b.text = std::make_shared<ToyTextScorer>(d); break;
      case BackendKind::VisualEncoder: b.vision = std::make_shared<StubVisualEncoder>(d); break;
      case BackendKind::T2IGenerator: b.generator = std::make_shared<StubImageGenerator>(d); break;
      case BackendKind::Captioner: b.captioner = std::make_shared<StubCaptioner>(d); break;
    }
  }
  if (!b.text) b.text = std::make_shared<ToyTextScorer>(BackendDescriptor{BackendKind::TextScorer, "stub", {}});
  if (!b.vision) b.vision = std::make_shared<StubVisualEncoder>(BackendDescriptor{BackendKind::VisualEncoder, "stub", {}});
  if (!b.generator) {
    b.generator = std::make_shared<StubImageGenerator>(BackendDescriptor{BackendKind::T2IGenerator, "stub", {}});
  }
  if (!b.captioner) b.captioner = std::make_shared<StubCaptioner>(BackendDescriptor{BackendKind::Captioner, "stub", {}});
  return b;
}

Backends default_backends() { return make_backends({}); }

std::vector<BackendDescriptor> Backends::descriptors() const {
  std::vector<BackendDescriptor> out;
  if (text) out.push_back(text->descriptor());
  if (vision) out.push_back(vision->descriptor());
  if (generator) out.push_back(generator->descriptor());
  if (captioner) out.push_back(captioner->descriptor());
  return out;
}

ParamSet Backends::frozen_parameters() const {
  ParamSet all;
  if (text) all.merge(text->frozen_parameters());
  if (vision) all.merge(vision->frozen_parameters());
  return all;
}

}  // namespace mmcr

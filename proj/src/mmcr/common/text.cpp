// SPDX-License-Identifier: Apache-2.0
#include "mmcr/common/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace mmcr {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

bool attaches_left(std::string_view tok) {
  static constexpr std::array<std::string_view, 13> kAttach = {
      ".", ",", "?", "!", ";", ":", ")", "'s", "'re", "'ll", "n't", "'m", "'ve"};
  return std::find(kAttach.begin(), kAttach.end(), tok) != kAttach.end();
}

}  // namespace

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  bool after_open = false;
  for (const auto& tok : tokens) {
    if (tok.empty()) continue;
    if (!out.empty() && !attaches_left(tok) && !after_open) out.push_back(' ');
    out += tok;
    after_open = (tok == "(");
  }
  return out;
}

bool is_stopword(std::string_view t) {
  static constexpr std::array<std::string_view, 48> kStop = {
      "a",    "an",   "the",  "to",   "of",   "in",   "on",   "at",   "for",  "with",
      "and",  "or",   "but",  "is",   "are",  "was",  "were", "be",   "been", "it",
      "its",  "as",   "by",   "from", "that", "this", "so",   "if",   "then", "than",
      "will", "would", "do",  "does", "did",  "has",  "have", "had",  "up",   "out",
      "into", "about", "very", "not", "no",   "s",    "what", "who"};
  return std::find(kStop.begin(), kStop.end(), t) != kStop.end();
}

std::vector<std::string> content_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto& tok : tokenize(text)) {
    if (!is_stopword(tok)) out.push_back(std::move(tok));
  }
  return out;
}

std::string trim(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

}  // namespace mmcr

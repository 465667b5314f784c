// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mmcr {

// Lower-cased alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);

// Joins surface tokens with single spaces, attaching closing punctuation and
// clitics ("'s", "n't") to the preceding token.
std::string detokenize(const std::vector<std::string>& tokens);

bool is_stopword(std::string_view lowercase_token);

// Content words of a text: tokens that are not stopwords.
std::vector<std::string> content_words(std::string_view text);

std::string trim(std::string_view text);

}  // namespace mmcr

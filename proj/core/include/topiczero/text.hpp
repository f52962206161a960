#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace topiczero::text {

/// Strips leading/trailing ASCII whitespace.
std::string_view trim(std::string_view s) noexcept;

/// Lowercased word tokens. A word is a maximal run of Unicode letters and
/// digits; everything else separates words. Invalid UTF-8 bytes act as
/// separators.
std::vector<std::string> word_tokens(std::string_view text);

/// All n-grams with lo <= n <= hi over `tokens`, joined by single spaces,
/// in order of position then length.
std::vector<std::string> ngrams(const std::vector<std::string>& tokens,
                                std::size_t lo, std::size_t hi);

/// Word tokens with stopwords removed, then n-grams over the survivors.
std::vector<std::string> analyze(std::string_view text, std::size_t lo,
                                 std::size_t hi,
                                 const std::unordered_set<std::string>& stopwords);

/// Number of whitespace-separated tokens in `text`.
std::size_t count_whitespace_tokens(std::string_view text) noexcept;

/// The prefix of `text` ending after its `max_tokens`-th whitespace token.
/// Texts with at most `max_tokens` tokens are returned unchanged.
std::string_view truncate_whitespace_tokens(std::string_view text,
                                            std::size_t max_tokens) noexcept;

}  // namespace topiczero::text

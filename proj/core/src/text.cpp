#include "topiczero/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace topiczero::text {
namespace {

bool is_ascii_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

void append_utf8(std::string& out, UChar32 cp) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, cp, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

std::string_view trim(std::string_view s) noexcept {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 cp;
    U8_NEXT(bytes, i, length, cp);
    if (cp >= 0 && u_isalnum(cp)) {
      append_utf8(current, u_tolower(cp));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> ngrams(const std::vector<std::string>& tokens,
                                std::size_t lo, std::size_t hi) {
  std::vector<std::string> out;
  if (lo == 0) lo = 1;
  for (std::size_t start = 0; start < tokens.size(); ++start) {
    std::string gram;
    for (std::size_t n = 1; n <= hi && start + n <= tokens.size(); ++n) {
      if (n > 1) gram += ' ';
      gram += tokens[start + n - 1];
      if (n >= lo) out.push_back(gram);
    }
  }
  return out;
}

std::vector<std::string> analyze(std::string_view text, std::size_t lo,
                                 std::size_t hi,
                                 const std::unordered_set<std::string>& stopwords) {
  auto tokens = word_tokens(text);
  if (!stopwords.empty()) {
    std::erase_if(tokens, [&](const std::string& t) { return stopwords.contains(t); });
  }
  return ngrams(tokens, lo, hi);
}

std::size_t count_whitespace_tokens(std::string_view text) noexcept {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_ascii_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

std::string_view truncate_whitespace_tokens(std::string_view text,
                                            std::size_t max_tokens) noexcept {
  if (count_whitespace_tokens(text) <= max_tokens) return text;
  std::size_t seen = 0;
  bool in_token = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_ascii_space(text[i])) {
      if (in_token && seen == max_tokens) return text.substr(0, i);
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++seen;
    }
  }
  return text;
}

}  // namespace topiczero::text

#include "dstrc/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace dstrc {

namespace {

constexpr std::string_view kSplitPunct = ".,?!'\":";

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  std::string spaced;
  spaced.reserve(raw.size() + raw.size() / 4);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (is_space(c)) {
      spaced.push_back(' ');
      continue;
    }
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (kSplitPunct.find(c) != std::string_view::npos) {
      const bool time_colon =
          c == ':' && i > 0 && i + 1 < raw.size() && is_digit(raw[i - 1]) && is_digit(raw[i + 1]);
      if (!time_colon) {
        spaced.push_back(' ');
        spaced.push_back(c);
        spaced.push_back(' ');
        continue;
      }
    }
    spaced.push_back(c);
  }

  std::string out;
  out.reserve(spaced.size());
  for (char c : spaced) {
    if (c == ' ') {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<Token> tokenize(std::string_view normalized) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < normalized.size()) {
    while (i < normalized.size() && is_space(normalized[i])) ++i;
    const std::size_t start = i;
    while (i < normalized.size() && !is_space(normalized[i])) ++i;
    if (i > start) {
      Token t;
      t.text = std::string(normalized.substr(start, i - start));
      t.char_start = start;
      t.char_end = i;
      tokens.push_back(std::move(t));
    }
  }
  return tokens;
}

std::vector<std::string> split_tokens(std::string_view normalized) {
  std::vector<std::string> out;
  for (auto& t : tokenize(normalized)) out.push_back(std::move(t.text));
  return out;
}

std::optional<TokenSpan> find_last_subsequence(std::span<const std::string> haystack,
                                               std::span<const std::string> needle,
                                               std::size_t from) {
  if (needle.empty() || haystack.size() < needle.size()) return std::nullopt;
  for (std::size_t start = haystack.size() - needle.size() + 1; start-- > from;) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + start)) {
      return TokenSpan{start, start + needle.size() - 1};
    }
  }
  return std::nullopt;
}

std::string join_tokens(std::span<const Token> tokens, std::size_t first, std::size_t last) {
  std::string out;
  for (std::size_t i = first; i <= last && i < tokens.size(); ++i) {
    if (i > first) out.push_back(' ');
    out += tokens[i].text;
  }
  return out;
}

bool is_none_literal(std::string_view normalized) {
  static constexpr std::array<std::string_view, 5> kNone = {"", "none", "not mentioned",
                                                            "not given", "no mentioned"};
  return std::find(kNone.begin(), kNone.end(), normalized) != kNone.end();
}

bool is_dont_care_literal(std::string_view normalized) {
  static constexpr std::array<std::string_view, 8> kDontCare = {
      "dontcare",       "dont care",  "don ' t care",   "do not care",
      "do n ' t care", "do nt care", "doesn ' t care", "does not care"};
  return std::find(kDontCare.begin(), kDontCare.end(), normalized) != kDontCare.end();
}

}  // namespace dstrc

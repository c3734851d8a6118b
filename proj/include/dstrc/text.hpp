#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dstrc/types.hpp"

namespace dstrc {

/// Lowercases ASCII, splits the punctuation marks . , ? ! ' " : into
/// standalone tokens (a ':' directly between two digits, as in "15:29", is
/// kept), collapses whitespace runs and trims. Idempotent.
std::string normalize_text(std::string_view raw);

/// Whitespace tokenization of already-normalized text. Offsets are byte
/// offsets into `normalized`, end-exclusive. Tokens get turn 0 / user speaker;
/// callers that know better overwrite them.
std::vector<Token> tokenize(std::string_view normalized);

/// Splits normalized text into token strings.
std::vector<std::string> split_tokens(std::string_view normalized);

/// Inclusive token range.
using TokenSpan = std::pair<std::size_t, std::size_t>;

/// Last position where `needle` occurs as a contiguous token subsequence of
/// `haystack`, searching indices >= `from`. Empty needles never match.
std::optional<TokenSpan> find_last_subsequence(std::span<const std::string> haystack,
                                               std::span<const std::string> needle,
                                               std::size_t from = 0);

/// Joins tokens [first, last] with single spaces.
std::string join_tokens(std::span<const Token> tokens, std::size_t first, std::size_t last);

/// Recognizers for annotation strings that encode None / DontCare.
bool is_none_literal(std::string_view normalized);
bool is_dont_care_literal(std::string_view normalized);

}  // namespace dstrc

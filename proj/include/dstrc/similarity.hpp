#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace dstrc {

struct MatchingBlock {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t size = 0;
  friend bool operator==(const MatchingBlock&, const MatchingBlock&) = default;
};

/// Ratcliff–Obershelp decomposition: take the longest common contiguous
/// block (earliest in `a`, then earliest in `b` on ties), recurse on the
/// pieces left and right of it. Blocks come back sorted by position, with
/// touching blocks fused. This is the decomposition of difflib.SequenceMatcher
/// without the junk heuristic; comparison is bytewise, which equals difflib on
/// ASCII text.
std::vector<MatchingBlock> matching_blocks(std::string_view a, std::string_view b);

/// 2*M / (|a| + |b|) where M is the total size of the matching blocks;
/// 1.0 for two empty strings.
double similarity_ratio(std::string_view a, std::string_view b);

}  // namespace dstrc

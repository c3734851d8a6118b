#include "dstrc/similarity.hpp"

#include <algorithm>
#include <tuple>

namespace dstrc {

namespace {

MatchingBlock longest_match(std::string_view a, std::string_view b, std::size_t alo, std::size_t ahi,
                            std::size_t blo, std::size_t bhi) {
  MatchingBlock best{alo, blo, 0};
  // run[j + 1] = length of the common suffix ending at a[i-1], b[j].
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = alo; i < ahi; ++i) {
    for (std::size_t j = blo; j < bhi; ++j) {
      if (a[i] == b[j]) {
        const std::size_t k = (j > blo ? prev[j] : 0) + 1;
        cur[j + 1] = k;
        if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
      } else {
        cur[j + 1] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

}  // namespace

std::vector<MatchingBlock> matching_blocks(std::string_view a, std::string_view b) {
  std::vector<MatchingBlock> blocks;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> queue{{0, a.size(), 0, b.size()}};
  while (!queue.empty()) {
    const auto [alo, ahi, blo, bhi] = queue.back();
    queue.pop_back();
    const MatchingBlock m = longest_match(a, b, alo, ahi, blo, bhi);
    if (m.size == 0) continue;
    blocks.push_back(m);
    if (alo < m.a && blo < m.b) queue.emplace_back(alo, m.a, blo, m.b);
    if (m.a + m.size < ahi && m.b + m.size < bhi) queue.emplace_back(m.a + m.size, ahi, m.b + m.size, bhi);
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const MatchingBlock& x, const MatchingBlock& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  // Fuse blocks that touch in both strings.
  std::vector<MatchingBlock> merged;
  for (const auto& m : blocks) {
    if (!merged.empty() && merged.back().a + merged.back().size == m.a && merged.back().b + merged.back().size == m.b) {
      merged.back().size += m.size;
    } else {
      merged.push_back(m);
    }
  }
  return merged;
}

double similarity_ratio(std::string_view a, std::string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  std::size_t matched = 0;
  for (const auto& m : matching_blocks(a, b)) matched += m.size;
  return 2.0 * static_cast<double>(matched) / static_cast<double>(total);
}

}  // namespace dstrc

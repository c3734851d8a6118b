#pragma once

#include <optional>
#include <vector>

#include "dstrc/types.hpp"

namespace dstrc {

/// Raw per-token scores from a span reader, one entry per context token
/// including the sentinel at index 0.
struct SpanScores {
  std::vector<double> start_logits;
  std::vector<double> end_logits;
  /// Set only by in-process verification readers (the oracle) when the gold
  /// value has no span in the context. Never carried on the wire protocol.
  std::optional<SlotValue> forced_value;
};

struct ChoiceScores {
  std::vector<double> option_logits;
  std::optional<SlotValue> forced_value;
};

}  // namespace dstrc

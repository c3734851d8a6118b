#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dstrc/corpus.hpp"
#include "dstrc/examplegen.hpp"
#include "dstrc/scores.hpp"

namespace dstrc {

struct DecodeConfig {
  std::size_t max_span_len = 10;
  double null_threshold = 0.0;
  bool canonicalize = true;
  double similarity_cutoff = 0.6;

  /// Throws kInvalidConfig.
  void validate() const;
};

nlohmann::json to_json(const DecodeConfig& config);

struct Evidence {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  std::string text;
  friend bool operator==(const Evidence&, const Evidence&) = default;
};

struct SlotPrediction {
  SlotName slot;
  SlotValue value;
  std::optional<Evidence> evidence;
  double score = 0.0;
};

/// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> logits);

struct SpanDecision {
  ValueKind kind = ValueKind::kNone;  // kNone or kValue
  std::size_t start = 0;
  std::size_t end = 0;
  double score = 0.0;
  friend bool operator==(const SpanDecision&, const SpanDecision&) = default;
};

/// Best (i, j) with 1 <= i <= j <= i + max_span_len - 1 by start[i] + end[j],
/// ties to smaller i then smaller j. None when start[0] + end[0] + threshold
/// >= best. Throws kShapeMismatch when the vectors disagree with the context.
SpanDecision decode_span(const SpanScores& scores, const SerializedContext& context,
                         const DecodeConfig& config);

struct ChoiceDecision {
  SlotValue value;
  std::size_t index = 0;
  double probability = 0.0;
};

/// Argmax option (ties to the lowest index). "not mentioned" is None and
/// "do not care" DontCare. Throws kShapeMismatch.
ChoiceDecision decode_choice(const ChoiceScores& scores, std::span<const std::string> options);

struct Canonicalized {
  std::string text;
  /// The (aliased) input was a candidate or a candidate reached the cutoff.
  bool matched = false;
};

/// Maps a decoded span to the closest ontology value of `slot` by
/// similarity_ratio(candidate, span). Below the cutoff the span comes back
/// unchanged. Ties go to the earlier candidate. Does not look at
/// config.canonicalize. Throws kUnknownSlotInOntology.
Canonicalized canonicalize_detail(const std::string& span_text, const SlotName& slot,
                                  const Ontology& ontology, const DecodeConfig& config);

std::string canonicalize(const std::string& span_text, const SlotName& slot, const Ontology& ontology,
                         const DecodeConfig& config);

/// Phrases that mark a user utterance as expressing no preference.
const std::vector<std::vector<std::string>>& dont_care_phrases();

/// Full span-reader path: decode, map user-utterance "no preference" spans to
/// DontCare, canonicalize when enabled.
SlotPrediction predict_from_span(const SpanScores& scores, const SerializedContext& context,
                                 const SlotName& slot, const Ontology& ontology, const DecodeConfig& config);

SlotPrediction predict_from_choice(const ChoiceScores& scores, std::span<const std::string> options,
                                   const SlotName& slot);

}  // namespace dstrc

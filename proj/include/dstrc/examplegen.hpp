#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dstrc/corpus.hpp"
#include "dstrc/text.hpp"

namespace dstrc {

/// Position-0 token. The pair (0, 0) is the "no answer" span.
inline constexpr std::string_view kSentinelToken = "[ctx]";
inline constexpr std::string_view kDontCareOption = "do not care";
inline constexpr std::string_view kNotMentionedOption = "not mentioned";

/// Half-open token index ranges of one turn inside a serialized context.
struct TurnRange {
  std::size_t user_begin = 0;
  std::size_t user_end = 0;
  std::size_t agent_begin = 0;
  std::size_t agent_end = 0;  // == agent_begin when the agent utterance is excluded/absent
};

struct SerializedContext {
  /// Normalized utterances u_1 a_1 ... u_t joined by single spaces; token
  /// offsets point into this string.
  std::string text;
  std::vector<Token> tokens;
  std::map<int, TurnRange> turn_boundaries;

  std::vector<std::string> token_texts() const;
};

/// Sentinel followed by u_1, a_1, ..., a_{t-1}, u_t. Throws kTurnOutOfRange.
SerializedContext serialize_context(const Dialogue& dialogue, int turn_index);

/// Last occurrence of any normalized alternative of `gold` (a concrete value).
std::optional<TokenSpan> find_value_span(const SerializedContext& context, const SlotValue& gold);

struct SpanExample {
  std::string dialogue_id;
  int turn_index = 0;
  SlotName slot;
  std::string question;
  SerializedContext context;
  std::size_t answer_start = 0;
  std::size_t answer_end = 0;  // inclusive
  ValueKind answer_kind = ValueKind::kNone;
  SlotValue gold_value;

  std::string id() const;
};

struct ChoiceExample {
  std::string dialogue_id;
  int turn_index = 0;
  SlotName slot;
  std::string question;
  SerializedContext context;
  std::vector<std::string> options;
  std::size_t gold_index = 0;

  std::string id() const;
};

using RCExample = std::variant<SpanExample, ChoiceExample>;

/// Answer span for the gold value of `slot` at `turn_index`: (0,0) for None,
/// the whole user utterance of the earliest DontCare turn for DontCare, the
/// last matching span for a concrete value. Absent when a concrete value (or
/// an empty DontCare utterance) cannot be located.
std::optional<SpanExample> make_span_example(const Dialogue& dialogue, int turn_index,
                                             const SlotSpec& spec);

/// `choice_values` followed by "do not care" and "not mentioned".
std::vector<std::string> choice_options(const SlotSpec& spec);

/// Throws kValueNotInOntology when a concrete gold value (after aliasing) is
/// not among the options.
ChoiceExample make_choice_example(const Dialogue& dialogue, int turn_index, const SlotSpec& spec,
                                  const Ontology& ontology);

enum class GenerationMode { kSpan, kChoice, kBoth };

struct GenerationReport {
  std::size_t total = 0;
  std::size_t span_none = 0;
  std::size_t span_dont_care = 0;
  std::size_t span_value = 0;
  std::size_t choice = 0;
  std::size_t choice_positive = 0;  // gold is not "not mentioned"
  std::size_t unspannable = 0;

  std::size_t positive() const { return span_dont_care + span_value; }
  GenerationReport& operator+=(const GenerationReport& other);
  friend bool operator==(const GenerationReport&, const GenerationReport&) = default;
};

using ExampleSink = std::function<void(const RCExample&)>;

/// Emits every example for every (dialogue, turn, applicable slot), in corpus
/// order. Dialogues are processed on up to `jobs` threads; emission order
/// does not depend on `jobs`.
GenerationReport generate_corpus(const DialogueCorpus& corpus, const std::vector<SlotSpec>& specs,
                                 GenerationMode mode, const ExampleSink& sink, unsigned jobs = 1);

nlohmann::json to_json(const SpanExample& example);
nlohmann::json to_json(const ChoiceExample& example);
nlohmann::json to_json(const GenerationReport& report);

}  // namespace dstrc

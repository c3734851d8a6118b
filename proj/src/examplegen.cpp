#include "dstrc/examplegen.hpp"

#include <algorithm>

#include "dstrc/error.hpp"
#include "dstrc/parallel.hpp"

namespace dstrc {

using nlohmann::json;

namespace {

// Appends the tokens of one utterance, returning its half-open token range.
std::pair<std::size_t, std::size_t> append_utterance(SerializedContext& ctx, std::string_view raw,
                                                     int turn_index, Speaker speaker) {
  const std::string norm = normalize_text(raw);
  const std::size_t begin = ctx.tokens.size();
  if (norm.empty()) return {begin, begin};
  if (!ctx.text.empty()) ctx.text.push_back(' ');
  const std::size_t base = ctx.text.size();
  ctx.text += norm;
  for (auto& tok : tokenize(norm)) {
    tok.char_start += base;
    tok.char_end += base;
    tok.turn_index = turn_index;
    tok.speaker = speaker;
    ctx.tokens.push_back(std::move(tok));
  }
  return {begin, ctx.tokens.size()};
}

std::string example_id(const std::string& dialogue_id, int turn, const SlotName& slot,
                       std::string_view kind) {
  return dialogue_id + "/" + std::to_string(turn) + "/" + slot.str() + "/" + std::string(kind);
}

}  // namespace

std::vector<std::string> SerializedContext::token_texts() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

SerializedContext serialize_context(const Dialogue& dialogue, int turn_index) {
  if (turn_index < 1 || turn_index > static_cast<int>(dialogue.turns.size())) {
    throw Error(ErrorCode::kTurnOutOfRange, dialogue.id + ": turn " + std::to_string(turn_index) +
                                                " not in [1, " + std::to_string(dialogue.turns.size()) + "]");
  }
  SerializedContext ctx;
  Token sentinel;
  sentinel.text = std::string(kSentinelToken);
  sentinel.speaker = Speaker::kSentinel;
  ctx.tokens.push_back(std::move(sentinel));

  for (int t = 1; t <= turn_index; ++t) {
    const Turn& turn = dialogue.turns[static_cast<std::size_t>(t - 1)];
    TurnRange range;
    std::tie(range.user_begin, range.user_end) =
        append_utterance(ctx, turn.user_utterance, t, Speaker::kUser);
    range.agent_begin = range.agent_end = ctx.tokens.size();
    if (t < turn_index && turn.agent_utterance) {
      std::tie(range.agent_begin, range.agent_end) =
          append_utterance(ctx, *turn.agent_utterance, t, Speaker::kAgent);
    }
    ctx.turn_boundaries.emplace(t, range);
  }
  return ctx;
}

std::optional<TokenSpan> find_value_span(const SerializedContext& context, const SlotValue& gold) {
  const auto haystack = context.token_texts();
  std::optional<TokenSpan> best;
  for (const auto& alt : gold.alternatives()) {
    const auto needle = split_tokens(normalize_text(alt));
    // Index 0 is the sentinel and never part of a value span.
    auto hit = find_last_subsequence(haystack, needle, 1);
    if (hit && (!best || hit->first > best->first ||
                (hit->first == best->first && hit->second > best->second))) {
      best = hit;
    }
  }
  return best;
}

std::string SpanExample::id() const { return example_id(dialogue_id, turn_index, slot, "span"); }
std::string ChoiceExample::id() const { return example_id(dialogue_id, turn_index, slot, "choice"); }

std::optional<SpanExample> make_span_example(const Dialogue& dialogue, int turn_index,
                                             const SlotSpec& spec) {
  SpanExample ex;
  ex.dialogue_id = dialogue.id;
  ex.turn_index = turn_index;
  ex.slot = spec.slot;
  ex.question = spec.question;
  ex.context = serialize_context(dialogue, turn_index);
  ex.gold_value = dialogue.turns[static_cast<std::size_t>(turn_index - 1)].gold(spec.slot);
  ex.answer_kind = ex.gold_value.kind();

  switch (ex.gold_value.kind()) {
    case ValueKind::kNone:
      ex.answer_start = ex.answer_end = 0;
      return ex;
    case ValueKind::kDontCare: {
      int first = turn_index;
      for (int t = 1; t <= turn_index; ++t) {
        if (dialogue.turns[static_cast<std::size_t>(t - 1)].gold(spec.slot).is_dont_care()) {
          first = t;
          break;
        }
      }
      const TurnRange& range = ex.context.turn_boundaries.at(first);
      if (range.user_end == range.user_begin) return std::nullopt;
      ex.answer_start = range.user_begin;
      ex.answer_end = range.user_end - 1;
      return ex;
    }
    case ValueKind::kValue: {
      auto span = find_value_span(ex.context, ex.gold_value);
      if (!span) return std::nullopt;
      std::tie(ex.answer_start, ex.answer_end) = *span;
      return ex;
    }
  }
  return std::nullopt;
}

std::vector<std::string> choice_options(const SlotSpec& spec) {
  std::vector<std::string> options = spec.choice_values;
  options.emplace_back(kDontCareOption);
  options.emplace_back(kNotMentionedOption);
  return options;
}

ChoiceExample make_choice_example(const Dialogue& dialogue, int turn_index, const SlotSpec& spec,
                                  const Ontology& ontology) {
  ChoiceExample ex;
  ex.dialogue_id = dialogue.id;
  ex.turn_index = turn_index;
  ex.slot = spec.slot;
  ex.question = spec.question;
  ex.context = serialize_context(dialogue, turn_index);
  ex.options = choice_options(spec);

  const SlotValue gold = dialogue.turns[static_cast<std::size_t>(turn_index - 1)].gold(spec.slot);
  const auto index_of = [&](std::string_view text) -> std::optional<std::size_t> {
    // Reserved options are the last two entries.
    const std::size_t n = ex.options.size() - 2;
    for (std::size_t i = 0; i < n; ++i) {
      if (ex.options[i] == text) return i;
    }
    return std::nullopt;
  };

  switch (gold.kind()) {
    case ValueKind::kNone:
      ex.gold_index = ex.options.size() - 1;
      break;
    case ValueKind::kDontCare:
      ex.gold_index = ex.options.size() - 2;
      break;
    case ValueKind::kValue: {
      std::optional<std::size_t> hit;
      for (const auto& alt : gold.alternatives()) {
        if ((hit = index_of(ontology.resolve_alias(alt)))) break;
      }
      if (!hit) {
        throw Error(ErrorCode::kValueNotInOntology, dialogue.id + " turn " + std::to_string(turn_index) +
                                                        " " + spec.slot.str() + ": '" + gold.raw() + "'");
      }
      ex.gold_index = *hit;
      break;
    }
  }
  return ex;
}

GenerationReport& GenerationReport::operator+=(const GenerationReport& other) {
  total += other.total;
  span_none += other.span_none;
  span_dont_care += other.span_dont_care;
  span_value += other.span_value;
  choice += other.choice;
  choice_positive += other.choice_positive;
  unspannable += other.unspannable;
  return *this;
}

GenerationReport generate_corpus(const DialogueCorpus& corpus, const std::vector<SlotSpec>& specs,
                                 GenerationMode mode, const ExampleSink& sink, unsigned jobs) {
  const bool want_span = mode != GenerationMode::kChoice;
  const bool want_choice = mode != GenerationMode::kSpan;

  struct Batch {
    std::vector<RCExample> examples;
    GenerationReport report;
  };
  std::vector<Batch> batches(corpus.dialogues.size());

  parallel_for(corpus.dialogues.size(), jobs, [&](std::size_t di) {
    const Dialogue& d = corpus.dialogues[di];
    Batch& batch = batches[di];
    for (int t = 1; t <= static_cast<int>(d.turns.size()); ++t) {
      for (const auto& spec : specs) {
        if (want_choice && spec.is_categorical) {
          auto ex = make_choice_example(d, t, spec, corpus.ontology);
          ++batch.report.choice;
          if (ex.gold_index + 1 != ex.options.size()) ++batch.report.choice_positive;
          batch.examples.emplace_back(std::move(ex));
        }
        if (want_span && spec.is_extractive) {
          auto ex = make_span_example(d, t, spec);
          if (!ex) {
            ++batch.report.unspannable;
            continue;
          }
          switch (ex->answer_kind) {
            case ValueKind::kNone: ++batch.report.span_none; break;
            case ValueKind::kDontCare: ++batch.report.span_dont_care; break;
            case ValueKind::kValue: ++batch.report.span_value; break;
          }
          batch.examples.emplace_back(*std::move(ex));
        }
      }
    }
    batch.report.total = batch.examples.size();
  });

  GenerationReport report;
  for (auto& batch : batches) {
    report += batch.report;
    for (const auto& ex : batch.examples) sink(ex);
  }
  return report;
}

json to_json(const SpanExample& ex) {
  return json{{"type", "span"},
              {"id", ex.id()},
              {"slot", ex.slot.str()},
              {"question", ex.question},
              {"tokens", ex.context.token_texts()},
              {"answer",
               {{"start", ex.answer_start}, {"end", ex.answer_end}, {"kind", to_string(ex.answer_kind)}}}};
}

json to_json(const ChoiceExample& ex) {
  return json{{"type", "choice"},
              {"id", ex.id()},
              {"slot", ex.slot.str()},
              {"question", ex.question},
              {"tokens", ex.context.token_texts()},
              {"options", ex.options},
              {"gold_index", ex.gold_index}};
}

json to_json(const GenerationReport& r) {
  return json{{"total", r.total},           {"span_none", r.span_none},
              {"span_dontcare", r.span_dont_care}, {"span_value", r.span_value},
              {"choice", r.choice},         {"choice_positive", r.choice_positive},
              {"unspannable", r.unspannable}, {"positive_span", r.positive()}};
}

}  // namespace dstrc

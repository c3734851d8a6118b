#include "dstrc/readers.hpp"

#include <algorithm>
#include <cmath>

#include "dstrc/error.hpp"
#include "dstrc/rng.hpp"

namespace dstrc {

namespace {

void require_finite(const std::vector<double>& v, const ReaderQuery& q) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::kReaderFailure, q.id + ": non-finite logit");
  }
}

}  // namespace

SpanScores score_span(Reader& reader, const ReaderQuery& query) {
  if (!query.context || query.context->tokens.empty()) {
    throw Error(ErrorCode::kShapeMismatch, query.id + ": empty context");
  }
  SpanScores scores = reader.span(query);
  const std::size_t n = query.context->tokens.size();
  if (!scores.forced_value && (scores.start_logits.size() != n || scores.end_logits.size() != n)) {
    throw Error(ErrorCode::kShapeMismatch, query.id + ": expected " + std::to_string(n) + " start/end logits, got " +
                                               std::to_string(scores.start_logits.size()) + "/" +
                                               std::to_string(scores.end_logits.size()));
  }
  require_finite(scores.start_logits, query);
  require_finite(scores.end_logits, query);
  return scores;
}

ChoiceScores score_choice(Reader& reader, const ReaderQuery& query) {
  if (query.options.size() < 3) {
    throw Error(ErrorCode::kShapeMismatch, query.id + ": a choice query needs at least 3 options");
  }
  ChoiceScores scores = reader.choice(query);
  if (!scores.forced_value && scores.option_logits.size() != query.options.size()) {
    throw Error(ErrorCode::kShapeMismatch, query.id + ": expected " + std::to_string(query.options.size()) +
                                               " option logits, got " + std::to_string(scores.option_logits.size()));
  }
  require_finite(scores.option_logits, query);
  return scores;
}

// ---------------------------------------------------------------------------

namespace {

// Alternatives that survive canonicalization unchanged; spans of any other
// value would be mapped away from the gold.
std::vector<std::string> decodable_alternatives(const Ontology& ontology, const SlotName& slot,
                                                const SlotValue& gold) {
  std::vector<std::string> out;
  if (!ontology.has_slot(slot)) return out;
  const auto& candidates = ontology.candidates(slot);
  for (const auto& alt : gold.alternatives()) {
    if (std::find(candidates.begin(), candidates.end(), ontology.resolve_alias(normalize_text(alt))) !=
        candidates.end()) {
      out.push_back(alt);
    }
  }
  return out;
}

}  // namespace

OracleReader::OracleReader(const DialogueCorpus& corpus) : corpus_(corpus) {
  for (const auto& d : corpus.dialogues) by_id_.emplace(d.id, &d);
}

const Turn& OracleReader::turn_of(const ReaderQuery& query) const {
  auto it = by_id_.find(query.dialogue_id);
  if (it == by_id_.end() || query.turn_index < 1 ||
      query.turn_index > static_cast<int>(it->second->turns.size())) {
    throw Error(ErrorCode::kReaderFailure, "oracle has no gold for " + query.id);
  }
  return it->second->turns[static_cast<std::size_t>(query.turn_index - 1)];
}

SpanScores OracleReader::span(const ReaderQuery& query) {
  const Turn& turn = turn_of(query);
  const SlotValue gold = turn.gold(query.slot);
  const std::size_t n = query.context->tokens.size();
  SpanScores s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  if (gold.is_none()) {
    s.start_logits[0] = s.end_logits[0] = 1.0;
    return s;
  }
  std::optional<TokenSpan> hit;
  if (gold.is_value()) {
    auto alternatives = decodable_alternatives(corpus_.ontology, query.slot, gold);
    if (!alternatives.empty()) hit = find_value_span(*query.context, SlotValue::value(std::move(alternatives), gold.raw()));
  }
  if (!hit) {
    s.forced_value = gold;
    return s;
  }
  s.start_logits[hit->first] = 1.0;
  s.end_logits[hit->second] = 1.0;
  return s;
}

ChoiceScores OracleReader::choice(const ReaderQuery& query) {
  const SlotValue gold = turn_of(query).gold(query.slot);
  ChoiceScores s{std::vector<double>(query.options.size(), 0.0)};
  std::optional<std::size_t> index;
  const auto find = [&](const std::string& text) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < query.options.size(); ++i) {
      if (query.options[i] == text) return i;
    }
    return std::nullopt;
  };
  switch (gold.kind()) {
    case ValueKind::kNone: index = find(std::string(kNotMentionedOption)); break;
    case ValueKind::kDontCare: index = find(std::string(kDontCareOption)); break;
    case ValueKind::kValue:
      for (const auto& alt : gold.alternatives()) {
        if ((index = find(corpus_.ontology.resolve_alias(alt)))) break;
      }
      break;
  }
  if (!index) {
    s.forced_value = gold;
  } else {
    s.option_logits[*index] = 1.0;
  }
  return s;
}

// ---------------------------------------------------------------------------

ExactMatchReader::ExactMatchReader(Ontology ontology) : ontology_(std::move(ontology)) {
  for (const auto& [slot, values] : ontology_.values) {
    auto& list = candidate_tokens_[slot];
    for (const auto& v : values) list.push_back(split_tokens(v));
  }
}

SpanScores ExactMatchReader::span(const ReaderQuery& query) {
  const std::size_t n = query.context->tokens.size();
  SpanScores s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  s.start_logits[0] = s.end_logits[0] = 0.5;
  auto it = candidate_tokens_.find(query.slot);
  if (it == candidate_tokens_.end()) return s;

  const auto haystack = query.context->token_texts();
  std::optional<TokenSpan> latest;
  for (const auto& needle : it->second) {
    auto hit = find_last_subsequence(haystack, needle, 1);
    if (hit && (!latest || hit->first > latest->first ||
                (hit->first == latest->first && hit->second > latest->second))) {
      latest = hit;
    }
  }
  if (latest) {
    s.start_logits[latest->first] = 1.0;
    s.end_logits[latest->second] = 1.0;
  }
  return s;
}

ChoiceScores ExactMatchReader::choice(const ReaderQuery& query) {
  const auto haystack = query.context->token_texts();
  ChoiceScores s{std::vector<double>(query.options.size(), 0.0)};
  for (std::size_t i = 0; i < query.options.size(); ++i) {
    const std::string& option = query.options[i];
    if (option == kNotMentionedOption) {
      s.option_logits[i] = 0.5;
    } else if (option == kDontCareOption) {
      s.option_logits[i] = 0.0;
    } else if (find_last_subsequence(haystack, split_tokens(normalize_text(option)), 1)) {
      s.option_logits[i] = 1.0;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

std::uint64_t RandomReader::query_seed(const ReaderQuery& query) const {
  std::uint64_t h = fnv1a64(query.slot.str().data(), query.slot.str().size());
  h = fnv1a64(query.question.data(), query.question.size(), h);
  for (const auto& t : query.context->tokens) {
    h = fnv1a64(t.text.data(), t.text.size(), h);
    h = fnv1a64(" ", 1, h);
  }
  for (const auto& o : query.options) {
    h = fnv1a64(o.data(), o.size(), h);
    h = fnv1a64("|", 1, h);
  }
  return seed_ ^ h;
}

SpanScores RandomReader::span(const ReaderQuery& query) {
  SplitMix64 rng(query_seed(query));
  const std::size_t n = query.context->tokens.size();
  SpanScores s{std::vector<double>(n), std::vector<double>(n)};
  for (auto& x : s.start_logits) x = 2.0 * rng.next_unit() - 1.0;
  for (auto& x : s.end_logits) x = 2.0 * rng.next_unit() - 1.0;
  return s;
}

ChoiceScores RandomReader::choice(const ReaderQuery& query) {
  SplitMix64 rng(query_seed(query));
  ChoiceScores s{std::vector<double>(query.options.size())};
  for (auto& x : s.option_logits) x = 2.0 * rng.next_unit() - 1.0;
  return s;
}

}  // namespace dstrc

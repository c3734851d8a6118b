#include "dstrc/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dstrc/error.hpp"
#include "dstrc/similarity.hpp"

namespace dstrc {

using nlohmann::json;

namespace {

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kReaderFailure, std::string("non-finite ") + what);
  }
}

bool contains_phrase(std::span<const Token> tokens, std::size_t begin, std::size_t end,
                     const std::vector<std::string>& phrase) {
  if (phrase.empty() || end - begin < phrase.size()) return false;
  for (std::size_t i = begin; i + phrase.size() <= end; ++i) {
    bool hit = true;
    for (std::size_t k = 0; k < phrase.size() && hit; ++k) hit = tokens[i + k].text == phrase[k];
    if (hit) return true;
  }
  return false;
}

// The span lies inside one user utterance that voices "no preference".
bool is_dont_care_span(const SerializedContext& ctx, std::size_t start, std::size_t end) {
  const Token& first = ctx.tokens[start];
  if (first.speaker != Speaker::kUser) return false;
  for (std::size_t i = start; i <= end; ++i) {
    if (ctx.tokens[i].speaker != Speaker::kUser || ctx.tokens[i].turn_index != first.turn_index) return false;
  }
  const TurnRange& range = ctx.turn_boundaries.at(first.turn_index);
  return std::any_of(dont_care_phrases().begin(), dont_care_phrases().end(), [&](const auto& phrase) {
    return contains_phrase(ctx.tokens, range.user_begin, range.user_end, phrase);
  });
}

}  // namespace

void DecodeConfig::validate() const {
  if (max_span_len < 1) throw Error(ErrorCode::kInvalidConfig, "max_span_len must be >= 1");
  if (!(similarity_cutoff >= 0.0 && similarity_cutoff <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "similarity_cutoff must be in [0, 1]");
  }
  if (!std::isfinite(null_threshold)) throw Error(ErrorCode::kInvalidConfig, "null_threshold must be finite");
}

json to_json(const DecodeConfig& c) {
  return json{{"max_span_len", c.max_span_len},
              {"null_threshold", c.null_threshold},
              {"canonicalize", c.canonicalize},
              {"similarity_cutoff", c.similarity_cutoff}};
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += (out[i] = std::exp(logits[i] - peak));
  for (double& p : out) p /= sum;
  return out;
}

SpanDecision decode_span(const SpanScores& scores, const SerializedContext& context, const DecodeConfig& config) {
  const std::size_t n = context.tokens.size();
  if (scores.start_logits.size() != n || scores.end_logits.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "span scores have " + std::to_string(scores.start_logits.size()) + "/" +
                                               std::to_string(scores.end_logits.size()) + " entries for " +
                                               std::to_string(n) + " tokens");
  }
  if (n == 0) throw Error(ErrorCode::kShapeMismatch, "empty context");
  check_finite(scores.start_logits, "start logit");
  check_finite(scores.end_logits, "end logit");

  const auto& start = scores.start_logits;
  const auto& end = scores.end_logits;
  const double null_score = start[0] + end[0];

  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  std::size_t best_j = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t last = std::min(n - 1, i + config.max_span_len - 1);
    for (std::size_t j = i; j <= last; ++j) {
      const double s = start[i] + end[j];
      if (s > best) {
        best = s;
        best_i = i;
        best_j = j;
      }
    }
  }
  if (best_i == 0 || null_score + config.null_threshold >= best) {
    return SpanDecision{ValueKind::kNone, 0, 0, null_score};
  }
  return SpanDecision{ValueKind::kValue, best_i, best_j, best};
}

ChoiceDecision decode_choice(const ChoiceScores& scores, std::span<const std::string> options) {
  if (scores.option_logits.size() != options.size() || options.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "choice scores have " + std::to_string(scores.option_logits.size()) +
                                               " entries for " + std::to_string(options.size()) + " options");
  }
  check_finite(scores.option_logits, "option logit");
  const auto& logits = scores.option_logits;
  const std::size_t index =
      static_cast<std::size_t>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  ChoiceDecision out;
  out.index = index;
  out.probability = softmax(logits)[index];
  const std::string& chosen = options[index];
  if (chosen == kNotMentionedOption) {
    out.value = SlotValue::none();
  } else if (chosen == kDontCareOption) {
    out.value = SlotValue::dont_care();
  } else {
    out.value = SlotValue::value(chosen);
  }
  return out;
}

Canonicalized canonicalize_detail(const std::string& span_text, const SlotName& slot, const Ontology& ontology,
                                  const DecodeConfig& config) {
  const auto& candidates = ontology.candidates(slot);
  const std::string& aliased = ontology.resolve_alias(span_text);
  if (std::find(candidates.begin(), candidates.end(), aliased) != candidates.end()) {
    return {aliased, true};
  }
  double best = -1.0;
  const std::string* winner = nullptr;
  for (const auto& candidate : candidates) {
    const double r = similarity_ratio(candidate, aliased);
    if (r > best) {
      best = r;
      winner = &candidate;
    }
  }
  if (winner && best >= config.similarity_cutoff) return {*winner, true};
  return {span_text, false};
}

std::string canonicalize(const std::string& span_text, const SlotName& slot, const Ontology& ontology,
                         const DecodeConfig& config) {
  return canonicalize_detail(span_text, slot, ontology, config).text;
}

const std::vector<std::vector<std::string>>& dont_care_phrases() {
  static const std::vector<std::vector<std::string>> kPhrases = [] {
    const char* raw[] = {"do not care",     "don't care",        "dont care",       "doesn't matter",
                         "does not matter", "dont mind",         "don't mind",      "do not mind",
                         "no preference",   "any will do",       "anything is fine", "either is fine",
                         "either one is fine", "not picky",      "whatever"};
    std::vector<std::vector<std::string>> out;
    for (const char* p : raw) out.push_back(split_tokens(normalize_text(p)));
    return out;
  }();
  return kPhrases;
}

SlotPrediction predict_from_span(const SpanScores& scores, const SerializedContext& context, const SlotName& slot,
                                 const Ontology& ontology, const DecodeConfig& config) {
  SlotPrediction pred{slot};
  if (scores.forced_value) {
    pred.value = *scores.forced_value;
    pred.score = 1.0;
    return pred;
  }
  const SpanDecision d = decode_span(scores, context, config);
  pred.score = d.score;
  if (d.kind == ValueKind::kNone) return pred;

  Evidence ev{d.start, d.end, join_tokens(context.tokens, d.start, d.end)};
  Canonicalized canon{ev.text, false};
  if (config.canonicalize || ontology.has_slot(slot)) {
    canon = canonicalize_detail(ev.text, slot, ontology, config);
  }
  if (!canon.matched && is_dont_care_span(context, d.start, d.end)) {
    pred.value = SlotValue::dont_care(ev.text);
  } else {
    pred.value = SlotValue::value(config.canonicalize ? canon.text : ev.text);
  }
  pred.evidence = std::move(ev);
  return pred;
}

SlotPrediction predict_from_choice(const ChoiceScores& scores, std::span<const std::string> options,
                                   const SlotName& slot) {
  SlotPrediction pred{slot};
  if (scores.forced_value) {
    pred.value = *scores.forced_value;
    pred.score = 1.0;
    return pred;
  }
  const ChoiceDecision d = decode_choice(scores, options);
  pred.value = d.value;
  pred.score = d.probability;
  return pred;
}

}  // namespace dstrc

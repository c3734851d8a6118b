#include "dstrc/tracker.hpp"

#include <mutex>
#include <optional>

#include "dstrc/error.hpp"
#include "dstrc/examplegen.hpp"
#include "dstrc/parallel.hpp"

namespace dstrc {

using nlohmann::json;

namespace {

// Serializes calls into a reader that declared itself single-flight.
class LockedReader final : public Reader {
 public:
  explicit LockedReader(Reader& inner) : inner_(inner) {}
  std::string name() const override { return inner_.name(); }
  SpanScores span(const ReaderQuery& q) override {
    std::lock_guard lock(mutex_);
    return inner_.span(q);
  }
  ChoiceScores choice(const ReaderQuery& q) override {
    std::lock_guard lock(mutex_);
    return inner_.choice(q);
  }

 private:
  Reader& inner_;
  std::mutex mutex_;
};

json value_to_json(const SlotValue& v) {
  json j{{"kind", to_string(v.kind())}};
  if (v.is_value()) j["value"] = v.alternatives().size() == 1 ? json(v.text()) : json(v.alternatives());
  return j;
}

SlotValue value_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") return SlotValue::none();
  if (kind == "dontcare") return SlotValue::dont_care();
  if (kind != "value") throw Error(ErrorCode::kMalformedCorpus, "unknown value kind '" + kind + "'");
  const json& v = j.at("value");
  if (v.is_array()) return SlotValue::value(v.get<std::vector<std::string>>());
  return SlotValue::value(v.get<std::string>());
}

}  // namespace

std::string_view to_string(ModelType type) {
  return type == ModelType::kCategorical ? "categorical" : "extractive";
}

ModelType route(const SlotSpec& spec, const TrackOptions& options) {
  if (options.use_categorical_model && spec.is_categorical) return ModelType::kCategorical;
  return ModelType::kExtractive;
}

StatePrediction predict_state(const Dialogue& dialogue, int turn_index, const std::vector<SlotSpec>& specs,
                              const Ontology& ontology, ReaderSet readers, const TrackOptions& options,
                              const StatePrediction* previous) {
  StatePrediction out{dialogue.id, turn_index, {}, {}};
  const SerializedContext context = serialize_context(dialogue, turn_index);

  for (const auto& spec : specs) {
    ReaderQuery q;
    q.id = dialogue.id + "/" + std::to_string(turn_index) + "/" + spec.slot.str();
    q.dialogue_id = dialogue.id;
    q.turn_index = turn_index;
    q.slot = spec.slot;
    q.question = spec.question;
    q.context = &context;

    SlotPrediction pred{spec.slot};
    try {
      if (route(spec, options) == ModelType::kCategorical) {
        if (!readers.choice) throw Error(ErrorCode::kInvalidConfig, "no categorical reader configured");
        q.options = choice_options(spec);
        pred = predict_from_choice(score_choice(*readers.choice, q), q.options, spec.slot);
      } else {
        if (!readers.span) throw Error(ErrorCode::kInvalidConfig, "no span reader configured");
        pred = predict_from_span(score_span(*readers.span, q), context, spec.slot, ontology, options.decode);
      }
    } catch (const Error& e) {
      const bool reader_error = e.code() == ErrorCode::kReaderFailure || e.code() == ErrorCode::kShapeMismatch;
      if (!(options.partial && reader_error)) {
        throw Error(e.code(), dialogue.id + " turn " + std::to_string(turn_index) + " slot " + spec.slot.str() +
                                  ": " + e.what());
      }
      out.errors.push_back(spec.slot.str() + ": " + e.what());
      pred = SlotPrediction{spec.slot};
    }

    if (options.carryover && previous && pred.value.is_none()) {
      if (auto it = previous->state.find(spec.slot); it != previous->state.end()) pred = it->second;
    }
    out.state.insert_or_assign(spec.slot, std::move(pred));
  }
  return out;
}

std::vector<StatePrediction> track_corpus(const DialogueCorpus& corpus, const std::vector<SlotSpec>& specs,
                                          ReaderSet readers, const TrackOptions& options) {
  std::optional<LockedReader> locked_span;
  std::optional<LockedReader> locked_choice;
  Reader* const span_reader = readers.span;
  Reader* const choice_reader = readers.choice;
  if (span_reader && !span_reader->concurrent()) readers.span = &locked_span.emplace(*span_reader);
  if (choice_reader && !choice_reader->concurrent()) {
    readers.choice = choice_reader == span_reader ? readers.span : &locked_choice.emplace(*choice_reader);
  }

  std::vector<std::vector<StatePrediction>> per_dialogue(corpus.dialogues.size());
  parallel_for(corpus.dialogues.size(), options.jobs, [&](std::size_t di) {
    const Dialogue& d = corpus.dialogues[di];
    auto& out = per_dialogue[di];
    for (int t = 1; t <= static_cast<int>(d.turns.size()); ++t) {
      const StatePrediction* prev = out.empty() ? nullptr : &out.back();
      out.push_back(predict_state(d, t, specs, corpus.ontology, readers, options, prev));
    }
  });

  std::vector<StatePrediction> all;
  for (auto& v : per_dialogue) {
    for (auto& p : v) all.push_back(std::move(p));
  }
  return all;
}

json to_json(const StatePrediction& p) {
  json state = json::object();
  for (const auto& [slot, pred] : p.state) {
    json entry = value_to_json(pred.value);
    entry["score"] = pred.score;
    if (pred.evidence) {
      entry["evidence"] = {{"start", pred.evidence->start}, {"end", pred.evidence->end}, {"text", pred.evidence->text}};
    }
    state[slot.str()] = std::move(entry);
  }
  json j{{"dialogue_id", p.dialogue_id}, {"turn", p.turn_index}, {"state", std::move(state)}};
  if (!p.errors.empty()) j["errors"] = p.errors;
  return j;
}

StatePrediction prediction_from_json(const json& doc) {
  try {
    StatePrediction p{doc.at("dialogue_id").get<std::string>(), doc.at("turn").get<int>(), {}, {}};
    for (const auto& [key, entry] : doc.at("state").items()) {
      SlotPrediction pred{SlotName::parse(key), value_from_json(entry), std::nullopt, entry.value("score", 0.0)};
      if (entry.contains("evidence")) {
        const auto& ev = entry["evidence"];
        pred.evidence = Evidence{ev.at("start").get<std::size_t>(), ev.at("end").get<std::size_t>(),
                                 ev.at("text").get<std::string>()};
      }
      p.state.insert_or_assign(pred.slot, std::move(pred));
    }
    if (doc.contains("errors")) p.errors = doc["errors"].get<std::vector<std::string>>();
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedCorpus, std::string("prediction record: ") + e.what());
  }
}

}  // namespace dstrc

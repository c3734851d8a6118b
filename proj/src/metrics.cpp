#include "dstrc/metrics.hpp"

#include <cstdio>

#include "dstrc/error.hpp"
#include "dstrc/rng.hpp"

namespace dstrc {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

template <typename Fn>
void for_each_pair(const DialogueCorpus& corpus, const std::vector<SlotName>& slots, Fn&& fn) {
  for (const auto& d : corpus.dialogues) {
    for (const auto& turn : d.turns) {
      for (const auto& slot : slots) fn(d, turn, slot);
    }
  }
}

}  // namespace

PredictionIndex::PredictionIndex(const std::vector<StatePrediction>& predictions, const DialogueCorpus& corpus,
                                 const std::vector<SlotName>& slots) {
  for (const auto& p : predictions) by_turn_[{p.dialogue_id, p.turn_index}] = &p;
  for (const auto& d : corpus.dialogues) {
    for (const auto& turn : d.turns) {
      auto it = by_turn_.find({d.id, turn.index});
      if (it == by_turn_.end()) {
        throw Error(ErrorCode::kMissingPrediction, d.id + " turn " + std::to_string(turn.index));
      }
      for (const auto& slot : slots) {
        if (!it->second->state.contains(slot)) {
          throw Error(ErrorCode::kMissingPrediction, d.id + " turn " + std::to_string(turn.index) + " slot " + slot.str());
        }
      }
    }
  }
}

const SlotPrediction& PredictionIndex::at(const std::string& dialogue_id, int turn, const SlotName& slot) const {
  return by_turn_.at({dialogue_id, turn})->state.at(slot);
}

std::vector<SlotName> active_slots(const std::vector<SlotSpec>& specs) {
  std::vector<SlotName> out;
  for (const auto& s : specs) out.push_back(s.slot);
  return out;
}

double joint_goal_accuracy(const std::vector<StatePrediction>& predictions, const DialogueCorpus& corpus,
                           const std::vector<SlotName>& slots) {
  const PredictionIndex index(predictions, corpus, slots);
  std::size_t turns = 0;
  std::size_t joint = 0;
  for (const auto& d : corpus.dialogues) {
    for (const auto& turn : d.turns) {
      ++turns;
      bool all = true;
      for (const auto& slot : slots) {
        if (!values_match(index.at(d.id, turn.index, slot).value, turn.gold(slot), corpus.ontology)) {
          all = false;
          break;
        }
      }
      if (all) ++joint;
    }
  }
  return turns == 0 ? 0.0 : static_cast<double>(joint) / static_cast<double>(turns);
}

std::map<SlotName, SlotAccuracy> slot_metrics(const std::vector<StatePrediction>& predictions,
                                              const DialogueCorpus& corpus, const std::vector<SlotName>& slots,
                                              bool nonempty_only) {
  const PredictionIndex index(predictions, corpus, slots);
  std::map<SlotName, SlotAccuracy> out;
  for (const auto& slot : slots) out[slot];
  for_each_pair(corpus, slots, [&](const Dialogue& d, const Turn& turn, const SlotName& slot) {
    const SlotValue gold = turn.gold(slot);
    if (nonempty_only && gold.is_none()) return;
    auto& acc = out[slot];
    ++acc.total;
    if (values_match(index.at(d.id, turn.index, slot).value, gold, corpus.ontology)) ++acc.correct;
  });
  return out;
}

std::string_view to_string(ErrorType type) {
  switch (type) {
    case ErrorType::kRefNotNonePredNone: return "ref_not_none_pred_none";
    case ErrorType::kRefNonePredNotNone: return "ref_none_pred_not_none";
    case ErrorType::kBothNotNoneMismatch: return "both_not_none_mismatch";
  }
  return "";
}

ErrorType classify_error(const SlotValue& predicted, const SlotValue& gold) {
  if (!gold.is_none() && predicted.is_none()) return ErrorType::kRefNotNonePredNone;
  if (gold.is_none() && !predicted.is_none()) return ErrorType::kRefNonePredNotNone;
  return ErrorType::kBothNotNoneMismatch;
}

void ErrorCounts::add(ErrorType type) {
  switch (type) {
    case ErrorType::kRefNotNonePredNone: ++ref_not_none_pred_none; break;
    case ErrorType::kRefNonePredNotNone: ++ref_none_pred_not_none; break;
    case ErrorType::kBothNotNoneMismatch: ++both_not_none_mismatch; break;
  }
}

std::map<ModelType, ErrorCounts> error_breakdown(const std::vector<StatePrediction>& predictions,
                                                 const DialogueCorpus& corpus, const std::vector<SlotSpec>& specs,
                                                 const TrackOptions& routing) {
  const auto slots = active_slots(specs);
  const PredictionIndex index(predictions, corpus, slots);
  std::map<SlotName, ModelType> model;
  for (const auto& s : specs) model.emplace(s.slot, route(s, routing));
  std::map<ModelType, ErrorCounts> out{{ModelType::kCategorical, {}}, {ModelType::kExtractive, {}}};
  for_each_pair(corpus, slots, [&](const Dialogue& d, const Turn& turn, const SlotName& slot) {
    const SlotValue gold = turn.gold(slot);
    const SlotValue& pred = index.at(d.id, turn.index, slot).value;
    if (!values_match(pred, gold, corpus.ontology)) out[model.at(slot)].add(classify_error(pred, gold));
  });
  return out;
}

std::string config_fingerprint(const TrackOptions& options, const std::vector<SlotSpec>& specs) {
  ordered_json j;
  j["decode"] = to_json(options.decode);
  j["use_categorical_model"] = options.use_categorical_model;
  j["carryover"] = options.carryover;
  ordered_json slots = ordered_json::array();
  for (const auto& s : specs) slots.push_back({s.slot.str(), s.is_categorical, s.is_extractive});
  j["slots"] = std::move(slots);
  const std::string text = j.dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
  return buf;
}

EvalReport evaluate(const std::vector<StatePrediction>& predictions, const DialogueCorpus& corpus,
                    const std::vector<SlotSpec>& specs, const TrackOptions& options) {
  const auto slots = active_slots(specs);
  EvalReport r;
  for (const auto& d : corpus.dialogues) r.num_turns += d.turns.size();
  r.joint_goal_accuracy = joint_goal_accuracy(predictions, corpus, slots);
  r.per_slot = slot_metrics(predictions, corpus, slots, false);
  r.nonempty_per_slot = slot_metrics(predictions, corpus, slots, true);
  double sum = 0.0;
  for (const auto& [slot, acc] : r.per_slot) sum += acc.ratio();
  r.average_slot_accuracy = r.per_slot.empty() ? 0.0 : sum / static_cast<double>(r.per_slot.size());
  r.errors = error_breakdown(predictions, corpus, specs, options);
  for (const auto& s : specs) r.routing.emplace(s.slot, route(s, options));
  r.config_fingerprint = config_fingerprint(options, specs);
  return r;
}

ordered_json to_json(const EvalReport& r) {
  ordered_json j;
  j["joint_goal_accuracy"] = r.joint_goal_accuracy;
  j["average_slot_accuracy"] = r.average_slot_accuracy;
  j["num_turns"] = r.num_turns;
  ordered_json per_slot = ordered_json::object();
  for (const auto& [slot, acc] : r.per_slot) {
    ordered_json e;
    e["model"] = to_string(r.routing.at(slot));
    e["accuracy"] = acc.ratio();
    e["correct"] = acc.correct;
    e["total"] = acc.total;
    const auto& ne = r.nonempty_per_slot.at(slot);
    e["nonempty_accuracy"] = ne.total == 0 ? ordered_json(nullptr) : ordered_json(ne.ratio());
    e["nonempty_correct"] = ne.correct;
    e["nonempty_total"] = ne.total;
    per_slot[slot.str()] = std::move(e);
  }
  j["per_slot"] = std::move(per_slot);
  ordered_json errors = ordered_json::object();
  for (const auto& [type, c] : r.errors) {
    ordered_json e;
    const double total = static_cast<double>(c.total());
    const auto pct = [&](std::size_t n) { return total == 0 ? 0.0 : 100.0 * static_cast<double>(n) / total; };
    e["total"] = c.total();
    e["ref_not_none_pred_none"] = {{"count", c.ref_not_none_pred_none}, {"percent", pct(c.ref_not_none_pred_none)}};
    e["ref_none_pred_not_none"] = {{"count", c.ref_none_pred_not_none}, {"percent", pct(c.ref_none_pred_not_none)}};
    e["both_not_none_mismatch"] = {{"count", c.both_not_none_mismatch}, {"percent", pct(c.both_not_none_mismatch)}};
    errors[std::string(to_string(type))] = std::move(e);
  }
  j["error_breakdown"] = std::move(errors);
  j["config_fingerprint"] = r.config_fingerprint;
  j["config"] = r.config;
  return j;
}

void write_summary_csv(std::ostream& out, const EvalReport& r) {
  out << "metric,value\n";
  out << "joint_goal_accuracy," << fixed(r.joint_goal_accuracy) << '\n';
  out << "average_slot_accuracy," << fixed(r.average_slot_accuracy) << '\n';
  out << "num_turns," << r.num_turns << '\n';
  for (const auto& [type, c] : r.errors) {
    const std::string prefix = std::string(to_string(type)) + ".";
    out << prefix << "ref_not_none_pred_none," << c.ref_not_none_pred_none << '\n';
    out << prefix << "ref_none_pred_not_none," << c.ref_none_pred_not_none << '\n';
    out << prefix << "both_not_none_mismatch," << c.both_not_none_mismatch << '\n';
  }
  out << "config_fingerprint," << r.config_fingerprint << '\n';
}

void write_slot_csv(std::ostream& out, const EvalReport& r) {
  out << "slot,model,accuracy,correct,total,nonempty_accuracy,nonempty_correct,nonempty_total\n";
  for (const auto& [slot, acc] : r.per_slot) {
    const auto& ne = r.nonempty_per_slot.at(slot);
    out << slot.str() << ',' << to_string(r.routing.at(slot)) << ',' << fixed(acc.ratio()) << ',' << acc.correct << ','
        << acc.total << ',' << (ne.total == 0 ? std::string() : fixed(ne.ratio())) << ',' << ne.correct << ','
        << ne.total << '\n';
  }
}

}  // namespace dstrc

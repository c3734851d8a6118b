#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dstrc/corpus.hpp"
#include "dstrc/tracker.hpp"

namespace dstrc {

/// Predictions keyed by (dialogue id, turn index). Throws
/// kMissingPrediction unless every corpus turn has an entry and every entry
/// covers all of `slots`.
class PredictionIndex {
 public:
  PredictionIndex(const std::vector<StatePrediction>& predictions, const DialogueCorpus& corpus,
                  const std::vector<SlotName>& slots);

  const SlotPrediction& at(const std::string& dialogue_id, int turn, const SlotName& slot) const;

 private:
  std::map<std::pair<std::string, int>, const StatePrediction*> by_turn_;
};

/// Slots under evaluation: those of `specs`, in spec order.
std::vector<SlotName> active_slots(const std::vector<SlotSpec>& specs);

/// Fraction of turns whose every slot in `slots` matches gold. 0 turns -> 0.
double joint_goal_accuracy(const std::vector<StatePrediction>& predictions, const DialogueCorpus& corpus,
                           const std::vector<SlotName>& slots);

struct SlotAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double ratio() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

/// Per-slot accuracy over all (turn, slot) pairs. With `nonempty_only`,
/// pairs whose gold is None are left out of numerator and denominator.
std::map<SlotName, SlotAccuracy> slot_metrics(const std::vector<StatePrediction>& predictions,
                                              const DialogueCorpus& corpus, const std::vector<SlotName>& slots,
                                              bool nonempty_only);

enum class ErrorType { kRefNotNonePredNone, kRefNonePredNotNone, kBothNotNoneMismatch };

std::string_view to_string(ErrorType type);

/// Classifies a wrong (predicted, gold) pair.
ErrorType classify_error(const SlotValue& predicted, const SlotValue& gold);

struct ErrorCounts {
  std::size_t ref_not_none_pred_none = 0;
  std::size_t ref_none_pred_not_none = 0;
  std::size_t both_not_none_mismatch = 0;

  std::size_t total() const { return ref_not_none_pred_none + ref_none_pred_not_none + both_not_none_mismatch; }
  void add(ErrorType type);
};

/// Errors tabulated separately for slots routed to each model type.
std::map<ModelType, ErrorCounts> error_breakdown(const std::vector<StatePrediction>& predictions,
                                                 const DialogueCorpus& corpus, const std::vector<SlotSpec>& specs,
                                                 const TrackOptions& routing);

struct EvalReport {
  std::size_t num_turns = 0;
  double joint_goal_accuracy = 0.0;
  std::map<SlotName, SlotAccuracy> per_slot;
  double average_slot_accuracy = 0.0;
  std::map<SlotName, SlotAccuracy> nonempty_per_slot;
  std::map<ModelType, ErrorCounts> errors;
  std::map<SlotName, ModelType> routing;
  std::string config_fingerprint;
  /// Resolved configuration and provenance, embedded verbatim.
  nlohmann::json config;
};

/// Hash of the decode config, routing switch and slot classification.
std::string config_fingerprint(const TrackOptions& options, const std::vector<SlotSpec>& specs);

EvalReport evaluate(const std::vector<StatePrediction>& predictions, const DialogueCorpus& corpus,
                    const std::vector<SlotSpec>& specs, const TrackOptions& options);

nlohmann::ordered_json to_json(const EvalReport& report);
/// metric,value rows.
void write_summary_csv(std::ostream& out, const EvalReport& report);
/// slot,model,accuracy,correct,total,nonempty_accuracy,nonempty_correct,nonempty_total
void write_slot_csv(std::ostream& out, const EvalReport& report);

}  // namespace dstrc

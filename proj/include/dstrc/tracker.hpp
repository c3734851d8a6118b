#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dstrc/corpus.hpp"
#include "dstrc/decode.hpp"
#include "dstrc/readers.hpp"

namespace dstrc {

enum class ModelType { kCategorical, kExtractive };

std::string_view to_string(ModelType type);

struct TrackOptions {
  DecodeConfig decode;
  /// false routes every slot to the span reader.
  bool use_categorical_model = true;
  /// Keep the previous turn's value when the current prediction is None.
  bool carryover = false;
  /// Reader failures turn into None predictions (recorded in `errors`)
  /// instead of aborting.
  bool partial = false;
  unsigned jobs = 1;
};

/// Categorical wins for slots that are both, unless the categorical model is
/// ablated.
ModelType route(const SlotSpec& spec, const TrackOptions& options);

struct ReaderSet {
  Reader* span = nullptr;
  Reader* choice = nullptr;
};

struct StatePrediction {
  std::string dialogue_id;
  int turn_index = 0;
  std::map<SlotName, SlotPrediction> state;
  std::vector<std::string> errors;
};

/// Predicts every slot of `specs` at one turn from the full context D_t.
/// `previous` is only consulted when carryover is enabled. Reader errors are
/// rethrown with (dialogue, turn, slot) context unless options.partial.
StatePrediction predict_state(const Dialogue& dialogue, int turn_index, const std::vector<SlotSpec>& specs,
                              const Ontology& ontology, ReaderSet readers, const TrackOptions& options,
                              const StatePrediction* previous = nullptr);

/// All turns of all dialogues, in corpus order. Readers that are not
/// concurrent() are called under a lock.
std::vector<StatePrediction> track_corpus(const DialogueCorpus& corpus, const std::vector<SlotSpec>& specs,
                                          ReaderSet readers, const TrackOptions& options);

nlohmann::json to_json(const StatePrediction& prediction);
StatePrediction prediction_from_json(const nlohmann::json& doc);

}  // namespace dstrc

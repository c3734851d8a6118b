#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dstrc/corpus.hpp"

namespace dstrc {

struct SlotStats {
  SlotName slot;
  std::size_t num_possible_values = 0;
  /// Concrete (non-None, non-DontCare) gold (turn, slot) pairs and how many
  /// of them occur as a token subsequence of the context up to that turn.
  std::size_t num_concrete = 0;
  std::size_t num_matched = 0;
  /// num_matched / num_concrete; 0 when the slot has no concrete gold.
  double exact_match_rate = 0.0;
};

/// One entry per ontology slot, in slot-name order. Throws kEmptyCorpus.
std::vector<SlotStats> compute_slot_stats(const DialogueCorpus& corpus, unsigned jobs = 1);

using QuestionTable = std::map<SlotName, std::string>;

/// The shipped question table (data/questions.json compiled in).
const QuestionTable& builtin_questions();
QuestionTable load_questions(const std::filesystem::path& path);
/// Question for `slot`, with a generic phrasing for slots the table lacks.
std::string question_for(const QuestionTable& table, const SlotName& slot);

struct ClassifyOptions {
  std::size_t num_categorical = 15;
  double extractive_threshold = 0.80;
};

/// Sorts slots by (num_possible_values, slot name). The first
/// `num_categorical` become categorical; every slot whose exact-match rate
/// reaches the threshold becomes extractive; a slot with neither flag is
/// forced categorical. Output is in that sorted order. Throws kInvalidConfig.
std::vector<SlotSpec> classify_slots(const std::vector<SlotStats>& stats, const Ontology& ontology,
                                     const QuestionTable& questions, const ClassifyOptions& options = {});

/// CSV: slot,num_possible_values,exact_match_rate,is_categorical,is_extractive
void write_stats_csv(std::ostream& out, const std::vector<SlotStats>& stats,
                     const std::vector<SlotSpec>& specs);

nlohmann::json specs_to_json(const std::vector<SlotSpec>& specs);
std::vector<SlotSpec> specs_from_json(const nlohmann::json& doc);

}  // namespace dstrc

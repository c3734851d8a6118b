#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dstrc/types.hpp"

namespace dstrc {

/// Candidate values per slot (normalized, deduplicated, ontology order) plus
/// an optional alias map applied before any comparison.
struct Ontology {
  std::map<SlotName, std::vector<std::string>> values;
  std::map<std::string, std::string> aliases;

  bool has_slot(const SlotName& slot) const { return values.contains(slot); }
  /// Throws Error(kUnknownSlotInOntology).
  const std::vector<std::string>& candidates(const SlotName& slot) const;
  /// Maps a normalized string through the alias table (identity if absent).
  const std::string& resolve_alias(const std::string& normalized) const;
};

/// Per-slot tracking configuration produced by the taxonomy.
struct SlotSpec {
  SlotName slot;
  std::string question;
  bool is_categorical = false;
  bool is_extractive = false;
  /// Ontology values offered as options; non-empty iff categorical.
  std::vector<std::string> choice_values;
};

struct DialogueCorpus {
  std::vector<Dialogue> dialogues;
  Ontology ontology;
  std::vector<SlotSpec> slot_specs;
};

/// True when a concrete prediction text matches any gold alternative after
/// normalization and aliasing. None matches None, DontCare matches DontCare.
bool values_match(const SlotValue& predicted, const SlotValue& gold, const Ontology& ontology);

}  // namespace dstrc

#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace dstrc {

/// Maps a raw MultiWOZ slot key to "domain.group.name". Accepts the metadata
/// form (domain, "semi"/"book", "leaveAt") and ontology.json keys such as
/// "hotel-price range", "train-book people" or "hotel-semi-area".
std::optional<std::string> multiwoz_slot_key(std::string_view domain, std::string_view group, std::string_view name);
std::optional<std::string> multiwoz_ontology_key(std::string_view key);

struct ConvertOptions {
  /// Keep only these dialogue ids (".json" suffix optional) when set.
  std::optional<std::set<std::string>> include_ids;
  std::set<std::string> exclude_ids;
};

/// Raw MultiWOZ 2.0/2.1 data.json (an object keyed by dialogue id) to the
/// dialogue-file schema. Turn t pairs log[2t-2] (user) with log[2t-1]
/// (agent) whose metadata holds the belief state after the user turn.
/// Throws kMalformedCorpus.
nlohmann::ordered_json convert_multiwoz(const nlohmann::json& raw, const ConvertOptions& options = {});

/// Raw ontology.json to {"domain.group.name": [values]}.
nlohmann::ordered_json convert_multiwoz_ontology(const nlohmann::json& raw);

/// Ontology built from every concrete value seen in converted dialogues,
/// values sorted, for corpora shipped without an ontology file. Slots seen
/// only as dontcare get no entry, so such corpora need a real ontology.
nlohmann::ordered_json derive_ontology(const nlohmann::ordered_json& dialogues);

/// Reads a split list (one id per line, or a JSON array of ids).
std::set<std::string> read_id_list(const std::string& path);

}  // namespace dstrc

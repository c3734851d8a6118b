#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "dstrc/corpus.hpp"

namespace dstrc {

/// Domains dropped unless explicitly requested through a domain filter.
const std::set<std::string>& default_excluded_domains();

struct LoadOptions {
  /// Keep dialogues whose domain set intersects this set; all when unset.
  std::optional<std::set<std::string>> filter_domains;
  std::optional<std::filesystem::path> alias_file;
};

/// Reads a dialogue file (JSON array, see README) and an ontology file
/// ({"domain.group.name": [values]}). Gold values are normalized and "a|b"
/// annotations become ordered alternative lists.
///
/// Throws Error(kMalformedCorpus) with a JSON path to the offending record,
/// or Error(kUnknownSlot) when a state names a slot missing from the ontology.
DialogueCorpus load_corpus(const std::filesystem::path& dialogue_file,
                           const std::filesystem::path& ontology_file,
                           const LoadOptions& options = {});

// In-memory variants of the above, used by load_corpus and the tests.
Ontology parse_ontology(const nlohmann::json& doc, const std::set<std::string>& excluded_domains);
void parse_aliases(const nlohmann::json& doc, Ontology& ontology);
std::vector<Dialogue> parse_dialogues(const nlohmann::json& doc, const Ontology& ontology,
                                      const LoadOptions& options);

/// Parses a state annotation string into a SlotValue (None for the literals
/// "none"/"not mentioned"/"", DontCare for "dontcare" spellings).
SlotValue parse_annotation(std::string_view raw);

/// Reads and parses a JSON file; parse failures become Error(kMalformedCorpus)
/// naming the byte offset.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Selects ceil(fraction * N) whole dialogues with a seeded SplitMix64 partial
/// Fisher-Yates shuffle: for i in [0, k): j = i + next() % (N - i); swap.
/// The chosen dialogues are returned in their original corpus order.
/// Throws Error(kInvalidFraction) unless 0 < fraction <= 1, and
/// Error(kEmptyCorpus) on an empty corpus.
DialogueCorpus subsample_fewshot(const DialogueCorpus& corpus, double fraction, std::uint64_t seed);

/// Number of dialogues subsample_fewshot keeps out of `n`.
std::size_t fewshot_count(std::size_t n, double fraction);

}  // namespace dstrc

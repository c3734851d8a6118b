#include "dstrc/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dstrc/error.hpp"
#include "dstrc/rng.hpp"
#include "dstrc/text.hpp"

namespace dstrc {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kMalformedCorpus, where + ": " + what);
}

std::set<std::string> excluded_for(const LoadOptions& options) {
  std::set<std::string> excluded = default_excluded_domains();
  if (options.filter_domains) {
    for (const auto& d : *options.filter_domains) excluded.erase(d);
  }
  return excluded;
}

std::vector<std::string> split_alternatives(std::string_view raw) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto bar = raw.find('|', start);
    auto piece = normalize_text(raw.substr(start, bar == std::string_view::npos ? raw.npos : bar - start));
    if (!piece.empty() && std::find(out.begin(), out.end(), piece) == out.end()) {
      out.push_back(std::move(piece));
    }
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return out;
}

}  // namespace

const std::set<std::string>& default_excluded_domains() {
  static const std::set<std::string> kExcluded = {"hospital", "police"};
  return kExcluded;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) malformed(path.string(), "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    malformed(path.string(), "invalid JSON at byte " + std::to_string(e.byte) + " (" + e.what() + ")");
  }
}

SlotValue parse_annotation(std::string_view raw) {
  const std::string norm = normalize_text(raw);
  if (is_none_literal(norm)) return SlotValue::none();
  if (is_dont_care_literal(norm)) return SlotValue::dont_care(std::string(raw));
  auto alternatives = split_alternatives(raw);
  std::erase_if(alternatives, [](const std::string& a) { return is_none_literal(a) || is_dont_care_literal(a); });
  if (alternatives.empty()) return SlotValue::none();
  return SlotValue::value(std::move(alternatives), std::string(raw));
}

Ontology parse_ontology(const json& doc, const std::set<std::string>& excluded_domains) {
  if (!doc.is_object()) malformed("ontology", "expected a JSON object");
  Ontology ontology;
  for (const auto& [key, list] : doc.items()) {
    const std::string where = "ontology[\"" + key + "\"]";
    auto slot = SlotName::try_parse(key);
    if (!slot) malformed(where, "key is not domain.group.name");
    if (excluded_domains.contains(slot->domain())) continue;
    if (!list.is_array()) malformed(where, "expected an array of strings");
    std::vector<std::string> values;
    for (const auto& item : list) {
      if (!item.is_string()) malformed(where, "expected an array of strings");
      std::string v = normalize_text(item.get<std::string>());
      if (is_none_literal(v) || is_dont_care_literal(v)) continue;
      if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(std::move(v));
    }
    if (values.empty()) malformed(where, "slot has no candidate values");
    ontology.values.emplace(*std::move(slot), std::move(values));
  }
  return ontology;
}

void parse_aliases(const json& doc, Ontology& ontology) {
  if (!doc.is_object()) malformed("aliases", "expected a JSON object");
  std::set<std::string> all_values;
  for (const auto& [slot, values] : ontology.values) all_values.insert(values.begin(), values.end());
  for (const auto& [key, target] : doc.items()) {
    if (!target.is_string()) malformed("aliases[\"" + key + "\"]", "expected a string");
    std::string from = normalize_text(key);
    std::string to = normalize_text(target.get<std::string>());
    if (!all_values.contains(to)) {
      malformed("aliases[\"" + key + "\"]", "target '" + to + "' is not an ontology value");
    }
    if (from != to) ontology.aliases[std::move(from)] = std::move(to);
  }
  for (const auto& [from, to] : ontology.aliases) {
    if (ontology.aliases.contains(to)) malformed("aliases[\"" + from + "\"]", "alias chains are not allowed");
  }
}

std::vector<Dialogue> parse_dialogues(const json& doc, const Ontology& ontology,
                                      const LoadOptions& options) {
  if (!doc.is_array()) malformed("dialogues", "expected a JSON array");
  const auto excluded = excluded_for(options);
  std::vector<Dialogue> dialogues;
  std::set<std::string> seen_ids;

  for (std::size_t di = 0; di < doc.size(); ++di) {
    const auto& rec = doc[di];
    const std::string where = "dialogues[" + std::to_string(di) + "]";
    if (!rec.is_object()) malformed(where, "expected an object");
    if (!rec.contains("id") || !rec["id"].is_string()) malformed(where + ".id", "expected a string");
    if (!rec.contains("turns") || !rec["turns"].is_array()) malformed(where + ".turns", "expected an array");

    Dialogue d;
    d.id = rec["id"].get<std::string>();
    if (!seen_ids.insert(d.id).second) malformed(where + ".id", "duplicate id '" + d.id + "'");
    if (rec.contains("domains")) {
      if (!rec["domains"].is_array()) malformed(where + ".domains", "expected an array");
      for (const auto& dom : rec["domains"]) {
        if (!dom.is_string()) malformed(where + ".domains", "expected strings");
        d.domains.insert(dom.get<std::string>());
      }
    }
    if (rec["turns"].empty()) malformed(where + ".turns", "dialogue has no turns");

    int index = 1;
    for (std::size_t ti = 0; ti < rec["turns"].size(); ++ti, ++index) {
      const auto& tr = rec["turns"][ti];
      const std::string twhere = where + ".turns[" + std::to_string(ti) + "]";
      if (!tr.is_object()) malformed(twhere, "expected an object");
      if (!tr.contains("user") || !tr["user"].is_string()) malformed(twhere + ".user", "expected a string");
      Turn turn;
      turn.index = index;
      turn.user_utterance = tr["user"].get<std::string>();
      if (tr.contains("agent") && !tr["agent"].is_null()) {
        if (!tr["agent"].is_string()) malformed(twhere + ".agent", "expected a string or null");
        turn.agent_utterance = tr["agent"].get<std::string>();
      }
      if (tr.contains("state")) {
        if (!tr["state"].is_object()) malformed(twhere + ".state", "expected an object");
        for (const auto& [key, value] : tr["state"].items()) {
          const std::string swhere = twhere + ".state[\"" + key + "\"]";
          auto slot = SlotName::try_parse(key);
          if (!slot) malformed(swhere, "key is not domain.group.name");
          if (excluded.contains(slot->domain())) continue;
          if (!value.is_string()) malformed(swhere, "expected a string");
          if (!ontology.has_slot(*slot)) {
            throw Error(ErrorCode::kUnknownSlot, swhere + ": '" + key + "' is not in the ontology");
          }
          SlotValue sv = parse_annotation(value.get<std::string>());
          if (!sv.is_none()) turn.gold_state.emplace(*std::move(slot), std::move(sv));
        }
      }
      d.turns.push_back(std::move(turn));
    }

    bool keep;
    if (options.filter_domains) {
      keep = std::any_of(d.domains.begin(), d.domains.end(),
                         [&](const std::string& x) { return options.filter_domains->contains(x); });
    } else {
      keep = d.domains.empty() ||
             std::any_of(d.domains.begin(), d.domains.end(),
                         [&](const std::string& x) { return !excluded.contains(x); });
    }
    if (keep) dialogues.push_back(std::move(d));
  }
  return dialogues;
}

DialogueCorpus load_corpus(const std::filesystem::path& dialogue_file,
                           const std::filesystem::path& ontology_file, const LoadOptions& options) {
  DialogueCorpus corpus;
  corpus.ontology = parse_ontology(read_json_file(ontology_file), excluded_for(options));
  if (options.alias_file) parse_aliases(read_json_file(*options.alias_file), corpus.ontology);
  corpus.dialogues = parse_dialogues(read_json_file(dialogue_file), corpus.ontology, options);
  return corpus;
}

std::size_t fewshot_count(std::size_t n, double fraction) {
  // The epsilon keeps products like 0.07 * 100 = 7.000000000000001 at 7.
  const double k = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, k)));
}

DialogueCorpus subsample_fewshot(const DialogueCorpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error(ErrorCode::kInvalidFraction, "fraction must be in (0, 1], got " + std::to_string(fraction));
  }
  const std::size_t n = corpus.dialogues.size();
  if (n == 0) throw Error(ErrorCode::kEmptyCorpus, "cannot subsample an empty corpus");
  const std::size_t k = fewshot_count(n, fraction);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(order[i], order[j]);
  }
  order.resize(k);
  std::sort(order.begin(), order.end());

  DialogueCorpus out;
  out.ontology = corpus.ontology;
  out.slot_specs = corpus.slot_specs;
  out.dialogues.reserve(k);
  for (auto i : order) out.dialogues.push_back(corpus.dialogues[i]);
  return out;
}

}  // namespace dstrc

#include "dstrc/multiwoz.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "dstrc/error.hpp"
#include "dstrc/ingest.hpp"
#include "dstrc/text.hpp"

namespace dstrc {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string>& known_domains() {
  static const std::set<std::string> kDomains = {"attraction", "hospital", "hotel", "police",
                                                  "restaurant", "taxi",     "train"};
  return kDomains;
}

std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string strip_json_suffix(std::string id) {
  if (id.size() > 5 && id.ends_with(".json")) id.resize(id.size() - 5);
  return id;
}

}  // namespace

std::optional<std::string> multiwoz_slot_key(std::string_view domain, std::string_view group, std::string_view name) {
  const std::string d = squash(domain);
  const std::string g = squash(group);
  const std::string n = squash(name);
  if (d.empty() || n.empty() || (g != "semi" && g != "book")) return std::nullopt;
  return d + "." + g + "." + n;
}

std::optional<std::string> multiwoz_ontology_key(std::string_view key) {
  const auto dash = key.find('-');
  if (dash == std::string_view::npos) return std::nullopt;
  const std::string_view domain = key.substr(0, dash);
  std::string_view rest = key.substr(dash + 1);
  if (rest.starts_with("semi-")) return multiwoz_slot_key(domain, "semi", rest.substr(5));
  if (rest.starts_with("book-")) return multiwoz_slot_key(domain, "book", rest.substr(5));
  if (rest.starts_with("book ")) return multiwoz_slot_key(domain, "book", rest.substr(5));
  return multiwoz_slot_key(domain, "semi", rest);
}

ordered_json convert_multiwoz(const json& raw, const ConvertOptions& options) {
  if (raw.is_null()) return ordered_json::array();
  if (!raw.is_object()) throw Error(ErrorCode::kMalformedCorpus, "raw MultiWOZ: expected an object keyed by id");
  ordered_json out = ordered_json::array();
  for (const auto& [raw_id, rec] : raw.items()) {
    const std::string id = strip_json_suffix(raw_id);
    if (options.include_ids && !options.include_ids->contains(id)) continue;
    if (options.exclude_ids.contains(id)) continue;
    const std::string where = "raw[\"" + raw_id + "\"]";
    if (!rec.is_object() || !rec.contains("log") || !rec["log"].is_array()) {
      throw Error(ErrorCode::kMalformedCorpus, where + ": expected an object with a 'log' array");
    }

    ordered_json dialogue;
    dialogue["id"] = id;
    std::vector<std::string> domains;
    if (rec.contains("goal") && rec["goal"].is_object()) {
      for (const auto& [dom, goal] : rec["goal"].items()) {
        if (known_domains().contains(dom) && goal.is_object() && !goal.empty()) domains.push_back(dom);
      }
    }
    dialogue["domains"] = domains;

    const auto& log = rec["log"];
    ordered_json turns = ordered_json::array();
    ordered_json previous_state = ordered_json::object();
    for (std::size_t i = 0; i < log.size(); i += 2) {
      const std::string twhere = where + ".log[" + std::to_string(i) + "]";
      if (!log[i].is_object() || !log[i].contains("text") || !log[i]["text"].is_string()) {
        throw Error(ErrorCode::kMalformedCorpus, twhere + ": missing text");
      }
      ordered_json turn;
      turn["user"] = log[i]["text"];
      ordered_json state = previous_state;
      if (i + 1 < log.size()) {
        const auto& sys = log[i + 1];
        if (!sys.is_object() || !sys.contains("text") || !sys["text"].is_string()) {
          throw Error(ErrorCode::kMalformedCorpus, where + ".log[" + std::to_string(i + 1) + "]: missing text");
        }
        turn["agent"] = sys["text"];
        if (sys.contains("metadata") && sys["metadata"].is_object() && !sys["metadata"].empty()) {
          state = ordered_json::object();
          std::map<std::string, std::string> sorted;
          for (const auto& [dom, groups] : sys["metadata"].items()) {
            if (!groups.is_object()) continue;
            for (const auto& [group, slots] : groups.items()) {
              if (!slots.is_object()) continue;
              for (const auto& [name, value] : slots.items()) {
                if (!value.is_string()) continue;  // e.g. book.booked lists
                auto key = multiwoz_slot_key(dom, group, name);
                if (!key) continue;
                const std::string norm = normalize_text(value.get<std::string>());
                if (is_none_literal(norm)) continue;
                sorted[*key] = is_dont_care_literal(norm) ? "dontcare" : value.get<std::string>();
              }
            }
          }
          for (auto& [k, v] : sorted) state[k] = v;
        }
      } else {
        turn["agent"] = nullptr;
      }
      turn["state"] = state;
      previous_state = std::move(state);
      turns.push_back(std::move(turn));
    }
    if (turns.empty()) continue;
    dialogue["turns"] = std::move(turns);
    out.push_back(std::move(dialogue));
  }
  return out;
}

ordered_json convert_multiwoz_ontology(const json& raw) {
  if (!raw.is_object()) throw Error(ErrorCode::kMalformedCorpus, "raw ontology: expected an object");
  std::map<std::string, std::vector<std::string>> sorted;
  for (const auto& [key, values] : raw.items()) {
    auto slot = multiwoz_ontology_key(key);
    if (!slot || !values.is_array()) continue;
    auto& list = sorted[*slot];
    for (const auto& v : values) {
      if (v.is_string()) list.push_back(v.get<std::string>());
    }
  }
  ordered_json out = ordered_json::object();
  for (auto& [k, v] : sorted) out[k] = v;
  return out;
}

ordered_json derive_ontology(const ordered_json& dialogues) {
  std::map<std::string, std::set<std::string>> values;
  for (const auto& d : dialogues) {
    for (const auto& t : d.at("turns")) {
      for (const auto& [key, v] : t.at("state").items()) {
        const SlotValue parsed = parse_annotation(v.get<std::string>());
        for (const auto& alt : parsed.alternatives()) values[key].insert(alt);
      }
    }
  }
  ordered_json out = ordered_json::object();
  for (const auto& [k, set] : values) {
    if (!set.empty()) out[k] = std::vector<std::string>(set.begin(), set.end());
  }
  return out;
}

std::set<std::string> read_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMalformedCorpus, path + ": cannot open id list");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::set<std::string> ids;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    for (const auto& id : read_json_file(path)) ids.insert(strip_json_suffix(id.get<std::string>()));
    return ids;
  }
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const auto b = line.find_first_not_of(" \t\r");
    const auto e = line.find_last_not_of(" \t\r");
    if (b != std::string::npos) ids.insert(strip_json_suffix(line.substr(b, e - b + 1)));
  }
  return ids;
}

}  // namespace dstrc

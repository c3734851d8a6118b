#include "dstrc/taxonomy.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "builtin_questions.inc"
#include "dstrc/error.hpp"
#include "dstrc/examplegen.hpp"
#include "dstrc/ingest.hpp"
#include "dstrc/parallel.hpp"

namespace dstrc {

using nlohmann::json;

namespace {

QuestionTable parse_questions(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kInvalidConfig, "question table must be a JSON object");
  QuestionTable table;
  for (const auto& [key, q] : doc.items()) {
    if (!q.is_string()) throw Error(ErrorCode::kInvalidConfig, "question for " + key + " must be a string");
    table.insert_or_assign(SlotName::parse(key), q.get<std::string>());
  }
  return table;
}

}  // namespace

std::vector<SlotStats> compute_slot_stats(const DialogueCorpus& corpus, unsigned jobs) {
  if (corpus.dialogues.empty()) throw Error(ErrorCode::kEmptyCorpus, "no dialogues to analyze");

  using Counts = std::map<SlotName, std::pair<std::size_t, std::size_t>>;
  std::vector<Counts> partial(corpus.dialogues.size());
  parallel_for(corpus.dialogues.size(), jobs, [&](std::size_t di) {
    const Dialogue& d = corpus.dialogues[di];
    for (int t = 1; t <= static_cast<int>(d.turns.size()); ++t) {
      const Turn& turn = d.turns[static_cast<std::size_t>(t - 1)];
      bool any = std::any_of(turn.gold_state.begin(), turn.gold_state.end(),
                             [](const auto& kv) { return kv.second.is_value(); });
      if (!any) continue;
      const SerializedContext ctx = serialize_context(d, t);
      for (const auto& [slot, value] : turn.gold_state) {
        if (!value.is_value()) continue;
        auto& [total, matched] = partial[di][slot];
        ++total;
        if (find_value_span(ctx, value)) ++matched;
      }
    }
  });

  std::vector<SlotStats> stats;
  for (const auto& [slot, values] : corpus.ontology.values) {
    SlotStats s{slot, values.size()};
    for (const auto& counts : partial) {
      if (auto it = counts.find(slot); it != counts.end()) {
        s.num_concrete += it->second.first;
        s.num_matched += it->second.second;
      }
    }
    s.exact_match_rate =
        s.num_concrete == 0 ? 0.0 : static_cast<double>(s.num_matched) / static_cast<double>(s.num_concrete);
    stats.push_back(std::move(s));
  }
  return stats;
}

const QuestionTable& builtin_questions() {
  static const QuestionTable table = parse_questions(json::parse(kBuiltinQuestionsJson));
  return table;
}

QuestionTable load_questions(const std::filesystem::path& path) {
  return parse_questions(read_json_file(path));
}

std::string question_for(const QuestionTable& table, const SlotName& slot) {
  if (auto it = table.find(slot); it != table.end()) return it->second;
  return "what is the " + slot.name() + " of the " + slot.domain() + " that the user wants?";
}

std::vector<SlotSpec> classify_slots(const std::vector<SlotStats>& stats, const Ontology& ontology,
                                     const QuestionTable& questions, const ClassifyOptions& options) {
  if (stats.empty()) throw Error(ErrorCode::kInvalidConfig, "no slot statistics to classify");
  if (options.num_categorical > stats.size()) {
    throw Error(ErrorCode::kInvalidConfig, "num_categorical " + std::to_string(options.num_categorical) +
                                               " exceeds slot count " + std::to_string(stats.size()));
  }
  std::vector<const SlotStats*> order;
  for (const auto& s : stats) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const SlotStats* a, const SlotStats* b) {
    if (a->num_possible_values != b->num_possible_values) return a->num_possible_values < b->num_possible_values;
    return a->slot < b->slot;
  });

  std::vector<SlotSpec> specs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const SlotStats& s = *order[i];
    SlotSpec spec{s.slot, question_for(questions, s.slot)};
    spec.is_categorical = i < options.num_categorical;
    spec.is_extractive = s.exact_match_rate >= options.extractive_threshold;
    if (!spec.is_categorical && !spec.is_extractive) spec.is_categorical = true;
    if (spec.is_categorical) spec.choice_values = ontology.candidates(s.slot);
    specs.push_back(std::move(spec));
  }
  return specs;
}

void write_stats_csv(std::ostream& out, const std::vector<SlotStats>& stats, const std::vector<SlotSpec>& specs) {
  out << "slot,num_possible_values,exact_match_rate,is_categorical,is_extractive\n";
  for (const auto& spec : specs) {
    auto it = std::find_if(stats.begin(), stats.end(), [&](const SlotStats& s) { return s.slot == spec.slot; });
    if (it == stats.end()) continue;
    char rate[32];
    std::snprintf(rate, sizeof rate, "%.4f", it->exact_match_rate);
    out << spec.slot.str() << ',' << it->num_possible_values << ',' << rate << ','
        << (spec.is_categorical ? "true" : "false") << ',' << (spec.is_extractive ? "true" : "false") << '\n';
  }
}

json specs_to_json(const std::vector<SlotSpec>& specs) {
  json out = json::array();
  for (const auto& s : specs) {
    out.push_back({{"slot", s.slot.str()},
                   {"question", s.question},
                   {"is_categorical", s.is_categorical},
                   {"is_extractive", s.is_extractive},
                   {"choice_values", s.choice_values}});
  }
  return out;
}

std::vector<SlotSpec> specs_from_json(const json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::kInvalidConfig, "slot specs must be a JSON array");
  std::vector<SlotSpec> specs;
  try {
    for (const auto& item : doc) {
      SlotSpec s{SlotName::parse(item.at("slot").get<std::string>()), item.at("question").get<std::string>()};
      s.is_categorical = item.at("is_categorical").get<bool>();
      s.is_extractive = item.at("is_extractive").get<bool>();
      s.choice_values = item.value("choice_values", std::vector<std::string>{});
      if (!s.is_categorical && !s.is_extractive) {
        throw Error(ErrorCode::kInvalidConfig, s.slot.str() + " has no model type");
      }
      if (s.is_categorical == s.choice_values.empty()) {
        throw Error(ErrorCode::kInvalidConfig, s.slot.str() + ": choice_values must be non-empty iff categorical");
      }
      specs.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("slot specs: ") + e.what());
  }
  return specs;
}

}  // namespace dstrc

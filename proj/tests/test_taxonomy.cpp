#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "dstrc/error.hpp"
#include "dstrc/taxonomy.hpp"
#include "published_slot_stats.hpp"
#include "test_support.hpp"

namespace dstrc {
namespace {

struct Synthetic {
  std::vector<SlotStats> stats;
  Ontology ontology;
};

Synthetic from_published_stats() {
  Synthetic s;
  for (const auto& row : test::kPublishedSlotStats) {
    SlotStats st;
    st.slot = SlotName::parse(row.slot);
    st.num_possible_values = static_cast<std::size_t>(row.num_values);
    st.num_concrete = 1000;
    st.num_matched = static_cast<std::size_t>(row.exact_match_rate * 1000 + 0.5);
    st.exact_match_rate = row.exact_match_rate;
    s.stats.push_back(st);
    std::vector<std::string> values;
    for (int i = 0; i < row.num_values; ++i) values.push_back("v" + std::to_string(i));
    s.ontology.values[st.slot] = values;
  }
  return s;
}

struct Counts {
  int categorical_only = 0, both = 0, extractive_only = 0;
};

Counts count(const std::vector<SlotSpec>& specs) {
  Counts c;
  for (const auto& s : specs) {
    EXPECT_TRUE(s.is_categorical || s.is_extractive) << s.slot.str();
    EXPECT_EQ(s.is_categorical, !s.choice_values.empty()) << s.slot.str();
    if (s.is_categorical && s.is_extractive) ++c.both;
    else if (s.is_categorical) ++c.categorical_only;
    else ++c.extractive_only;
  }
  return c;
}

TEST(ClassifySlots, PublishedStatisticsGive3_12_15) {
  const auto s = from_published_stats();
  const auto specs = classify_slots(s.stats, s.ontology, builtin_questions());
  ASSERT_EQ(specs.size(), 30u);
  const Counts c = count(specs);
  EXPECT_EQ(c.categorical_only, 3);
  EXPECT_EQ(c.both, 12);
  EXPECT_EQ(c.extractive_only, 15);
  for (const auto& row : test::kPublishedSlotStats) {
    const auto it = std::find_if(specs.begin(), specs.end(), [&](const SlotSpec& sp) { return sp.slot.str() == row.slot; });
    ASSERT_NE(it, specs.end());
    EXPECT_EQ(it->is_categorical, row.categorical) << row.slot;
    EXPECT_EQ(it->is_extractive, row.extractive) << row.slot;
    EXPECT_FALSE(it->question.empty());
  }
}

TEST(ClassifySlots, PermutationInvariant) {
  auto s = from_published_stats();
  const auto reference = specs_to_json(classify_slots(s.stats, s.ontology, builtin_questions()));
  std::mt19937 gen(3);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(s.stats.begin(), s.stats.end(), gen);
    EXPECT_EQ(specs_to_json(classify_slots(s.stats, s.ontology, builtin_questions())), reference);
  }
}

TEST(ClassifySlots, ZeroCategoricalAllExtractive) {
  auto s = from_published_stats();
  for (auto& st : s.stats) st.exact_match_rate = 0.95;
  const auto specs = classify_slots(s.stats, s.ontology, builtin_questions(), ClassifyOptions{0, 0.80});
  EXPECT_EQ(count(specs).extractive_only, 30);
}

TEST(ClassifySlots, FallbackForcesCategorical) {
  auto s = from_published_stats();
  // Outside a two-slot prefix and below the threshold.
  const auto specs = [&] {
    for (auto& st : s.stats) {
      if (st.slot.str() == "taxi.semi.departure") st.exact_match_rate = 0.10;
    }
    return classify_slots(s.stats, s.ontology, builtin_questions(), ClassifyOptions{2, 0.80});
  }();
  const auto it = std::find_if(specs.begin(), specs.end(),
                               [](const SlotSpec& sp) { return sp.slot.str() == "taxi.semi.departure"; });
  ASSERT_NE(it, specs.end());
  EXPECT_TRUE(it->is_categorical);
  EXPECT_FALSE(it->is_extractive);
  EXPECT_EQ(it->choice_values.size(), 253u);
}

TEST(ClassifySlots, TieBreakBySlotName) {
  const auto s = from_published_stats();
  const auto specs = classify_slots(s.stats, s.ontology, builtin_questions());
  EXPECT_EQ(specs[0].slot.str(), "hotel.semi.internet");
  EXPECT_EQ(specs[1].slot.str(), "hotel.semi.type");
  EXPECT_EQ(specs[14].slot.str(), "hotel.book.day");
}

TEST(ClassifySlots, InvalidConfig) {
  const auto s = from_published_stats();
  try {
    classify_slots(s.stats, s.ontology, builtin_questions(), ClassifyOptions{31, 0.8});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
  }
}

TEST(SlotStats, VerbatimValueRateOne) {
  const Ontology o = test::small_ontology();
  DialogueCorpus c;
  c.ontology = o;
  c.dialogues.push_back(test::make_dialogue("d", {{"i want the north please", std::nullopt, {{"hotel.semi.area", "north"}}}}));
  const auto stats = compute_slot_stats(c);
  ASSERT_EQ(stats.size(), o.values.size());
  for (const auto& st : stats) {
    if (st.slot.str() == "hotel.semi.area") {
      EXPECT_EQ(st.num_concrete, 1u);
      EXPECT_DOUBLE_EQ(st.exact_match_rate, 1.0);
      EXPECT_EQ(st.num_possible_values, 5u);
    } else {
      EXPECT_EQ(st.num_concrete, 0u);
      EXPECT_DOUBLE_EQ(st.exact_match_rate, 0.0);
    }
  }
}

TEST(SlotStats, FullContextAlternativesAndParallelism) {
  DialogueCorpus c;
  c.ontology = test::small_ontology();
  c.dialogues.push_back(test::restaurant_dialogue());
  c.dialogues.push_back(test::make_dialogue(
      "cheaply", {{"somewhere cheaply priced", std::nullopt, {{"restaurant.semi.pricerange", "cheap"}}},
                  {"or moderate", std::nullopt, {{"restaurant.semi.pricerange", "expensive|moderate"}}}}));
  const auto serial = compute_slot_stats(c, 1);
  const auto parallel = compute_slot_stats(c, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].num_matched, parallel[i].num_matched);
    EXPECT_EQ(serial[i].num_concrete, parallel[i].num_concrete);
    if (serial[i].slot.str() == "restaurant.semi.pricerange") {
      // expensive x2 (turns 2, 3), cheap unmatched, "expensive|moderate" matched via "moderate".
      EXPECT_EQ(serial[i].num_concrete, 4u);
      EXPECT_EQ(serial[i].num_matched, 3u);
    }
    if (serial[i].slot.str() == "restaurant.semi.area") {
      EXPECT_EQ(serial[i].num_matched, 3u);  // "centre" from turn 1 stays in the context
    }
  }
}

TEST(SlotStats, EmptyCorpus) {
  DialogueCorpus c;
  c.ontology = test::small_ontology();
  EXPECT_THROW(compute_slot_stats(c), Error);
}

TEST(Questions, BuiltinCoversAllSlotsAndFallback) {
  const auto& q = builtin_questions();
  EXPECT_EQ(q.size(), 30u);
  EXPECT_EQ(q.at(SlotName::parse("restaurant.semi.food")), "what type of food does the user want to eat?");
  EXPECT_EQ(q.at(SlotName::parse("taxi.semi.departure")), "where does the taxi leave from?");
  EXPECT_FALSE(question_for(q, SlotName::parse("bus.semi.colour")).empty());
}

TEST(StatsCsv, HeaderAndRows) {
  const auto s = from_published_stats();
  const auto specs = classify_slots(s.stats, s.ontology, builtin_questions());
  std::ostringstream out;
  write_stats_csv(out, s.stats, specs);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "slot,num_possible_values,exact_match_rate,is_categorical,is_extractive");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 30);
}

TEST(Specs, JsonRoundTrip) {
  const auto s = from_published_stats();
  const auto specs = classify_slots(s.stats, s.ontology, builtin_questions());
  const auto back = specs_from_json(specs_to_json(specs));
  EXPECT_EQ(specs_to_json(back), specs_to_json(specs));
}

}  // namespace
}  // namespace dstrc

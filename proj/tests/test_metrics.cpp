#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "dstrc/error.hpp"
#include "dstrc/metrics.hpp"
#include "metric_fixtures.hpp"

namespace dstrc {
namespace {

using test::make_dialogue;

DialogueCorpus two_turn_corpus() {
  DialogueCorpus c;
  c.ontology = test::small_ontology();
  c.dialogues.push_back(make_dialogue(
      "d", {{"north cheap", std::nullopt, {{"hotel.semi.area", "north"}, {"hotel.semi.pricerange", "cheap"}}},
            {"and parking", std::nullopt,
             {{"hotel.semi.area", "north"}, {"hotel.semi.pricerange", "cheap"}, {"hotel.semi.parking", "yes"}}}}));
  return c;
}

std::vector<SlotName> hotel_slots() {
  return {SlotName::parse("hotel.semi.area"), SlotName::parse("hotel.semi.pricerange"),
          SlotName::parse("hotel.semi.parking")};
}

TEST(JointGoalAccuracy, OracleIsOne) {
  const auto c = two_turn_corpus();
  EXPECT_EQ(joint_goal_accuracy(test::gold_predictions(c, hotel_slots()), c, hotel_slots()), 1.0);
}

TEST(JointGoalAccuracy, OneWrongSlotInTwoTurns) {
  const auto c = two_turn_corpus();
  auto preds = test::gold_predictions(c, hotel_slots());
  preds[1].state.at(SlotName::parse("hotel.semi.parking")).value = SlotValue::value("no");
  EXPECT_EQ(joint_goal_accuracy(preds, c, hotel_slots()), 0.5);
}

TEST(JointGoalAccuracy, AlwaysNoneOnThirtyPercentEmpty) {
  DialogueCorpus c;
  c.ontology = test::small_ontology();
  std::vector<test::TurnSpec> turns;
  for (int i = 0; i < 10; ++i) {
    test::TurnSpec t{"turn"};
    if (i % 10 >= 3) t.state = {{"hotel.semi.area", "east"}};
    turns.push_back(t);
  }
  c.dialogues.push_back(make_dialogue("a", {turns.begin(), turns.begin() + 4}));
  c.dialogues.push_back(make_dialogue("b", {turns.begin() + 4, turns.end()}));
  // Turns 0-2 of dialogue "a" have empty gold states: 3 of 10.
  const auto slots = hotel_slots();
  EXPECT_DOUBLE_EQ(joint_goal_accuracy(test::always_none(c, slots), c, slots), 0.3);
  for (const auto& [slot, acc] : slot_metrics(test::always_none(c, slots), c, slots, true)) {
    EXPECT_EQ(acc.ratio(), 0.0) << slot.str();
  }
}

TEST(JointGoalAccuracy, AlternativesAndAliases) {
  DialogueCorpus c;
  c.ontology = test::small_ontology();
  c.ontology.aliases["center"] = "centre";
  c.dialogues.push_back(make_dialogue("d", {{"x", std::nullopt, {{"hotel.semi.area", "centre|north"}}}}));
  const std::vector<SlotName> slots{SlotName::parse("hotel.semi.area")};
  auto preds = test::always_none(c, slots);
  for (const char* v : {"north", "centre", "center", "North"}) {
    preds[0].state.at(slots[0]).value = SlotValue::value(v);
    EXPECT_EQ(joint_goal_accuracy(preds, c, slots), 1.0) << v;
  }
  preds[0].state.at(slots[0]).value = SlotValue::value("south");
  EXPECT_EQ(joint_goal_accuracy(preds, c, slots), 0.0);
}

TEST(JointGoalAccuracy, MissingPrediction) {
  const auto c = two_turn_corpus();
  auto preds = test::gold_predictions(c, hotel_slots());
  preds.pop_back();
  try {
    joint_goal_accuracy(preds, c, hotel_slots());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingPrediction);
  }
  auto partial = test::gold_predictions(c, hotel_slots());
  partial[0].state.erase(SlotName::parse("hotel.semi.area"));
  EXPECT_THROW(joint_goal_accuracy(partial, c, hotel_slots()), Error);
}

TEST(SlotMetrics, NonemptyNinetyPercent) {
  DialogueCorpus c;
  c.ontology = test::small_ontology();
  std::vector<test::TurnSpec> turns;
  for (int i = 0; i < 15; ++i) {
    test::TurnSpec t{"t"};
    if (i < 10) t.state = {{"hotel.semi.area", "east"}};
    turns.push_back(t);
  }
  c.dialogues.push_back(make_dialogue("d", turns));
  const std::vector<SlotName> slots{SlotName::parse("hotel.semi.area")};
  auto preds = test::gold_predictions(c, slots);
  preds[4].state.at(slots[0]).value = SlotValue::value("west");
  const auto nonempty = slot_metrics(preds, c, slots, true);
  EXPECT_DOUBLE_EQ(nonempty.at(slots[0]).ratio(), 0.9);
  EXPECT_EQ(nonempty.at(slots[0]).total, 10u);
  const auto all = slot_metrics(preds, c, slots, false);
  EXPECT_DOUBLE_EQ(all.at(slots[0]).ratio(), 14.0 / 15.0);
}

TEST(SlotMetrics, OracleOneBothModes) {
  const auto c = test::load_fixture50();
  std::vector<SlotName> slots;
  for (const auto& [s, v] : c.ontology.values) slots.push_back(s);
  const auto preds = test::gold_predictions(c, slots);
  for (bool mode : {false, true}) {
    for (const auto& [slot, acc] : slot_metrics(preds, c, slots, mode)) {
      if (acc.total) EXPECT_EQ(acc.ratio(), 1.0) << slot.str();
    }
  }
}

TEST(Metrics, JointNeverExceedsSlotAccuracy) {
  const auto c = test::load_fixture50();
  std::vector<SlotName> slots;
  for (const auto& [s, v] : c.ontology.values) slots.push_back(s);
  std::mt19937_64 gen(2024);
  for (int i = 0; i < 20; ++i) {
    const auto preds = test::noisy_predictions(c, slots, gen, 0.02 * (i % 10));
    const double jga = joint_goal_accuracy(preds, c, slots);
    for (const auto& [slot, acc] : slot_metrics(preds, c, slots, false)) EXPECT_LE(jga, acc.ratio()) << slot.str();
  }
}

TEST(Metrics, PermutationInvariant) {
  const auto c = test::load_fixture50();
  std::vector<SlotName> slots;
  for (const auto& [s, v] : c.ontology.values) slots.push_back(s);
  std::mt19937_64 gen(9);
  auto preds = test::noisy_predictions(c, slots, gen, 0.1);
  const double jga = joint_goal_accuracy(preds, c, slots);
  std::shuffle(preds.begin(), preds.end(), gen);
  DialogueCorpus shuffled = c;
  std::shuffle(shuffled.dialogues.begin(), shuffled.dialogues.end(), gen);
  EXPECT_EQ(joint_goal_accuracy(preds, shuffled, slots), jga);
}

TEST(ErrorBreakdown, Classification) {
  EXPECT_EQ(classify_error(SlotValue::none(), SlotValue::value("north")), ErrorType::kRefNotNonePredNone);
  EXPECT_EQ(classify_error(SlotValue::value("yes"), SlotValue::none()), ErrorType::kRefNonePredNotNone);
  EXPECT_EQ(classify_error(SlotValue::value("16:07"), SlotValue::value("15:29")), ErrorType::kBothNotNoneMismatch);
  EXPECT_EQ(classify_error(SlotValue::dont_care("dontcare"), SlotValue::value("x")), ErrorType::kBothNotNoneMismatch);
}

TEST(ErrorBreakdown, PartitionsErrorsByModel) {
  const auto c = test::load_fixture50();
  std::vector<SlotSpec> specs;
  for (const auto& [s, v] : c.ontology.values) specs.push_back(test::spec_for(c.ontology, s.str(), v.size() <= 5, true));
  const auto slots = active_slots(specs);
  std::mt19937_64 gen(5);
  const auto preds = test::noisy_predictions(c, slots, gen, 0.2);
  const auto breakdown = error_breakdown(preds, c, specs, TrackOptions{});
  std::size_t total_errors = 0, wrong = 0;
  for (const auto& [type, counts] : breakdown) total_errors += counts.total();
  for (const auto& [slot, acc] : slot_metrics(preds, c, slots, false)) wrong += acc.total - acc.correct;
  EXPECT_EQ(total_errors, wrong);
  EXPECT_GT(breakdown.at(ModelType::kCategorical).total(), 0u);
  EXPECT_GT(breakdown.at(ModelType::kExtractive).total(), 0u);

  TrackOptions span_only;
  span_only.use_categorical_model = false;
  const auto all_span = error_breakdown(preds, c, specs, span_only);
  EXPECT_EQ(all_span.count(ModelType::kCategorical) ? all_span.at(ModelType::kCategorical).total() : 0u, 0u);
  EXPECT_EQ(all_span.at(ModelType::kExtractive).total(), wrong);
}

TEST(Evaluate, ReportAndCsv) {
  const auto c = two_turn_corpus();
  std::vector<SlotSpec> specs;
  for (const auto& s : hotel_slots()) specs.push_back(test::spec_for(c.ontology, s.str(), true, false));
  auto preds = test::gold_predictions(c, hotel_slots());
  preds[1].state.at(SlotName::parse("hotel.semi.parking")).value = SlotValue::none();
  const auto report = evaluate(preds, c, specs, TrackOptions{});
  EXPECT_EQ(report.num_turns, 2u);
  EXPECT_EQ(report.joint_goal_accuracy, 0.5);
  EXPECT_EQ(report.errors.at(ModelType::kCategorical).ref_not_none_pred_none, 1u);
  EXPECT_EQ(report.config_fingerprint.size(), 16u);

  TrackOptions other;
  other.decode.null_threshold = 1.0;
  EXPECT_NE(config_fingerprint(other, specs), report.config_fingerprint);
  EXPECT_EQ(config_fingerprint(TrackOptions{}, specs), report.config_fingerprint);
  TrackOptions jobs;
  jobs.jobs = 7;
  EXPECT_EQ(config_fingerprint(jobs, specs), report.config_fingerprint);

  std::ostringstream summary, slots;
  write_summary_csv(summary, report);
  write_slot_csv(slots, report);
  EXPECT_NE(summary.str().find("joint_goal_accuracy,0.5"), std::string::npos) << summary.str();
  EXPECT_EQ(slots.str().substr(0, slots.str().find('\n')),
            "slot,model,accuracy,correct,total,nonempty_accuracy,nonempty_correct,nonempty_total");
  const auto j = to_json(report);
  EXPECT_EQ(j["joint_goal_accuracy"], 0.5);
}

}  // namespace
}  // namespace dstrc

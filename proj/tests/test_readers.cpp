#include <gtest/gtest.h>

#include <algorithm>

#include "dstrc/decode.hpp"
#include "dstrc/error.hpp"
#include "dstrc/readers.hpp"
#include "test_support.hpp"

namespace dstrc {
namespace {

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

struct Fixture {
  DialogueCorpus corpus;
  Fixture() {
    corpus.ontology = test::small_ontology();
    corpus.dialogues = {test::restaurant_dialogue(), test::hotel_dialogue()};
  }
  ReaderQuery query(const Dialogue& d, int turn, const std::string& slot, const SerializedContext& ctx,
                    std::vector<std::string> options = {}) const {
    return ReaderQuery{d.id + "/" + std::to_string(turn) + "/" + slot, d.id, turn, SlotName::parse(slot), "q?",
                       &ctx, std::move(options)};
  }
};

TEST(OracleReader, SpanPeaksAtGold) {
  Fixture f;
  const auto& d = f.corpus.dialogues[0];
  const auto ctx = serialize_context(d, 3);
  OracleReader oracle(f.corpus);
  const auto q = f.query(d, 3, "restaurant.semi.name", ctx);
  const auto s = score_span(oracle, q);
  const auto span = find_value_span(ctx, SlotValue::value("fitzbillies restaurant"));
  EXPECT_EQ(argmax(s.start_logits), span->first);
  EXPECT_EQ(argmax(s.end_logits), span->second);
  EXPECT_FALSE(s.forced_value);

  const auto none = score_span(oracle, f.query(d, 1, "restaurant.semi.name", serialize_context(d, 1)));
  EXPECT_EQ(argmax(none.start_logits), 0u);
  const auto dc = score_span(oracle, f.query(d, 3, "restaurant.semi.food", ctx));
  ASSERT_TRUE(dc.forced_value);
  EXPECT_TRUE(dc.forced_value->is_dont_care());
}

TEST(OracleReader, ChoiceGoldIsOne) {
  Fixture f;
  const auto& d = f.corpus.dialogues[1];
  const auto ctx = serialize_context(d, 2);
  OracleReader oracle(f.corpus);
  const std::vector<std::string> options{"yes", "no", "free", "do not care", "not mentioned"};
  const auto s = score_choice(oracle, f.query(d, 2, "hotel.semi.parking", ctx, options));
  EXPECT_EQ(s.option_logits, (std::vector<double>{1, 0, 0, 0, 0}));
}

TEST(OracleReader, UnknownDialogueFails) {
  Fixture f;
  OracleReader oracle(f.corpus);
  const auto other = test::make_dialogue("nope", {{"x"}});
  const auto ctx = serialize_context(other, 1);
  try {
    score_span(oracle, f.query(other, 1, "hotel.semi.area", ctx));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kReaderFailure);
  }
}

TEST(ExactMatchReader, SpanFallbackAndLatestValue) {
  Fixture f;
  ExactMatchReader reader(f.corpus.ontology);
  const auto d = test::make_dialogue("d", {{"nothing relevant here"}});
  const auto ctx = serialize_context(d, 1);
  const auto s = score_span(reader, f.query(d, 1, "hotel.semi.area", ctx));
  EXPECT_EQ(argmax(s.start_logits), 0u);
  EXPECT_EQ(argmax(s.end_logits), 0u);

  const auto two = test::make_dialogue("d", {{"north or maybe the south", "ok"}, {"hmm"}});
  const auto ctx2 = serialize_context(two, 2);
  const auto s2 = score_span(reader, f.query(two, 2, "hotel.semi.area", ctx2));
  EXPECT_EQ(ctx2.tokens[argmax(s2.start_logits)].text, "south");
}

TEST(ExactMatchReader, RestaurantNameThroughDecoding) {
  Fixture f;
  ExactMatchReader reader(f.corpus.ontology);
  const auto& d = f.corpus.dialogues[0];
  const auto ctx = serialize_context(d, 3);
  const auto q = f.query(d, 3, "restaurant.semi.name", ctx);
  const auto p = predict_from_span(score_span(reader, q), ctx, q.slot, f.corpus.ontology, {});
  EXPECT_EQ(p.value, SlotValue::value("fitzbillies restaurant"));
}

TEST(ExactMatchReader, Choice) {
  Fixture f;
  ExactMatchReader reader(f.corpus.ontology);
  const auto d = test::make_dialogue("d", {{"somewhere in the north"}});
  const auto ctx = serialize_context(d, 1);
  const std::vector<std::string> options{"east", "west", "north", "south", "centre", "do not care", "not mentioned"};
  const auto s = score_choice(reader, f.query(d, 1, "hotel.semi.area", ctx, options));
  EXPECT_EQ(options[argmax(s.option_logits)], "north");
  EXPECT_EQ(s.option_logits[5], 0.0);
  EXPECT_EQ(s.option_logits[6], 0.5);

  const auto empty = test::make_dialogue("d", {{"hello"}});
  const auto ectx = serialize_context(empty, 1);
  const auto e = score_choice(reader, f.query(empty, 1, "hotel.semi.area", ectx, options));
  EXPECT_EQ(options[argmax(e.option_logits)], "not mentioned");
}

TEST(RandomReader, DeterministicAndOrderFree) {
  Fixture f;
  const auto& d = f.corpus.dialogues[0];
  const auto ctx = serialize_context(d, 3);
  const auto q = f.query(d, 3, "restaurant.semi.name", ctx);
  RandomReader a(42), b(42), c(43);
  const auto other = f.query(d, 3, "restaurant.semi.area", ctx);
  (void)b.span(other);
  const auto sa = a.span(q);
  const auto sb = b.span(q);
  EXPECT_EQ(sa.start_logits, sb.start_logits);
  EXPECT_EQ(sa.end_logits, sb.end_logits);
  EXPECT_NE(sa.start_logits, c.span(q).start_logits);
  for (double x : sa.start_logits) {
    EXPECT_GE(x, -1.0);
    EXPECT_LT(x, 1.0);
  }
}

class BrokenReader : public Reader {
 public:
  std::string name() const override { return "broken"; }
  SpanScores span(const ReaderQuery& q) override {
    return SpanScores{std::vector<double>(q.context->tokens.size() - 1), std::vector<double>(q.context->tokens.size())};
  }
  ChoiceScores choice(const ReaderQuery& q) override {
    ChoiceScores s{std::vector<double>(q.options.size(), 0.0)};
    s.option_logits[0] = std::numeric_limits<double>::infinity();
    return s;
  }
};

TEST(ScoreChecks, ShapeAndFiniteness) {
  Fixture f;
  BrokenReader broken;
  const auto& d = f.corpus.dialogues[0];
  const auto ctx = serialize_context(d, 1);
  try {
    score_span(broken, f.query(d, 1, "hotel.semi.area", ctx));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  try {
    score_choice(broken, f.query(d, 1, "hotel.semi.area", ctx, {"a", "do not care", "not mentioned"}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kReaderFailure);
  }
  EXPECT_THROW(score_choice(broken, f.query(d, 1, "hotel.semi.area", ctx, {"a", "b"})), Error);
}

}  // namespace
}  // namespace dstrc

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dstrc/corpus.hpp"
#include "dstrc/examplegen.hpp"
#include "dstrc/scores.hpp"

namespace dstrc {

/// One question put to a reader. `context` must outlive the call.
struct ReaderQuery {
  std::string id;
  std::string dialogue_id;
  int turn_index = 0;
  SlotName slot;
  std::string question;
  const SerializedContext* context = nullptr;
  std::vector<std::string> options;  // choice queries only
};

/// Maps (question, context[, options]) to raw logits. Implementations that
/// cannot take concurrent calls return false from concurrent() and the
/// tracker serializes access.
class Reader {
 public:
  virtual ~Reader() = default;

  virtual std::string name() const = 0;
  virtual bool concurrent() const { return true; }
  virtual SpanScores span(const ReaderQuery& query) = 0;
  virtual ChoiceScores choice(const ReaderQuery& query) = 0;
};

/// Calls the reader and checks the result against the query: one finite
/// logit per token / option. Throws kShapeMismatch or kReaderFailure.
SpanScores score_span(Reader& reader, const ReaderQuery& query);
/// Requires at least three options (values plus the two reserved ones).
ChoiceScores score_choice(Reader& reader, const ReaderQuery& query);

/// Reads the gold labels of `corpus`. For verification only: its scores put
/// all mass on the gold answer, falling back to forced_value when the gold
/// cannot be expressed as scores (DontCare, unspannable or out-of-ontology
/// span golds).
class OracleReader final : public Reader {
 public:
  explicit OracleReader(const DialogueCorpus& corpus);

  std::string name() const override { return "oracle"; }
  SpanScores span(const ReaderQuery& query) override;
  ChoiceScores choice(const ReaderQuery& query) override;

 private:
  const Turn& turn_of(const ReaderQuery& query) const;

  const DialogueCorpus& corpus_;
  std::map<std::string, const Dialogue*> by_id_;
};

/// Deterministic string-matching baseline. Span: logit 1 at the start and end
/// of the latest occurrence of any candidate value of the slot, 0.5 on the
/// sentinel, 0 elsewhere. Choice: 1 for options whose text occurs in the
/// context, 0 for "do not care", 0.5 for "not mentioned".
class ExactMatchReader final : public Reader {
 public:
  explicit ExactMatchReader(Ontology ontology);

  std::string name() const override { return "exact-match"; }
  SpanScores span(const ReaderQuery& query) override;
  ChoiceScores choice(const ReaderQuery& query) override;

 private:
  Ontology ontology_;
  std::map<SlotName, std::vector<std::vector<std::string>>> candidate_tokens_;
};

/// Uniform logits in [-1, 1) from SplitMix64 seeded by `seed` mixed with a
/// hash of the query content, so results do not depend on call order.
class RandomReader final : public Reader {
 public:
  explicit RandomReader(std::uint64_t seed) : seed_(seed) {}

  std::string name() const override { return "random"; }
  SpanScores span(const ReaderQuery& query) override;
  ChoiceScores choice(const ReaderQuery& query) override;

 private:
  std::uint64_t query_seed(const ReaderQuery& query) const;

  std::uint64_t seed_;
};

}  // namespace dstrc

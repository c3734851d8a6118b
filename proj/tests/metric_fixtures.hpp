#pragma once

#include <random>
#include <string>
#include <vector>

#include "dstrc/metrics.hpp"
#include "test_support.hpp"

namespace dstrc::test {

inline StatePrediction empty_prediction(const Dialogue& d, int turn, const std::vector<SlotName>& slots) {
  StatePrediction p;
  p.dialogue_id = d.id;
  p.turn_index = turn;
  for (const auto& s : slots) p.state.emplace(s, SlotPrediction{s, SlotValue::none(), std::nullopt, 0.0});
  return p;
}

inline std::vector<StatePrediction> gold_predictions(const DialogueCorpus& corpus, const std::vector<SlotName>& slots) {
  std::vector<StatePrediction> out;
  for (const auto& d : corpus.dialogues) {
    for (const auto& t : d.turns) {
      auto p = empty_prediction(d, t.index, slots);
      for (const auto& s : slots) p.state.at(s).value = t.gold(s);
      out.push_back(std::move(p));
    }
  }
  return out;
}

inline std::vector<StatePrediction> always_none(const DialogueCorpus& corpus, const std::vector<SlotName>& slots) {
  std::vector<StatePrediction> out;
  for (const auto& d : corpus.dialogues) {
    for (const auto& t : d.turns) out.push_back(empty_prediction(d, t.index, slots));
  }
  return out;
}

/// Gold predictions with each (turn, slot) replaced, with probability
/// `noise`, by None, DontCare or a random candidate.
inline std::vector<StatePrediction> noisy_predictions(const DialogueCorpus& corpus, const std::vector<SlotName>& slots,
                                                      std::mt19937_64& gen, double noise) {
  auto out = gold_predictions(corpus, slots);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& p : out) {
    for (auto& [slot, pred] : p.state) {
      if (u(gen) >= noise) continue;
      const auto& values = corpus.ontology.candidates(slot);
      switch (gen() % 3) {
        case 0: pred.value = SlotValue::none(); break;
        case 1: pred.value = SlotValue::dont_care("dontcare"); break;
        default: pred.value = SlotValue::value(values[gen() % values.size()]); break;
      }
    }
  }
  return out;
}

}  // namespace dstrc::test

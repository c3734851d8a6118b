#include "dstrc/corpus.hpp"

#include "dstrc/error.hpp"
#include "dstrc/text.hpp"

namespace dstrc {

const std::vector<std::string>& Ontology::candidates(const SlotName& slot) const {
  auto it = values.find(slot);
  if (it == values.end()) {
    throw Error(ErrorCode::kUnknownSlotInOntology, slot.str());
  }
  return it->second;
}

const std::string& Ontology::resolve_alias(const std::string& normalized) const {
  auto it = aliases.find(normalized);
  return it == aliases.end() ? normalized : it->second;
}

bool values_match(const SlotValue& predicted, const SlotValue& gold, const Ontology& ontology) {
  if (predicted.kind() != gold.kind()) return false;
  if (!gold.is_value()) return true;
  for (const auto& p : predicted.alternatives()) {
    const std::string pn = normalize_text(p);
    const std::string& pa = ontology.resolve_alias(pn);
    for (const auto& g : gold.alternatives()) {
      const std::string gn = normalize_text(g);
      if (pa == ontology.resolve_alias(gn)) return true;
    }
  }
  return false;
}

}  // namespace dstrc

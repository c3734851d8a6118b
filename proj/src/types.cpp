#include "dstrc/types.hpp"

#include <algorithm>
#include <cctype>

#include "dstrc/error.hpp"

namespace dstrc {

namespace {

bool valid_part(std::string_view part) {
  return !part.empty() && std::none_of(part.begin(), part.end(), [](unsigned char c) {
    return std::isspace(c) || c == '.';
  });
}

}  // namespace

std::string_view to_string(SlotGroup group) {
  return group == SlotGroup::kSemi ? "semi" : "book";
}

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::kNone: return "none";
    case ValueKind::kDontCare: return "dontcare";
    case ValueKind::kValue: return "value";
  }
  return "none";
}

SlotName::SlotName(std::string domain, SlotGroup group, std::string name)
    : domain_(std::move(domain)), group_(group), name_(std::move(name)) {
  if (!valid_part(domain_) || !valid_part(name_)) {
    throw Error(ErrorCode::kMalformedCorpus,
                "invalid slot name parts '" + domain_ + "', '" + name_ + "'");
  }
  key_ = domain_ + "." + std::string(to_string(group_)) + "." + name_;
}

std::optional<SlotName> SlotName::try_parse(std::string_view text) {
  const auto first = text.find('.');
  if (first == std::string_view::npos) return std::nullopt;
  const auto second = text.find('.', first + 1);
  if (second == std::string_view::npos) return std::nullopt;
  const auto domain = text.substr(0, first);
  const auto group = text.substr(first + 1, second - first - 1);
  const auto name = text.substr(second + 1);
  if (!valid_part(domain) || !valid_part(name)) return std::nullopt;
  SlotGroup g;
  if (group == "semi") {
    g = SlotGroup::kSemi;
  } else if (group == "book") {
    g = SlotGroup::kBook;
  } else {
    return std::nullopt;
  }
  return SlotName(std::string(domain), g, std::string(name));
}

SlotName SlotName::parse(std::string_view text) {
  auto parsed = try_parse(text);
  if (!parsed) {
    throw Error(ErrorCode::kMalformedCorpus, "bad slot name '" + std::string(text) + "'");
  }
  return *std::move(parsed);
}

SlotValue SlotValue::dont_care(std::string raw) {
  SlotValue v;
  v.kind_ = ValueKind::kDontCare;
  v.raw_ = std::move(raw);
  return v;
}

SlotValue SlotValue::value(std::vector<std::string> alternatives, std::string raw) {
  std::erase_if(alternatives, [](const std::string& s) { return s.empty(); });
  if (alternatives.empty()) {
    throw Error(ErrorCode::kMalformedCorpus, "concrete value with empty text");
  }
  SlotValue v;
  v.kind_ = ValueKind::kValue;
  if (raw.empty()) raw = alternatives.front();
  v.raw_ = std::move(raw);
  v.alternatives_ = std::move(alternatives);
  return v;
}

const std::string& SlotValue::text() const {
  static const std::string kEmpty;
  return alternatives_.empty() ? kEmpty : alternatives_.front();
}

SlotValue Turn::gold(const SlotName& slot) const {
  auto it = gold_state.find(slot);
  return it == gold_state.end() ? SlotValue::none() : it->second;
}

}  // namespace dstrc

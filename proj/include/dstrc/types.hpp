#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dstrc {

enum class SlotGroup { kSemi, kBook };

std::string_view to_string(SlotGroup group);

/// A (domain, slot) pair, canonically written "domain.group.name".
class SlotName {
 public:
  /// Empty name; only useful as a placeholder before assignment.
  SlotName() = default;
  SlotName(std::string domain, SlotGroup group, std::string name);

  /// Throws Error(kMalformedCorpus) when `text` is not "domain.group.name".
  static SlotName parse(std::string_view text);
  static std::optional<SlotName> try_parse(std::string_view text);

  const std::string& domain() const { return domain_; }
  SlotGroup group() const { return group_; }
  const std::string& name() const { return name_; }
  const std::string& str() const { return key_; }

  friend bool operator==(const SlotName& a, const SlotName& b) { return a.key_ == b.key_; }
  friend std::strong_ordering operator<=>(const SlotName& a, const SlotName& b) {
    return a.key_ <=> b.key_;
  }

 private:
  std::string domain_;
  SlotGroup group_ = SlotGroup::kSemi;
  std::string name_;
  std::string key_;
};

enum class ValueKind { kNone, kDontCare, kValue };

std::string_view to_string(ValueKind kind);

/// A dialogue-state value. Concrete values keep every normalized alternative
/// of a multi-valued annotation ("a|b"); the first one is the primary value.
class SlotValue {
 public:
  SlotValue() = default;

  static SlotValue none() { return SlotValue(); }
  static SlotValue dont_care(std::string raw = "dontcare");
  /// `alternatives` must be normalized and non-empty.
  static SlotValue value(std::vector<std::string> alternatives, std::string raw = {});
  static SlotValue value(std::string text) { return value(std::vector<std::string>{std::move(text)}); }

  ValueKind kind() const { return kind_; }
  bool is_none() const { return kind_ == ValueKind::kNone; }
  bool is_dont_care() const { return kind_ == ValueKind::kDontCare; }
  bool is_value() const { return kind_ == ValueKind::kValue; }

  const std::string& raw() const { return raw_; }
  const std::vector<std::string>& alternatives() const { return alternatives_; }
  /// Primary text; empty for None / DontCare.
  const std::string& text() const;

  friend bool operator==(const SlotValue&, const SlotValue&) = default;

 private:
  ValueKind kind_ = ValueKind::kNone;
  std::vector<std::string> alternatives_;
  std::string raw_;
};

using DialogueState = std::map<SlotName, SlotValue>;

struct Turn {
  int index = 1;  // 1-based
  std::string user_utterance;
  std::optional<std::string> agent_utterance;
  /// Slots absent from the map are None.
  DialogueState gold_state;

  /// Gold value of `slot`, None when unset.
  SlotValue gold(const SlotName& slot) const;
};

struct Dialogue {
  std::string id;
  std::set<std::string> domains;
  std::vector<Turn> turns;
};

enum class Speaker { kUser, kAgent, kSentinel };

struct Token {
  std::string text;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  int turn_index = 0;
  Speaker speaker = Speaker::kUser;
};

}  // namespace dstrc

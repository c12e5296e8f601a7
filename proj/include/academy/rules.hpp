#pragma once

// Forward-chaining production rules over single-valued (attribute, value)
// facts. Rules use the expert-system shell's defrule syntax:
//
//   (defrule <name> <cond> => (store <key> <value>)+)
//   <cond> := (and (<attr> <value>)+) | (<attr> <value>)
//
// Conflict resolution: more conditions fire first, ties go to the earlier
// rule, each rule fires at most once per run, and the first store to a key
// wins.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace academy {

struct Fact {
  std::string attribute;
  std::string value;
  friend bool operator==(const Fact&, const Fact&) = default;
};

struct StoreAction {
  std::string key;
  std::string value;
  friend bool operator==(const StoreAction&, const StoreAction&) = default;
};

struct Rule {
  std::string name;
  std::vector<Fact> conditions;
  std::vector<StoreAction> actions;
  friend bool operator==(const Rule&, const Rule&) = default;
};

// Throws NotADefrule, MissingArrow, EmptyConditions, EmptyActions,
// DuplicateConditionAttribute, MalformedRule, or a ParseError from the SL
// reader.
Rule parse_defrule(std::string_view source);

// Canonical defrule text; conditions are always wrapped in (and ...).
std::string to_defrule(const Rule& rule);

// Ordered rule list with unique names.
class RuleBase {
 public:
  RuleBase() = default;
  // Throws DuplicateRuleName.
  explicit RuleBase(std::vector<Rule> rules);

  void add(Rule rule);
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }

  friend bool operator==(const RuleBase&, const RuleBase&) = default;

 private:
  std::vector<Rule> rules_;
};

class WorkingMemory {
 public:
  // Replaces any existing value for the attribute.
  void assert_fact(const Fact& fact);
  // No-op when the attribute is absent.
  void retract_fact(std::string_view attribute);

  std::optional<std::string> fact(std::string_view attribute) const;
  std::optional<std::string> stored(std::string_view key) const;

  const std::map<std::string, std::string, std::less<>>& facts() const noexcept { return facts_; }
  const std::map<std::string, std::string, std::less<>>& store() const noexcept { return store_; }

  // Fires the matching rules of `rules` against the current facts. The store
  // is cleared first, so the result depends only on facts and rule order.
  void run(const RuleBase& rules);

  friend bool operator==(const WorkingMemory&, const WorkingMemory&) = default;

 private:
  std::map<std::string, std::string, std::less<>> facts_;
  std::map<std::string, std::string, std::less<>> store_;
};

// Value-returning forms of the working-memory operations.
WorkingMemory assert_fact(WorkingMemory mem, const Fact& fact);
WorkingMemory retract_fact(WorkingMemory mem, std::string_view attribute);
WorkingMemory run(WorkingMemory mem, const RuleBase& rules);

}  // namespace academy

#include "academy/rules.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "academy/error.hpp"
#include "academy/sl.hpp"

namespace academy {

namespace {

using sl::Node;

Fact read_pattern(const Node& node) {
  if (!node.is_list() || node.children().size() != 2 || !node.children()[0].is_atom() ||
      !node.children()[1].is_atom()) {
    throw Error(Errc::MalformedRule, "pattern must be (<attribute> <value>), got " + sl::print(node));
  }
  return {node.children()[0].text(), node.children()[1].text()};
}

StoreAction read_action(const Node& node) {
  const auto& kids = node.children();
  if (!node.has_head("store") || kids.size() != 3 || !kids[1].is_atom() || !kids[2].is_atom()) {
    throw Error(Errc::MalformedRule, "action must be (store <key> <value>), got " + sl::print(node));
  }
  return {kids[1].text(), kids[2].text()};
}

}  // namespace

Rule parse_defrule(std::string_view source) {
  Node root = sl::parse(source);
  if (!root.has_head("defrule")) throw Error(Errc::NotADefrule, std::string(source));
  const auto& kids = root.children();
  if (kids.size() < 2 || !kids[1].is_atom()) throw Error(Errc::NotADefrule, "missing rule name");

  Rule rule{kids[1].text(), {}, {}};
  auto arrow = std::find_if(kids.begin() + 2, kids.end(), [](const Node& n) { return n.is_atom("=>"); });
  if (arrow == kids.end()) throw Error(Errc::MissingArrow, rule.name);

  // Several condition elements before "=>" are an implicit conjunction, as in
  // CLIPS; (and ...) groups are flattened.
  for (auto it = kids.begin() + 2; it != arrow; ++it) {
    if (it->has_head("and")) {
      for (std::size_t i = 1; i < it->children().size(); ++i) rule.conditions.push_back(read_pattern(it->children()[i]));
    } else {
      rule.conditions.push_back(read_pattern(*it));
    }
  }
  for (auto it = arrow + 1; it != kids.end(); ++it) rule.actions.push_back(read_action(*it));

  if (rule.conditions.empty()) throw Error(Errc::EmptyConditions, rule.name);
  if (rule.actions.empty()) throw Error(Errc::EmptyActions, rule.name);
  std::set<std::string_view> seen;
  for (const auto& c : rule.conditions) {
    if (!seen.insert(c.attribute).second) {
      throw Error(Errc::DuplicateConditionAttribute, rule.name + ": " + c.attribute);
    }
  }
  return rule;
}

std::string to_defrule(const Rule& rule) {
  Node conj = Node::list({Node::atom("and")});
  for (const auto& c : rule.conditions) conj.push(Node::list({Node::atom(c.attribute), Node::atom(c.value)}));
  Node root = Node::list({Node::atom("defrule"), Node::atom(rule.name), std::move(conj), Node::atom("=>")});
  for (const auto& a : rule.actions) root.push(Node::list({Node::atom("store"), Node::atom(a.key), Node::atom(a.value)}));
  return sl::print(root);
}

RuleBase::RuleBase(std::vector<Rule> rules) {
  for (auto& r : rules) add(std::move(r));
}

void RuleBase::add(Rule rule) {
  auto clash = std::find_if(rules_.begin(), rules_.end(), [&](const Rule& r) { return r.name == rule.name; });
  if (clash != rules_.end()) throw Error(Errc::DuplicateRuleName, rule.name);
  rules_.push_back(std::move(rule));
}

void WorkingMemory::assert_fact(const Fact& fact) { facts_.insert_or_assign(fact.attribute, fact.value); }

void WorkingMemory::retract_fact(std::string_view attribute) {
  auto it = facts_.find(attribute);
  if (it != facts_.end()) facts_.erase(it);
}

std::optional<std::string> WorkingMemory::fact(std::string_view attribute) const {
  auto it = facts_.find(attribute);
  if (it == facts_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> WorkingMemory::stored(std::string_view key) const {
  auto it = store_.find(key);
  if (it == store_.end()) return std::nullopt;
  return it->second;
}

void WorkingMemory::run(const RuleBase& rulebase) {
  store_.clear();
  const auto& rules = rulebase.rules();

  // Agenda order: specificity descending, then definition order.
  std::vector<std::size_t> agenda(rules.size());
  std::iota(agenda.begin(), agenda.end(), std::size_t{0});
  std::stable_sort(agenda.begin(), agenda.end(), [&](std::size_t a, std::size_t b) {
    return rules[a].conditions.size() > rules[b].conditions.size();
  });

  // Actions only write the store, never facts, so one pass reaches the
  // fixpoint and visiting each rule once gives refraction.
  for (std::size_t idx : agenda) {
    const Rule& rule = rules[idx];
    bool matches = std::all_of(rule.conditions.begin(), rule.conditions.end(), [&](const Fact& c) {
      auto it = facts_.find(c.attribute);
      return it != facts_.end() && it->second == c.value;
    });
    if (!matches) continue;
    for (const auto& action : rule.actions) store_.try_emplace(action.key, action.value);
  }
}

WorkingMemory assert_fact(WorkingMemory mem, const Fact& fact) {
  mem.assert_fact(fact);
  return mem;
}

WorkingMemory retract_fact(WorkingMemory mem, std::string_view attribute) {
  mem.retract_fact(attribute);
  return mem;
}

WorkingMemory run(WorkingMemory mem, const RuleBase& rules) {
  mem.run(rules);
  return mem;
}

}  // namespace academy

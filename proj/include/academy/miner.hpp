#pragma once

// Decision-tree induction (ID3, categorical splits) over repository training
// examples, and compilation of trees into defrule production rules.

#include <compare>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "academy/rules.hpp"
#include "academy/sl.hpp"

namespace academy {

// Alarm severity: 0 none, 1 info, 2 warning, 3 hazard.
class AlarmType {
 public:
  static constexpr int kMaxCode = 3;

  constexpr AlarmType() = default;
  // Throws InvalidAlarmType outside [0, 3].
  explicit AlarmType(int code);
  // Parses a decimal code symbol such as "3".
  static AlarmType parse(std::string_view text);

  constexpr int code() const noexcept { return code_; }
  std::string symbol() const { return std::to_string(code_); }

  friend constexpr auto operator<=>(AlarmType, AlarmType) = default;

 private:
  int code_ = 0;
};

inline constexpr std::string_view kAlarmKey = "ALARM_TYPE";
// Synthetic always-true fact used by the rule compiled from a bare leaf.
inline constexpr std::string_view kDefaultAttribute = "DEFAULT";
inline constexpr std::string_view kDefaultValue = "true";

inline constexpr std::string_view kLow = "low";
inline constexpr std::string_view kNormal = "normal";
inline constexpr std::string_view kHigh = "high";

using Assignment = std::map<std::string, std::string, std::less<>>;

struct Attribute {
  std::string name;
  std::vector<std::string> domain;
  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct TrainingExample {
  Assignment attributes;
  AlarmType label;
  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

struct Dataset {
  std::vector<Attribute> schema;
  std::vector<TrainingExample> examples;

  // Throws InvalidDataset when names repeat or an example does not conform.
  void validate() const;
  const Attribute* find(std::string_view attribute) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

class DecisionTree {
 public:
  using Branch = std::pair<std::string, DecisionTree>;

  static DecisionTree leaf(AlarmType label);
  static DecisionTree node(std::string attribute, std::vector<Branch> branches);

  bool is_leaf() const noexcept { return branches_.empty(); }
  AlarmType label() const noexcept { return label_; }
  const std::string& attribute() const noexcept { return attribute_; }
  // Branches in domain order.
  const std::vector<Branch>& branches() const noexcept { return branches_; }

  std::size_t leaf_count() const;
  std::size_t depth() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  AlarmType label_;
  std::string attribute_;
  std::vector<Branch> branches_;
};

// Checks that every node covers its attribute's full domain and that no
// attribute repeats along a path. Throws InvalidDataset.
void validate_tree(const DecisionTree& tree, std::span<const Attribute> schema);

// (leaf 3) | (node <attr> (<category> <tree>)+)
sl::Node tree_to_sl(const DecisionTree& tree);
DecisionTree tree_from_sl(const sl::Node& node);

// Indented text, one line per branch test, e.g. "ozone = normal: 3".
std::string format_tree(const DecisionTree& tree);

struct Thresholds {
  double low = 0;
  double high = 0;
  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

// Maps real readings onto {low, normal, high}: below `low` is low, up to and
// including `high` is normal, above is high.
class Discretizer {
 public:
  // Throws InvalidDataset unless low < high.
  void set(std::string variable, Thresholds thresholds);
  bool has(std::string_view variable) const;
  // Throws UnknownVariable.
  std::string discretize(std::string_view variable, double reading) const;
  const std::map<std::string, Thresholds, std::less<>>& thresholds() const noexcept { return thresholds_; }

 private:
  std::map<std::string, Thresholds, std::less<>> thresholds_;
};

// Shannon entropy in bits. Throws EmptyDataset.
double entropy(std::span<const AlarmType> labels);
// Entropy reduction from partitioning on `attribute`. Throws UnknownAttribute
// or EmptyDataset.
double information_gain(const Dataset& dataset, std::string_view attribute);

// Gains closer than this are treated as equal before the lexicographic
// tie-break.
inline constexpr double kGainTolerance = 1e-9;

// ID3. Ties on gain go to the lexicographically smallest attribute; majority
// ties go to the higher alarm code. Throws EmptyDataset.
DecisionTree induce_tree(const Dataset& dataset);

// One rule per root-to-leaf path, named rule_1, rule_2, ... in depth-first
// domain order, each storing ALARM_TYPE.
std::vector<Rule> tree_to_rules(const DecisionTree& tree);

// Throws MissingAttribute when `x` lacks a tested attribute.
AlarmType classify(const DecisionTree& tree, const Assignment& x);

}  // namespace academy

#include "academy/miner.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>

#include "academy/error.hpp"

namespace academy {

AlarmType::AlarmType(int code) : code_(code) {
  if (code < 0 || code > kMaxCode) throw Error(Errc::InvalidAlarmType, std::to_string(code));
}

AlarmType AlarmType::parse(std::string_view text) {
  int code = -1;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), code);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(Errc::InvalidAlarmType, std::string(text));
  }
  return AlarmType(code);
}

void Dataset::validate() const {
  std::set<std::string_view> names;
  for (const auto& a : schema) {
    if (a.name.empty() || !names.insert(a.name).second) {
      throw Error(Errc::InvalidDataset, "duplicate or empty attribute '" + a.name + "'");
    }
    if (a.domain.empty()) throw Error(Errc::InvalidDataset, "empty domain for " + a.name);
  }
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (ex.attributes.size() != schema.size()) {
      throw Error(Errc::InvalidDataset, "example " + std::to_string(i) + " does not match schema");
    }
    for (const auto& a : schema) {
      auto it = ex.attributes.find(a.name);
      if (it == ex.attributes.end()) {
        throw Error(Errc::InvalidDataset, "example " + std::to_string(i) + " lacks " + a.name);
      }
      if (std::find(a.domain.begin(), a.domain.end(), it->second) == a.domain.end()) {
        throw Error(Errc::InvalidDataset, "example " + std::to_string(i) + ": '" + it->second +
                                              "' is not in the domain of " + a.name);
      }
    }
  }
}

const Attribute* Dataset::find(std::string_view attribute) const {
  auto it = std::find_if(schema.begin(), schema.end(), [&](const Attribute& a) { return a.name == attribute; });
  return it == schema.end() ? nullptr : &*it;
}

DecisionTree DecisionTree::leaf(AlarmType label) {
  DecisionTree t;
  t.label_ = label;
  return t;
}

DecisionTree DecisionTree::node(std::string attribute, std::vector<Branch> branches) {
  if (attribute.empty() || branches.empty()) {
    throw Error(Errc::InvalidDataset, "internal node needs an attribute and branches");
  }
  DecisionTree t;
  t.attribute_ = std::move(attribute);
  t.branches_ = std::move(branches);
  return t;
}

std::size_t DecisionTree::leaf_count() const {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& [_, child] : branches_) n += child.leaf_count();
  return n;
}

std::size_t DecisionTree::depth() const {
  std::size_t d = 0;
  for (const auto& [_, child] : branches_) d = std::max(d, child.depth() + 1);
  return d;
}

namespace {

void validate_tree_at(const DecisionTree& t, std::span<const Attribute> schema, std::vector<std::string>& path) {
  if (t.is_leaf()) return;
  auto attr = std::find_if(schema.begin(), schema.end(), [&](const Attribute& a) { return a.name == t.attribute(); });
  if (attr == schema.end()) throw Error(Errc::InvalidDataset, "tree tests unknown attribute " + t.attribute());
  if (std::find(path.begin(), path.end(), t.attribute()) != path.end()) {
    throw Error(Errc::InvalidDataset, "attribute " + t.attribute() + " repeats on a path");
  }
  std::vector<std::string> cats;
  for (const auto& [cat, _] : t.branches()) cats.push_back(cat);
  if (cats != attr->domain) {
    throw Error(Errc::InvalidDataset, "node " + t.attribute() + " must branch on its domain in order");
  }
  path.push_back(t.attribute());
  for (const auto& [_, child] : t.branches()) validate_tree_at(child, schema, path);
  path.pop_back();
}

void format_into(const DecisionTree& t, int indent, std::string& out) {
  for (const auto& [cat, child] : t.branches()) {
    out.append(static_cast<std::size_t>(indent) * 2, ' ');
    out += t.attribute() + " = " + cat;
    if (child.is_leaf()) {
      out += ": " + child.label().symbol() + "\n";
    } else {
      out += "\n";
      format_into(child, indent + 1, out);
    }
  }
}

// Label counts indexed by alarm code.
using Counts = std::array<std::size_t, AlarmType::kMaxCode + 1>;

double entropy_of(const Counts& counts, std::size_t total) {
  double h = 0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

Counts count_labels(const Dataset& ds, std::span<const std::size_t> rows) {
  Counts counts{};
  for (std::size_t r : rows) ++counts[static_cast<std::size_t>(ds.examples[r].label.code())];
  return counts;
}

AlarmType majority(const Counts& counts) {
  int best = 0;
  for (int code = 1; code <= AlarmType::kMaxCode; ++code) {
    if (counts[static_cast<std::size_t>(code)] >= counts[static_cast<std::size_t>(best)]) best = code;
  }
  return AlarmType(best);
}

double gain_on_rows(const Dataset& ds, const Attribute& attr, std::span<const std::size_t> rows) {
  double remainder = 0;
  for (const auto& cat : attr.domain) {
    std::vector<std::size_t> part;
    for (std::size_t r : rows) {
      if (ds.examples[r].attributes.find(attr.name)->second == cat) part.push_back(r);
    }
    if (part.empty()) continue;
    remainder += static_cast<double>(part.size()) / static_cast<double>(rows.size()) *
                 entropy_of(count_labels(ds, part), part.size());
  }
  return entropy_of(count_labels(ds, rows), rows.size()) - remainder;
}

DecisionTree grow(const Dataset& ds, const std::vector<std::size_t>& rows, std::vector<const Attribute*> candidates) {
  Counts counts = count_labels(ds, rows);
  AlarmType fallback = majority(counts);
  std::size_t classes = static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
  if (classes <= 1 || candidates.empty()) return DecisionTree::leaf(fallback);

  // candidates are sorted by name, so strict improvement keeps the smallest
  // name among (near-)equal gains.
  const Attribute* best = nullptr;
  double best_gain = 0;
  for (const Attribute* attr : candidates) {
    double g = gain_on_rows(ds, *attr, rows);
    if (best == nullptr || g > best_gain + kGainTolerance) {
      best = attr;
      best_gain = g;
    }
  }
  if (best_gain <= kGainTolerance) return DecisionTree::leaf(fallback);

  candidates.erase(std::find(candidates.begin(), candidates.end(), best));
  std::vector<DecisionTree::Branch> branches;
  for (const auto& cat : best->domain) {
    std::vector<std::size_t> part;
    for (std::size_t r : rows) {
      if (ds.examples[r].attributes.find(best->name)->second == cat) part.push_back(r);
    }
    branches.emplace_back(cat, part.empty() ? DecisionTree::leaf(fallback) : grow(ds, part, candidates));
  }
  return DecisionTree::node(best->name, std::move(branches));
}

void collect_rules(const DecisionTree& t, std::vector<Fact>& path, std::vector<Rule>& out) {
  if (t.is_leaf()) {
    std::vector<Fact> conditions = path;
    if (conditions.empty()) conditions.push_back({std::string(kDefaultAttribute), std::string(kDefaultValue)});
    out.push_back({"rule_" + std::to_string(out.size() + 1), std::move(conditions),
                   {{std::string(kAlarmKey), t.label().symbol()}}});
    return;
  }
  for (const auto& [cat, child] : t.branches()) {
    path.push_back({t.attribute(), cat});
    collect_rules(child, path, out);
    path.pop_back();
  }
}

}  // namespace

void validate_tree(const DecisionTree& tree, std::span<const Attribute> schema) {
  std::vector<std::string> path;
  validate_tree_at(tree, schema, path);
}

sl::Node tree_to_sl(const DecisionTree& tree) {
  using sl::Node;
  if (tree.is_leaf()) return Node::list({Node::atom("leaf"), Node::atom(tree.label().symbol())});
  Node n = Node::list({Node::atom("node"), Node::atom(tree.attribute())});
  for (const auto& [cat, child] : tree.branches()) n.push(Node::list({Node::atom(cat), tree_to_sl(child)}));
  return n;
}

DecisionTree tree_from_sl(const sl::Node& node) {
  const auto& kids = node.children();
  if (node.has_head("leaf")) {
    if (kids.size() != 2 || !kids[1].is_atom()) throw Error(Errc::InvalidDataset, "expected (leaf <code>)");
    return DecisionTree::leaf(AlarmType::parse(kids[1].text()));
  }
  if (!node.has_head("node") || kids.size() < 3 || !kids[1].is_atom()) {
    throw Error(Errc::InvalidDataset, "expected (node <attribute> (<category> <tree>)+), got " + sl::print(node));
  }
  std::vector<DecisionTree::Branch> branches;
  for (std::size_t i = 2; i < kids.size(); ++i) {
    const auto& b = kids[i];
    if (!b.is_list() || b.children().size() != 2 || !b.children()[0].is_atom()) {
      throw Error(Errc::InvalidDataset, "expected (<category> <tree>), got " + sl::print(b));
    }
    branches.emplace_back(b.children()[0].text(), tree_from_sl(b.children()[1]));
  }
  return DecisionTree::node(kids[1].text(), std::move(branches));
}

std::string format_tree(const DecisionTree& tree) {
  if (tree.is_leaf()) return "(all): " + tree.label().symbol() + "\n";
  std::string out;
  format_into(tree, 0, out);
  return out;
}

void Discretizer::set(std::string variable, Thresholds thresholds) {
  if (!(thresholds.low < thresholds.high)) {
    throw Error(Errc::InvalidDataset, "thresholds for " + variable + " must satisfy low < high");
  }
  thresholds_.insert_or_assign(std::move(variable), thresholds);
}

bool Discretizer::has(std::string_view variable) const { return thresholds_.find(variable) != thresholds_.end(); }

std::string Discretizer::discretize(std::string_view variable, double reading) const {
  auto it = thresholds_.find(variable);
  if (it == thresholds_.end()) throw Error(Errc::UnknownVariable, std::string(variable));
  if (reading < it->second.low) return std::string(kLow);
  if (reading <= it->second.high) return std::string(kNormal);
  return std::string(kHigh);
}

double entropy(std::span<const AlarmType> labels) {
  if (labels.empty()) throw Error(Errc::EmptyDataset, "entropy of an empty label set");
  Counts counts{};
  for (AlarmType l : labels) ++counts[static_cast<std::size_t>(l.code())];
  return entropy_of(counts, labels.size());
}

double information_gain(const Dataset& dataset, std::string_view attribute) {
  const Attribute* attr = dataset.find(attribute);
  if (attr == nullptr) throw Error(Errc::UnknownAttribute, std::string(attribute));
  if (dataset.examples.empty()) throw Error(Errc::EmptyDataset, "information gain on an empty dataset");
  dataset.validate();
  std::vector<std::size_t> rows(dataset.examples.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return gain_on_rows(dataset, *attr, rows);
}

DecisionTree induce_tree(const Dataset& dataset) {
  if (dataset.examples.empty()) throw Error(Errc::EmptyDataset, "cannot induce a tree from no examples");
  dataset.validate();
  std::vector<const Attribute*> candidates;
  for (const auto& a : dataset.schema) candidates.push_back(&a);
  std::sort(candidates.begin(), candidates.end(), [](const Attribute* a, const Attribute* b) { return a->name < b->name; });
  std::vector<std::size_t> rows(dataset.examples.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return grow(dataset, rows, std::move(candidates));
}

std::vector<Rule> tree_to_rules(const DecisionTree& tree) {
  std::vector<Rule> out;
  std::vector<Fact> path;
  collect_rules(tree, path, out);
  return out;
}

AlarmType classify(const DecisionTree& tree, const Assignment& x) {
  const DecisionTree* at = &tree;
  while (!at->is_leaf()) {
    auto value = x.find(at->attribute());
    if (value == x.end()) throw Error(Errc::MissingAttribute, at->attribute());
    const auto& branches = at->branches();
    auto next = std::find_if(branches.begin(), branches.end(), [&](const auto& b) { return b.first == value->second; });
    if (next == branches.end()) {
      throw Error(Errc::MissingAttribute, "no branch for " + at->attribute() + " = " + value->second);
    }
    at = &next->second;
  }
  return at->label();
}

}  // namespace academy

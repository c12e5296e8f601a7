#pragma once

// Independent reference computations used by the tests. Nothing here calls the
// code under test except to build or read its data types.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "academy/miner.hpp"
#include "academy/sl.hpp"

namespace oracle {

using academy::AlarmType;
using academy::Assignment;
using academy::Attribute;
using academy::Dataset;
using academy::DecisionTree;
using academy::TrainingExample;

inline double entropy(const std::vector<int>& labels) {
  std::map<int, double> counts;
  for (int l : labels) counts[l] += 1.0;
  double n = static_cast<double>(labels.size());
  double h = 0.0;
  for (const auto& [_, c] : counts) h -= (c / n) * std::log2(c / n);
  return h;
}

inline std::vector<int> labels_of(const std::vector<TrainingExample>& xs) {
  std::vector<int> out;
  for (const auto& x : xs) out.push_back(x.label.code());
  return out;
}

inline double gain(const std::vector<TrainingExample>& xs, const std::string& attr) {
  std::map<std::string, std::vector<TrainingExample>> parts;
  for (const auto& x : xs) parts[x.attributes.at(attr)].push_back(x);
  double rest = 0.0;
  for (const auto& [_, p] : parts) {
    rest += static_cast<double>(p.size()) / static_cast<double>(xs.size()) * entropy(labels_of(p));
  }
  return entropy(labels_of(xs)) - rest;
}

inline AlarmType classify(const DecisionTree& t, const Assignment& x) {
  const DecisionTree* node = &t;
  while (!node->is_leaf()) {
    const std::string& v = x.at(node->attribute());
    const DecisionTree* next = nullptr;
    for (const auto& [cat, sub] : node->branches()) {
      if (cat == v) next = &sub;
    }
    if (next == nullptr) throw std::runtime_error("category not covered");
    node = next;
  }
  return node->label();
}

inline std::vector<Assignment> grid(const std::vector<Attribute>& schema) {
  std::vector<Assignment> out(1);
  for (const auto& a : schema) {
    std::vector<Assignment> next;
    for (const auto& p : out) {
      for (const auto& c : a.domain) {
        auto q = p;
        q[a.name] = c;
        next.push_back(q);
      }
    }
    out = next;
  }
  return out;
}

inline std::vector<Attribute> ternary_schema(int n) {
  static const char* names[] = {"a0", "a1", "a2", "a3", "a4"};
  std::vector<Attribute> out;
  for (int i = 0; i < n; ++i) out.push_back({names[i], {"low", "normal", "high"}});
  return out;
}

inline Dataset random_dataset(std::mt19937_64& rng, int max_attrs = 4, int max_examples = 81) {
  Dataset ds;
  ds.schema = ternary_schema(std::uniform_int_distribution<int>(1, max_attrs)(rng));
  int n = std::uniform_int_distribution<int>(1, max_examples)(rng);
  int classes = std::uniform_int_distribution<int>(1, 4)(rng);
  for (int i = 0; i < n; ++i) {
    TrainingExample ex;
    for (const auto& a : ds.schema) ex.attributes[a.name] = a.domain[rng() % a.domain.size()];
    ex.label = AlarmType(static_cast<int>(rng() % static_cast<unsigned>(classes)));
    ds.examples.push_back(ex);
  }
  return ds;
}

inline DecisionTree random_tree(std::mt19937_64& rng, std::vector<Attribute> available, int depth) {
  if (depth == 0 || available.empty() || rng() % 4 == 0) return DecisionTree::leaf(AlarmType(static_cast<int>(rng() % 4)));
  std::size_t pick = rng() % available.size();
  Attribute attr = available[pick];
  available.erase(available.begin() + static_cast<std::ptrdiff_t>(pick));
  std::vector<DecisionTree::Branch> branches;
  for (const auto& cat : attr.domain) branches.emplace_back(cat, random_tree(rng, available, depth - 1));
  return DecisionTree::node(attr.name, std::move(branches));
}

// Checks every internal node of `t` against a brute-force argmax over the
// attributes still unused on its path. Returns an empty string on success.
inline std::string check_splits(const DecisionTree& t, const std::vector<TrainingExample>& xs,
                                const std::vector<Attribute>& schema, std::set<std::string> used, double tol) {
  if (t.is_leaf() || xs.empty()) return {};
  double best = -1.0;
  std::vector<std::pair<std::string, double>> gains;
  for (const auto& a : schema) {
    if (used.count(a.name)) continue;
    double g = gain(xs, a.name);
    gains.emplace_back(a.name, g);
    best = std::max(best, g);
  }
  std::string expected;
  for (const auto& [name, g] : gains) {
    if (g >= best - tol && (expected.empty() || name < expected)) expected = name;
  }
  if (best <= tol) return "split with non-positive gain on " + t.attribute();
  if (expected != t.attribute()) return "split on " + t.attribute() + ", brute force picks " + expected;
  used.insert(t.attribute());
  for (const auto& [cat, sub] : t.branches()) {
    std::vector<TrainingExample> part;
    for (const auto& x : xs) {
      if (x.attributes.at(t.attribute()) == cat) part.push_back(x);
    }
    auto err = check_splits(sub, part, schema, used, tol);
    if (!err.empty()) return err;
  }
  return {};
}

// Random well-formed SL tree.
inline academy::sl::Node random_node(std::mt19937_64& rng, int depth) {
  using academy::sl::Node;
  static const std::string atom_chars = "abcXYZ019_-+*/<>=!?.:'#@$%&[]{};,\xc3\xa7";
  auto word = [&](const std::string& alphabet, int min_len) {
    std::string s;
    int len = min_len + static_cast<int>(rng() % 6);
    for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  int kind = depth == 0 ? static_cast<int>(rng() % 3) : static_cast<int>(rng() % 4);
  switch (kind) {
    case 0: {
      std::string s = word(atom_chars, 1);
      if (s.size() > 1 && s[0] == ':') s[0] = 'k';
      return Node::atom(s);
    }
    case 1: return Node::str(word("ab \"\\()\t\n:;x\xe2\x80\x9c", 0));
    case 2: return Node::keyword(word("abcXYZ-_?", 1));
    default: {
      Node list = Node::list();
      int n = static_cast<int>(rng() % 7);
      for (int i = 0; i < n; ++i) list.push(random_node(rng, depth - 1));
      return list;
    }
  }
}

}  // namespace oracle

#include "academy/frames.hpp"

#include <algorithm>
#include <string_view>

#include "academy/error.hpp"

namespace academy {

namespace {

using sl::Node;

bool is_plain_symbol(std::string_view s) {
  return !s.empty() && std::none_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  });
}

[[noreturn]] void malformed(const std::string& path, const std::string& why) {
  throw Error(Errc::MalformedFrame, path + ": " + why);
}

Node symbol_or_string(const std::string& text) {
  return sl::is_valid_atom(text) ? Node::atom(text) : Node::str(text);
}

// (head (inner (set item...)))
Node wrap_set(std::string_view head, std::string_view inner, std::vector<Node> items) {
  Node set = Node::list({Node::atom("set")});
  for (auto& item : items) set.push(std::move(item));
  return Node::list({Node::atom(std::string(head)), Node::list({Node::atom(std::string(inner)), std::move(set)})});
}

// Returns the items of (head (inner (set item...))), validating the wrapper.
const std::vector<Node>& unwrap_set(const Node& node, std::string_view head, std::string_view inner) {
  const std::string base(head);
  if (node.children().size() != 2) malformed(base, "expected exactly one argument");
  const Node& wrapper = node.children()[1];
  if (!wrapper.has_head(inner) || wrapper.children().size() != 2) {
    malformed(base + "/" + std::string(inner), "expected (" + std::string(inner) + " (set ...))");
  }
  const Node& set = wrapper.children()[1];
  if (!set.has_head("set")) malformed(base + "/" + std::string(inner) + "/set", "expected (set ...)");
  return set.children();
}

// Reads the :key pairs of an item list such as (agent :name a :type b). Every
// expected key must appear exactly once and no other children are allowed.
std::vector<const Node*> read_pairs(const Node& item, std::string_view head,
                                    const std::vector<std::string_view>& keys, const std::string& path) {
  if (!item.has_head(head)) malformed(path, "expected (" + std::string(head) + " ...)");
  const auto& kids = item.children();
  if ((kids.size() - 1) != keys.size() * 2) malformed(path, "wrong number of fields");
  std::vector<const Node*> values(keys.size(), nullptr);
  for (std::size_t i = 1; i + 1 < kids.size(); i += 2) {
    if (!kids[i].is_keyword()) malformed(path + "/" + std::to_string(i), "expected keyword");
    auto it = std::find(keys.begin(), keys.end(), kids[i].text());
    if (it == keys.end()) malformed(path + "/:" + kids[i].text(), "unexpected field");
    auto slot = static_cast<std::size_t>(it - keys.begin());
    if (values[slot]) malformed(path + "/:" + kids[i].text(), "duplicate field");
    values[slot] = &kids[i + 1];
  }
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (!values[k]) malformed(path + "/:" + std::string(keys[k]), "missing field");
  }
  return values;
}

std::string read_symbol(const Node* value, const std::string& path) {
  if (!value->is_atom()) malformed(path, "expected symbol");
  return value->text();
}

std::string read_text(const Node* value, const std::string& path) {
  if (!value->is_atom() && !value->is_str()) malformed(path, "expected symbol or string");
  // A symbol in typographic quotes is read as the quoted term.
  constexpr std::string_view open = "\xe2\x80\x9c", close = "\xe2\x80\x9d";
  const std::string& t = value->text();
  if (value->is_atom() && t.size() > open.size() + close.size() && t.starts_with(open) && t.ends_with(close)) {
    return t.substr(open.size(), t.size() - open.size() - close.size());
  }
  return t;
}

void check_rule_source(const std::string& rule, const std::string& path) {
  if (rule.rfind("(defrule", 0) != 0) malformed(path, "rule text must begin with \"(defrule\"");
}

struct Encoder {
  Node operator()(const AgentsToBeTrained& f) const {
    std::vector<Node> items;
    for (std::size_t i = 0; i < f.agents.size(); ++i) {
      const auto& a = f.agents[i];
      if (!is_plain_symbol(a.name) || !is_plain_symbol(a.agent_type) || !sl::is_valid_atom(a.name) ||
          !sl::is_valid_atom(a.agent_type)) {
        malformed("agentsToBeTrained/agents/set/" + std::to_string(i), "agent name and type must be symbols");
      }
      items.push_back(Node::list({Node::atom("agent"), Node::keyword("name"), Node::atom(a.name),
                                  Node::keyword("type"), Node::atom(a.agent_type)}));
    }
    return wrap_set("agentsToBeTrained", "agents", std::move(items));
  }

  Node operator()(const LoadClass& f) const {
    std::vector<Node> items;
    for (std::size_t i = 0; i < f.behaviors.size(); ++i) {
      if (!sl::is_valid_atom(f.behaviors[i])) {
        malformed("loadClass/behaviors/set/" + std::to_string(i), "class name must be a symbol");
      }
      items.push_back(Node::list({Node::atom("behavior"), Node::keyword("classname"), Node::atom(f.behaviors[i])}));
    }
    return wrap_set("loadClass", "behaviors", std::move(items));
  }

  Node operator()(const AddRule& f) const {
    std::vector<Node> items;
    for (std::size_t i = 0; i < f.rules.size(); ++i) {
      check_rule_source(f.rules[i], "addRule/jessRules/set/" + std::to_string(i));
      items.push_back(Node::list({Node::atom("jessRule"), Node::keyword("rule"), Node::str(f.rules[i])}));
    }
    return wrap_set("addRule", "jessRules", std::move(items));
  }

  Node operator()(const OntologyQuery& f) const {
    if (!sl::is_valid_atom(f.message_ontology) || !sl::is_valid_atom(f.my_ontology)) {
      malformed("ontologyQuery/map", "ontology names must be symbols");
    }
    if (f.term.empty()) malformed("ontologyQuery/map/:term", "empty term");
    return Node::list({Node::atom("ontologyQuery"),
                       Node::list({Node::atom("map"), Node::keyword("MessageOntology"), Node::atom(f.message_ontology),
                                   Node::keyword("MyOntology"), Node::atom(f.my_ontology), Node::keyword("term"),
                                   symbol_or_string(f.term)})});
  }

  Node operator()(const TermMapping& f) const {
    if (f.from_term.empty() || f.to_term.empty()) malformed("Mapping", "empty term");
    return Node::list({Node::atom("Mapping"), Node::list({Node::atom("From"), Node::keyword("term"), Node::str(f.from_term)}),
                       Node::list({Node::atom("To"), Node::keyword("term"), Node::str(f.to_term)})});
  }
};

AgentsToBeTrained decode_agents(const Node& node) {
  AgentsToBeTrained out;
  const auto& items = unwrap_set(node, "agentsToBeTrained", "agents");
  for (std::size_t i = 1; i < items.size(); ++i) {
    std::string path = "agentsToBeTrained/agents/set/" + std::to_string(i - 1);
    auto v = read_pairs(items[i], "agent", {"name", "type"}, path);
    out.agents.push_back({read_symbol(v[0], path + "/:name"), read_symbol(v[1], path + "/:type")});
  }
  return out;
}

LoadClass decode_load_class(const Node& node) {
  LoadClass out;
  const auto& items = unwrap_set(node, "loadClass", "behaviors");
  for (std::size_t i = 1; i < items.size(); ++i) {
    std::string path = "loadClass/behaviors/set/" + std::to_string(i - 1);
    auto v = read_pairs(items[i], "behavior", {"classname"}, path);
    out.behaviors.push_back(read_symbol(v[0], path + "/:classname"));
  }
  return out;
}

AddRule decode_add_rule(const Node& node) {
  AddRule out;
  const auto& items = unwrap_set(node, "addRule", "jessRules");
  for (std::size_t i = 1; i < items.size(); ++i) {
    std::string path = "addRule/jessRules/set/" + std::to_string(i - 1);
    auto v = read_pairs(items[i], "jessRule", {"rule"}, path);
    if (!v[0]->is_str()) malformed(path + "/:rule", "expected quoted rule text");
    check_rule_source(v[0]->text(), path + "/:rule");
    out.rules.push_back(v[0]->text());
  }
  return out;
}

OntologyQuery decode_query(const Node& node) {
  if (node.children().size() != 2) malformed("ontologyQuery", "expected exactly one argument");
  auto v = read_pairs(node.children()[1], "map", {"MessageOntology", "MyOntology", "term"}, "ontologyQuery/map");
  return {read_symbol(v[0], "ontologyQuery/map/:MessageOntology"), read_symbol(v[1], "ontologyQuery/map/:MyOntology"),
          read_text(v[2], "ontologyQuery/map/:term")};
}

TermMapping decode_mapping(const Node& node) {
  if (node.children().size() != 3) malformed("Mapping", "expected (From ...) and (To ...)");
  auto from = read_pairs(node.children()[1], "From", {"term"}, "Mapping/From");
  auto to = read_pairs(node.children()[2], "To", {"term"}, "Mapping/To");
  return {read_text(from[0], "Mapping/From/:term"), read_text(to[0], "Mapping/To/:term")};
}

}  // namespace

sl::Node encode_frame(const Frame& frame) { return std::visit(Encoder{}, frame); }

Frame decode_frame(const sl::Node& node) {
  if (!node.is_list() || node.children().empty() || !node.children().front().is_atom()) {
    throw Error(Errc::UnknownFrame, "frame must be a list headed by a symbol");
  }
  const std::string& head = node.children().front().text();
  if (head == "agentsToBeTrained") return decode_agents(node);
  if (head == "loadClass") return decode_load_class(node);
  if (head == "addRule") return decode_add_rule(node);
  if (head == "ontologyQuery") return decode_query(node);
  if (head == "Mapping") return decode_mapping(node);
  throw Error(Errc::UnknownFrame, head);
}

}  // namespace academy

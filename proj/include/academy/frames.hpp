#pragma once

// Typed views of the training-protocol and ontology messages. Each frame has
// exactly one SL shape; encode_frame/decode_frame convert between the two.

#include <string>
#include <variant>
#include <vector>

#include "academy/sl.hpp"

namespace academy {

struct AgentDescriptor {
  std::string name;
  std::string agent_type;
  friend bool operator==(const AgentDescriptor&, const AgentDescriptor&) = default;
};

/// (agentsToBeTrained (agents (set (agent :name N :type T) ...)))
struct AgentsToBeTrained {
  std::vector<AgentDescriptor> agents;
  friend bool operator==(const AgentsToBeTrained&, const AgentsToBeTrained&) = default;
};

/// (loadClass (behaviors (set (behavior :classname C) ...)))
struct LoadClass {
  std::vector<std::string> behaviors;
  friend bool operator==(const LoadClass&, const LoadClass&) = default;
};

/// (addRule (jessRules (set (jessRule :rule "(defrule ...)") ...)))
///
/// Rule sources are opaque here; rule_engine parses them.
struct AddRule {
  std::vector<std::string> rules;
  friend bool operator==(const AddRule&, const AddRule&) = default;
};

/// (ontologyQuery (map :MessageOntology A :MyOntology B :term t))
struct OntologyQuery {
  std::string message_ontology;
  std::string my_ontology;
  std::string term;
  friend bool operator==(const OntologyQuery&, const OntologyQuery&) = default;
};

/// (Mapping (From :term "a") (To :term "b"))
struct TermMapping {
  std::string from_term;
  std::string to_term;
  friend bool operator==(const TermMapping&, const TermMapping&) = default;
};

using Frame = std::variant<AgentsToBeTrained, LoadClass, AddRule, OntologyQuery, TermMapping>;

// Throws MalformedFrame when a field breaks the frame's invariants.
sl::Node encode_frame(const Frame& frame);

// Throws UnknownFrame for an unrecognized head atom and MalformedFrame with a
// '/'-separated path to the offending child otherwise.
Frame decode_frame(const sl::Node& node);

}  // namespace academy

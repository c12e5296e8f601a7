#pragma once

// Named ontologies and bijective term maps between them.

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "academy/frames.hpp"
#include "academy/rules.hpp"

namespace academy {

struct Ontology {
  std::string name;
  std::set<std::string> terms;
};

struct TermMap {
  std::string from_ontology;
  std::string to_ontology;
  std::vector<std::pair<std::string, std::string>> pairs;
};

class OntologyService {
 public:
  // Throws DuplicateOntology, InvalidOntology (empty name or term set).
  void register_ontology(Ontology ontology);
  // Registers the map and its inverse. Throws UnknownOntology, or
  // InvalidOntology when the pairs are not a bijection over known terms.
  void register_map(const TermMap& map);
  // Registers an identity map over the terms both ontologies share.
  void register_identity(std::string_view a, std::string_view b);

  bool has(std::string_view name) const;
  const Ontology& lookup(std::string_view name) const;
  std::vector<std::string> names() const;

  // Answers an ontologyQuery with the term's translation from
  // message_ontology into my_ontology. Throws UnknownOntology,
  // NoMapRegistered, UnmappedTerm.
  TermMapping map_term(const OntologyQuery& query) const;

  // Translates each fact's attribute; values pass through. All or nothing.
  std::vector<Fact> translate_facts(const std::vector<Fact>& facts, std::string_view from, std::string_view to) const;

 private:
  const std::map<std::string, std::string, std::less<>>& map_between(std::string_view from, std::string_view to) const;

  std::map<std::string, Ontology, std::less<>> ontologies_;
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::string, std::less<>>> maps_;
};

}  // namespace academy

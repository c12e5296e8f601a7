#include "academy/ontology.hpp"

#include "academy/error.hpp"

namespace academy {

void OntologyService::register_ontology(Ontology ontology) {
  if (ontology.name.empty() || ontology.terms.empty()) {
    throw Error(Errc::InvalidOntology, "ontology needs a name and at least one term");
  }
  if (ontologies_.count(ontology.name) != 0) throw Error(Errc::DuplicateOntology, ontology.name);
  std::string name = ontology.name;
  ontologies_.emplace(std::move(name), std::move(ontology));
}

void OntologyService::register_map(const TermMap& map) {
  const Ontology& from = lookup(map.from_ontology);
  const Ontology& to = lookup(map.to_ontology);
  std::map<std::string, std::string, std::less<>> forward;
  std::map<std::string, std::string, std::less<>> backward;
  for (const auto& [a, b] : map.pairs) {
    if (from.terms.count(a) == 0) throw Error(Errc::InvalidOntology, "'" + a + "' is not a term of " + from.name);
    if (to.terms.count(b) == 0) throw Error(Errc::InvalidOntology, "'" + b + "' is not a term of " + to.name);
    if (!forward.emplace(a, b).second || !backward.emplace(b, a).second) {
      throw Error(Errc::InvalidOntology, "map " + from.name + " -> " + to.name + " is not a bijection at '" + a + "'");
    }
  }
  maps_[{from.name, to.name}] = std::move(forward);
  maps_[{to.name, from.name}] = std::move(backward);
}

void OntologyService::register_identity(std::string_view a, std::string_view b) {
  const Ontology& left = lookup(a);
  const Ontology& right = lookup(b);
  TermMap map{left.name, right.name, {}};
  for (const auto& t : left.terms) {
    if (right.terms.count(t) != 0) map.pairs.emplace_back(t, t);
  }
  register_map(map);
}

bool OntologyService::has(std::string_view name) const { return ontologies_.find(name) != ontologies_.end(); }

const Ontology& OntologyService::lookup(std::string_view name) const {
  auto it = ontologies_.find(name);
  if (it == ontologies_.end()) throw Error(Errc::UnknownOntology, std::string(name));
  return it->second;
}

std::vector<std::string> OntologyService::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : ontologies_) out.push_back(name);
  return out;
}

const std::map<std::string, std::string, std::less<>>& OntologyService::map_between(std::string_view from,
                                                                                     std::string_view to) const {
  lookup(from);
  lookup(to);
  auto it = maps_.find({std::string(from), std::string(to)});
  if (it == maps_.end()) throw Error(Errc::NoMapRegistered, std::string(from) + " -> " + std::string(to));
  return it->second;
}

TermMapping OntologyService::map_term(const OntologyQuery& query) const {
  const auto& map = map_between(query.message_ontology, query.my_ontology);
  auto it = map.find(query.term);
  if (it == map.end()) throw Error(Errc::UnmappedTerm, query.term);
  return {query.term, it->second};
}

std::vector<Fact> OntologyService::translate_facts(const std::vector<Fact>& facts, std::string_view from,
                                                   std::string_view to) const {
  const auto& map = map_between(from, to);
  std::vector<Fact> out;
  out.reserve(facts.size());
  for (const auto& f : facts) {
    auto it = map.find(f.attribute);
    if (it == map.end()) throw Error(Errc::UnmappedTerm, f.attribute);
    out.push_back({it->second, f.value});
  }
  return out;
}

}  // namespace academy

#pragma once

// S-expression content language shared by every inter-agent message and by the
// repository log. A subset of FIPA-SL: atoms, quoted strings, ':'-keywords and
// parenthesized lists.

#include <string>
#include <string_view>
#include <vector>

namespace academy::sl {

enum class Kind { Atom, Str, Keyword, List };

class Node {
 public:
  // Factories validate the per-kind invariants and throw MalformedFrame on
  // violation (an atom with whitespace cannot be printed back unchanged).
  static Node atom(std::string text);
  static Node str(std::string text);
  static Node keyword(std::string name);
  static Node list(std::vector<Node> children = {});

  Kind kind() const noexcept { return kind_; }
  bool is_atom() const noexcept { return kind_ == Kind::Atom; }
  bool is_str() const noexcept { return kind_ == Kind::Str; }
  bool is_keyword() const noexcept { return kind_ == Kind::Keyword; }
  bool is_list() const noexcept { return kind_ == Kind::List; }

  // True for an atom spelled exactly `text`.
  bool is_atom(std::string_view text) const noexcept { return is_atom() && text_ == text; }
  // True for a list whose first child is the atom `head`.
  bool has_head(std::string_view head) const noexcept;

  // Atom symbol, string content, or keyword name (without ':'). Empty for lists.
  const std::string& text() const noexcept { return text_; }
  const std::vector<Node>& children() const noexcept { return children_; }

  Node& push(Node child);

  friend bool operator==(const Node&, const Node&) = default;

 private:
  Node(Kind kind, std::string text) : kind_(kind), text_(std::move(text)) {}

  Kind kind_ = Kind::List;
  std::string text_;
  std::vector<Node> children_;
};

bool is_valid_atom(std::string_view text) noexcept;

// Parses exactly one s-expression. Leading and trailing whitespace is allowed.
// Throws ParseError (EmptyInput, UnbalancedParens, UnterminatedString,
// TrailingGarbage) carrying the byte offset.
Node parse(std::string_view text);

// Canonical form: single spaces between siblings, no newlines, keywords with a
// leading ':', Str always quoted with '"' and '\' escaped.
std::string print(const Node& node);

// Collapses whitespace runs outside string literals to single spaces and trims
// the ends. Two texts are "equal up to whitespace" when this maps them to the
// same bytes.
std::string canonicalize_whitespace(std::string_view text);

// Looks up `:key value` pairs in a list, starting at child index `from`.
// Returns nullptr when the key is absent.
const Node* keyword_value(const Node& list, std::string_view key, std::size_t from = 1);

}  // namespace academy::sl

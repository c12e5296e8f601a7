#include "academy/sl.hpp"

#include "academy/error.hpp"

namespace academy::sl {

namespace {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_delimiter(char c) noexcept { return is_space(c) || c == '(' || c == ')' || c == '"'; }

bool has_no_delimiters(std::string_view text) noexcept {
  for (char c : text) {
    if (is_delimiter(c)) return false;
  }
  return true;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Node parse_document() {
    skip_space();
    if (pos_ == text_.size()) throw ParseError(Errc::EmptyInput, pos_, "no expression");
    Node root = parse_node();
    skip_space();
    if (pos_ != text_.size()) {
      if (text_[pos_] == ')') throw ParseError(Errc::UnbalancedParens, pos_, "unmatched ')'");
      throw ParseError(Errc::TrailingGarbage, pos_, "content after expression");
    }
    return root;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  Node parse_node() {
    // Iterative over list nesting so deep input cannot exhaust the stack.
    std::vector<Node> stack;
    while (true) {
      skip_space();
      if (pos_ == text_.size()) {
        throw ParseError(Errc::UnbalancedParens, pos_, "missing ')'");
      }
      char c = text_[pos_];
      if (c == '(') {
        ++pos_;
        stack.push_back(Node::list());
        continue;
      }
      Node done = Node::list();
      if (c == ')') {
        if (stack.empty()) throw ParseError(Errc::UnbalancedParens, pos_, "unmatched ')'");
        ++pos_;
        done = std::move(stack.back());
        stack.pop_back();
      } else if (c == '"') {
        done = parse_string();
      } else {
        done = parse_symbol();
      }
      if (stack.empty()) return done;
      stack.back().push(std::move(done));
    }
  }

  Node parse_string() {
    std::size_t open = pos_++;
    std::string out;
    while (pos_ < text_.size()) {
      char c = text_[pos_++];
      if (c == '"') return Node::str(std::move(out));
      if (c == '\\') {
        if (pos_ == text_.size()) break;
        c = text_[pos_++];
      }
      out.push_back(c);
    }
    throw ParseError(Errc::UnterminatedString, open, "string never closed");
  }

  Node parse_symbol() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && !is_delimiter(text_[pos_])) ++pos_;
    std::string_view token = text_.substr(start, pos_ - start);
    if (token.size() > 1 && token.front() == ':') return Node::keyword(std::string(token.substr(1)));
    return Node::atom(std::string(token));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print_into(const Node& node, std::string& out) {
  switch (node.kind()) {
    case Kind::Atom:
      out += node.text();
      return;
    case Kind::Keyword:
      out += ':';
      out += node.text();
      return;
    case Kind::Str:
      out += '"';
      for (char c : node.text()) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      out += '"';
      return;
    case Kind::List: {
      out += '(';
      bool first = true;
      for (const Node& child : node.children()) {
        if (!first) out += ' ';
        first = false;
        print_into(child, out);
      }
      out += ')';
      return;
    }
  }
}

}  // namespace

bool is_valid_atom(std::string_view text) noexcept {
  if (text.empty() || !has_no_delimiters(text)) return false;
  // ":x" would read back as a keyword.
  return !(text.size() > 1 && text.front() == ':');
}

Node Node::atom(std::string text) {
  if (!is_valid_atom(text)) throw Error(Errc::MalformedFrame, "invalid atom '" + text + "'");
  return Node(Kind::Atom, std::move(text));
}

Node Node::str(std::string text) { return Node(Kind::Str, std::move(text)); }

Node Node::keyword(std::string name) {
  if (name.empty() || !has_no_delimiters(name)) {
    throw Error(Errc::MalformedFrame, "invalid keyword ':" + name + "'");
  }
  return Node(Kind::Keyword, std::move(name));
}

Node Node::list(std::vector<Node> children) {
  Node n(Kind::List, {});
  n.children_ = std::move(children);
  return n;
}

bool Node::has_head(std::string_view head) const noexcept {
  return is_list() && !children_.empty() && children_.front().is_atom(head);
}

Node& Node::push(Node child) {
  children_.push_back(std::move(child));
  return *this;
}

Node parse(std::string_view text) { return Parser(text).parse_document(); }

std::string print(const Node& node) {
  std::string out;
  print_into(node, out);
  return out;
}

std::string canonicalize_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      out += c;
      if (c == '\\' && i + 1 < text.size()) {
        out += text[++i];
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty() && out.back() != '(' && c != ')') out += ' ';
    pending_space = false;
    out += c;
    if (c == '"') in_string = true;
  }
  return out;
}

const Node* keyword_value(const Node& list, std::string_view key, std::size_t from) {
  const auto& kids = list.children();
  for (std::size_t i = from; i + 1 < kids.size(); ++i) {
    if (kids[i].is_keyword() && kids[i].text() == key) return &kids[i + 1];
  }
  return nullptr;
}

}  // namespace academy::sl

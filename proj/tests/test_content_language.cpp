#include <doctest.h>

#include <random>

#include "academy/error.hpp"
#include "academy/frames.hpp"
#include "academy/sl.hpp"
#include "oracles.hpp"
#include "reference_texts.hpp"

using namespace academy;
using sl::Node;

namespace {

Errc parse_error_code(std::string_view text, std::size_t* offset = nullptr) {
  try {
    sl::parse(text);
  } catch (const ParseError& e) {
    if (offset != nullptr) *offset = e.offset();
    return e.code();
  }
  FAIL("expected a parse error for " << text);
  return Errc::EmptyInput;
}

AgentsToBeTrained random_agents(std::mt19937_64& rng) {
  AgentsToBeTrained f;
  int n = static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) f.agents.push_back({"agent" + std::to_string(rng() % 100), "type" + std::to_string(rng() % 5)});
  return f;
}

Frame random_frame(std::mt19937_64& rng) {
  switch (rng() % 5) {
    case 0: return random_agents(rng);
    case 1: {
      LoadClass f;
      for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) f.behaviors.push_back("Class" + std::to_string(rng() % 9));
      return f;
    }
    case 2: {
      AddRule f;
      for (int i = 0, n = static_cast<int>(rng() % 4); i < n; ++i) {
        f.rules.push_back("(defrule r" + std::to_string(i) + " (and (a \"q\\\" x\")) => (store K " + std::to_string(rng() % 4) + "))");
      }
      return f;
    }
    case 3: {
      static const char* terms[] = {"pressure", "alarm type", "ozone", "NO2NO3", "with \"quote\""};
      return OntologyQuery{"O" + std::to_string(rng() % 3), "P" + std::to_string(rng() % 3), terms[rng() % 5]};
    }
    default: {
      static const char* terms[] = {"pressure", "basinc", "alarm tipi", "x(y)"};
      return TermMapping{terms[rng() % 4], terms[rng() % 4]};
    }
  }
}

}  // namespace

TEST_SUITE("content_language") {
  TEST_CASE("parse: Mapping message with straight quotes") {
    Node n = sl::parse(ref::kMappingAscii);
    Node expected = Node::list({Node::atom("Mapping"),
                                Node::list({Node::atom("From"), Node::keyword("term"), Node::str("pressure")}),
                                Node::list({Node::atom("To"), Node::keyword("term"), Node::str("basinc")})});
    CHECK(n == expected);
  }

  TEST_CASE("parse: single atom, keyword, string") {
    CHECK(sl::parse("x") == Node::atom("x"));
    CHECK(sl::parse("  x \n") == Node::atom("x"));
    CHECK(sl::parse(":term") == Node::keyword("term"));
    CHECK(sl::parse(":") == Node::atom(":"));
    CHECK(sl::parse(R"("a \"b\" \\ c")") == Node::str(R"(a "b" \ c)"));
    CHECK(sl::parse("()") == Node::list());
  }

  TEST_CASE("parse errors carry their kind and byte offset") {
    std::size_t offset = 0;
    CHECK(parse_error_code("(a (b c", &offset) == Errc::UnbalancedParens);
    CHECK(offset == 8);
    CHECK(parse_error_code("", &offset) == Errc::EmptyInput);
    CHECK(parse_error_code("   \n", &offset) == Errc::EmptyInput);
    CHECK(parse_error_code("(a))", &offset) == Errc::UnbalancedParens);
    CHECK(offset == 4);
    CHECK(parse_error_code("a b", &offset) == Errc::TrailingGarbage);
    CHECK(offset == 3);
    CHECK(parse_error_code(")", &offset) == Errc::UnbalancedParens);
    CHECK(offset == 1);
    CHECK(parse_error_code("(a \"bc", &offset) == Errc::UnterminatedString);
    CHECK(offset == 4);
  }

  TEST_CASE("print: canonical spacing and quoting") {
    CHECK(sl::print(Node::list({Node::atom("a"), Node::str("b c")})) == "(a \"b c\")");
    CHECK(sl::print(sl::parse("(  a\n\t(b   c)   :k \"x\"  )")) == "(a (b c) :k \"x\")");
    CHECK(sl::print(Node::str("say \"hi\" \\")) == R"("say \"hi\" \\")");
    CHECK(sl::print(Node::list()) == "()");
  }

  TEST_CASE("factories reject atoms that would not read back") {
    CHECK_THROWS_AS(Node::atom(""), Error);
    CHECK_THROWS_AS(Node::atom("a b"), Error);
    CHECK_THROWS_AS(Node::atom("a(b"), Error);
    CHECK_THROWS_AS(Node::atom("a\"b"), Error);
    CHECK_THROWS_AS(Node::atom(":kw"), Error);
    CHECK_THROWS_AS(Node::keyword(""), Error);
    CHECK(Node::str("").text().empty());
  }

  TEST_CASE("round trip: random nodes, depth <= 8, fanout <= 6") {
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 2000; ++i) {
      Node n = oracle::random_node(rng, static_cast<int>(rng() % 9));
      std::string printed = sl::print(n);
      INFO(printed);
      REQUIRE(sl::parse(printed) == n);
      CHECK(sl::print(sl::parse(printed)) == printed);
    }
  }

  TEST_CASE("reference texts reprint unchanged") {
    for (auto text : ref::kAll) {
      INFO(text);
      CHECK(sl::print(sl::parse(text)) == sl::canonicalize_whitespace(text));
    }
    std::string spaced = "(loadClass\n  (behaviors (set\n    (behavior :classname Class1)\n    (behavior :classname Class2))))";
    CHECK(sl::print(sl::parse(spaced)) == ref::kLoadClass);
    CHECK(sl::canonicalize_whitespace(spaced) == ref::kLoadClass);
    CHECK(sl::canonicalize_whitespace("(a \"x   y\"  )") == "(a \"x   y\")");
  }

  TEST_CASE("encode_frame reproduces the reference messages") {
    CHECK(sl::print(encode_frame(AgentsToBeTrained{{{"agent1", "locationAgent"}}})) == ref::kAgentsToBeTrained);
    CHECK(sl::print(encode_frame(LoadClass{{"Class1", "Class2"}})) == ref::kLoadClass);
    CHECK(sl::print(encode_frame(AddRule{{std::string(ref::kRule6), std::string(ref::kRule5)}})) == ref::kAddRuleAscii);
    CHECK(sl::print(encode_frame(OntologyQuery{"O3RTAAEnglish", "O3RTAATurkish", "pressure"})) == ref::kOntologyQuery);
    CHECK(sl::print(encode_frame(TermMapping{"pressure", "basinc"})) == ref::kMappingAscii);
    CHECK(sl::print(encode_frame(AgentsToBeTrained{})) == "(agentsToBeTrained (agents (set)))");
    CHECK(sl::print(encode_frame(AddRule{{std::string(ref::kRule6)}})) ==
          "(addRule (jessRules (set (jessRule :rule \"(defrule rule_6 (and (ozone normal)) => (store ALARM_TYPE 3))\"))))");
  }

  TEST_CASE("decode_frame inverts encode_frame on all five reference texts") {
    for (auto text : ref::kAll) {
      INFO(text);
      Frame f = decode_frame(sl::parse(text));
      CHECK(decode_frame(encode_frame(f)) == f);
    }
    auto t3 = std::get<AddRule>(decode_frame(sl::parse(ref::kAddRule)));
    REQUIRE(t3.rules.size() == 2);
    CHECK(t3.rules[1] == "(defrule rule_5 (and (NO₂NO₃ normal)) => (store ALARM_TYPE 2))");
    CHECK(std::get<AgentsToBeTrained>(decode_frame(sl::parse(ref::kAgentsToBeTrained))).agents ==
          std::vector<AgentDescriptor>{{"agent1", "locationAgent"}});
    CHECK(std::get<OntologyQuery>(decode_frame(sl::parse(ref::kOntologyQuery))).term == "pressure");
    CHECK(std::get<TermMapping>(decode_frame(sl::parse(ref::kMapping))) == TermMapping{"pressure", "basinc"});
    CHECK(std::get<TermMapping>(decode_frame(sl::parse("(Mapping (From :term “) (To :term b))"))).from_term == "“");
  }

  TEST_CASE("decode_frame: errors") {
    try {
      decode_frame(sl::parse("(bogus (x))"));
      FAIL("expected UnknownFrame");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::UnknownFrame);
    }
    // agentsToBeTrained with the :type pair deleted.
    std::string text(ref::kAgentsToBeTrained);
    auto at = text.find(" :type locationAgent");
    text.erase(at, std::string(" :type locationAgent").size());
    try {
      decode_frame(sl::parse(text));
      FAIL("expected MalformedFrame");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MalformedFrame);
      CHECK(std::string(e.what()).find("agentsToBeTrained/agents/set/0") != std::string::npos);
    }
    CHECK_THROWS_AS(decode_frame(sl::parse("(addRule (jessRules (set (jessRule :rule \"(foo)\"))))")), Error);
    CHECK_THROWS_AS(decode_frame(sl::parse("(loadClass (behaviors (list)))")), Error);
    CHECK_THROWS_AS(decode_frame(sl::parse("x")), Error);
  }

  TEST_CASE("frame totality: 1000 random frames decode after encoding") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 1000; ++i) {
      Frame f = random_frame(rng);
      Node n = encode_frame(f);
      REQUIRE(decode_frame(n) == f);
      REQUIRE(decode_frame(sl::parse(sl::print(n))) == f);
    }
  }

  TEST_CASE("keyword_value") {
    Node n = sl::parse("(obs :id 3 :tick 4)");
    REQUIRE(sl::keyword_value(n, "tick") != nullptr);
    CHECK(sl::keyword_value(n, "tick")->text() == "4");
    CHECK(sl::keyword_value(n, "missing") == nullptr);
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "academy.h"
#include "temp_dir.hpp"

namespace {

std::string take(char* s) {
  std::string out = s != nullptr ? s : "";
  aa_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status names and errors") {
  CHECK(std::string(aa_status_name(AA_OK)) == "OK");
  CHECK(std::string(aa_status_name(AA_E_UNMAPPED_TERM)) == "UnmappedTerm");
  CHECK(std::string(aa_status_name(AA_E_TRANSCRIPT_MISMATCH)) == "TranscriptMismatch");
  char* out = nullptr;
  CHECK(aa_sl_canonicalize("(a (b", &out) == AA_E_UNBALANCED_PARENS);
  CHECK(out == nullptr);
  CHECK(std::string(aa_last_error()).find("UnbalancedParens") != std::string::npos);
  CHECK(aa_sl_canonicalize(nullptr, &out) == AA_E_INVALID_ARGUMENT);
}

TEST_CASE("canonicalize") {
  char* out = nullptr;
  REQUIRE(aa_sl_canonicalize("  (loadClass\n (behaviors   (set)))", &out) == AA_OK);
  CHECK(take(out) == "(loadClass (behaviors (set)))");
}

TEST_CASE("rulebase") {
  aa_rulebase* rb = nullptr;
  REQUIRE(aa_rulebase_create(&rb) == AA_OK);
  CHECK(aa_rulebase_add(rb, "(defrule rule_6 (and (ozone normal)) => (store ALARM_TYPE 3))") == AA_OK);
  CHECK(aa_rulebase_add(rb, "(defrule rule_5 (and (NO2NO3 normal)) => (store ALARM_TYPE 2))") == AA_OK);
  CHECK(aa_rulebase_add(rb, "(defrule bad (a x) (store K v))") == AA_E_MISSING_ARROW);
  CHECK(aa_rulebase_add(rb, "(defrule rule_5 (b x) => (store K v))") == AA_E_DUPLICATE_RULE_NAME);
  CHECK(aa_rulebase_size(rb) == 2);
  char* store = nullptr;
  REQUIRE(aa_rulebase_run(rb, "((ozone normal))", &store) == AA_OK);
  CHECK(take(store) == "((ALARM_TYPE 3))");
  REQUIRE(aa_rulebase_run(rb, "((NO2NO3 normal))", &store) == AA_OK);
  CHECK(take(store) == "((ALARM_TYPE 2))");
  REQUIRE(aa_rulebase_run(rb, "()", &store) == AA_OK);
  CHECK(take(store) == "()");
  CHECK(aa_rulebase_run(rb, "(ozone normal)", &store) == AA_E_MALFORMED_FRAME);
  aa_rulebase_free(rb);
}

TEST_CASE("config, simulation, replay and repository") {
  aa_config* cfg = nullptr;
  CHECK(aa_config_parse("[nonsense]\n", &cfg) == AA_E_CONFIG_ERROR);
  CHECK(aa_config_load("/nonexistent/academy.ini", &cfg) == AA_E_CONFIG_ERROR);
  REQUIRE(aa_config_default(&cfg) == AA_OK);
  CHECK(aa_config_set_ticks(cfg, 40) == AA_OK);
  CHECK(aa_config_set_ticks(cfg, -1) == AA_E_INVALID_ARGUMENT);
  CHECK(aa_config_set_seed(cfg, 3) == AA_OK);

  TempDir dir;
  std::string transcript = (dir.path / "run.transcript").string();
  aa_result* res = nullptr;
  REQUIRE(aa_simulation_run(cfg, transcript.c_str(), &res) == AA_OK);
  std::string report = aa_result_report(res);
  CHECK(report.rfind("seed 3 ticks 40", 0) == 0);
  CHECK(aa_result_observations(res) > 0);
  aa_result_free(res);

  CHECK(aa_replay_transcript(transcript.c_str()) == AA_OK);
  std::string text;
  {
    std::ifstream in(transcript);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  text.replace(text.find("clock"), 5, "cl0ck");
  std::string bad = (dir.path / "bad.transcript").string();
  std::ofstream(bad) << text;
  CHECK(aa_replay_transcript(bad.c_str()) == AA_E_TRANSCRIPT_MISMATCH);
  CHECK(std::string(aa_last_error()).find("line ") != std::string::npos);
  CHECK(aa_replay_transcript((dir.path / "missing").string().c_str()) == AA_E_IO);
  aa_config_free(cfg);

  aa_repository* repo = nullptr;
  CHECK(aa_repository_open((dir.path / "missing.log").string().c_str(), &repo) != AA_OK);
}

#include "academy.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "academy/config.hpp"
#include "academy/error.hpp"
#include "academy/miner.hpp"
#include "academy/o3rtaa.hpp"
#include "academy/repository.hpp"
#include "academy/rules.hpp"
#include "academy/sl.hpp"

struct aa_config {
  academy::ScenarioConfig value;
};

struct aa_result {
  std::string report;
  std::uint64_t observations = 0;
};

struct aa_repository {
  std::unique_ptr<academy::Repository> value;
};

struct aa_rulebase {
  academy::RuleBase value;
};

static_assert(static_cast<int>(academy::Errc::EmptyInput) + 1 == AA_E_EMPTY_INPUT);
static_assert(static_cast<int>(academy::Errc::StorageFailure) + 1 == AA_E_STORAGE_FAILURE);
static_assert(static_cast<int>(academy::Errc::TranscriptMismatch) + 1 == AA_E_TRANSCRIPT_MISMATCH);

namespace {

thread_local std::string last_error;

aa_status fail(aa_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename F>
aa_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const academy::Error& e) {
    return fail(static_cast<aa_status>(static_cast<int>(e.code()) + 1), e.what());
  } catch (const std::bad_alloc&) {
    return fail(AA_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(AA_E_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* aa_status_name(aa_status status) {
  switch (status) {
    case AA_OK: return "OK";
    case AA_E_INVALID_ARGUMENT: return "InvalidArgument";
    case AA_E_IO: return "IO";
    case AA_E_INTERNAL: return "Internal";
    default: break;
  }
  int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(academy::Errc::TranscriptMismatch)) return "Unknown";
  return academy::errc_name(static_cast<academy::Errc>(code)).data();
}

const char* aa_last_error(void) { return last_error.c_str(); }

void aa_string_free(char* text) { std::free(text); }

aa_status aa_config_load(const char* path, aa_config** out) {
  if (path == nullptr || out == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new aa_config{academy::load_config(path)};
    return AA_OK;
  });
}

aa_status aa_config_parse(const char* text, aa_config** out) {
  if (text == nullptr || out == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new aa_config{academy::parse_config(text)};
    return AA_OK;
  });
}

aa_status aa_config_default(aa_config** out) {
  if (out == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new aa_config{academy::parse_config(academy::default_config_text())};
    return AA_OK;
  });
}

aa_status aa_config_set_seed(aa_config* config, uint64_t seed) {
  if (config == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null config");
  config->value.seed = seed;
  return AA_OK;
}

aa_status aa_config_set_ticks(aa_config* config, int64_t ticks) {
  if (config == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null config");
  if (ticks < 0) return fail(AA_E_INVALID_ARGUMENT, "ticks must be non-negative");
  config->value.ticks = ticks;
  return AA_OK;
}

void aa_config_free(aa_config* config) { delete config; }

aa_status aa_simulation_run(const aa_config* config, const char* transcript_path, aa_result** out) {
  if (config == nullptr || out == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ofstream transcript;
    academy::SimulationOptions options;
    if (transcript_path != nullptr) {
      transcript.open(transcript_path, std::ios::binary | std::ios::trunc);
      if (!transcript) return fail(AA_E_IO, std::string("cannot write ") + transcript_path);
      options.transcript = &transcript;
    }
    auto report = academy::run_simulation(config->value, options);
    if (transcript_path != nullptr && !transcript) return fail(AA_E_IO, std::string("write failed: ") + transcript_path);
    *out = new aa_result{academy::format_report(report), report.observations};
    return AA_OK;
  });
}

const char* aa_result_report(const aa_result* result) { return result == nullptr ? "" : result->report.c_str(); }

uint64_t aa_result_observations(const aa_result* result) { return result == nullptr ? 0 : result->observations; }

void aa_result_free(aa_result* result) { delete result; }

aa_status aa_replay_transcript(const char* path) {
  if (path == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null path");
  return guarded([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) return fail(AA_E_IO, std::string("cannot read ") + path);
    academy::replay_transcript(in);
    return AA_OK;
  });
}

aa_status aa_repository_open(const char* path, aa_repository** out) {
  if (path == nullptr || out == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new aa_repository{std::make_unique<academy::Repository>(path)};
    return AA_OK;
  });
}

aa_status aa_repository_summary(const aa_repository* repository, char** out) {
  if (repository == nullptr || out == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup(academy::format_stats(repository->value->stats()));
    return AA_OK;
  });
}

aa_status aa_repository_mine(const aa_repository* repository, const char* location, char** tree_text,
                             char** rules_text) {
  if (repository == nullptr || location == nullptr || tree_text == nullptr || rules_text == nullptr) {
    return fail(AA_E_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    auto dataset = repository->value->query_examples(location);
    if (dataset.examples.empty()) {
      throw academy::Error(academy::Errc::EmptyDataset, std::string("no labeled examples for ") + location);
    }
    auto tree = academy::induce_tree(dataset);
    std::string rules;
    for (const auto& rule : academy::tree_to_rules(tree)) rules += academy::to_defrule(rule) + "\n";
    char* t = dup(academy::format_tree(tree));
    try {
      *rules_text = dup(rules);
    } catch (...) {
      std::free(t);
      throw;
    }
    *tree_text = t;
    return AA_OK;
  });
}

void aa_repository_close(aa_repository* repository) { delete repository; }

aa_status aa_sl_canonicalize(const char* text, char** out) {
  if (text == nullptr || out == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = dup(academy::sl::print(academy::sl::parse(text)));
    return AA_OK;
  });
}

aa_status aa_rulebase_create(aa_rulebase** out) {
  if (out == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new aa_rulebase{};
    return AA_OK;
  });
}

aa_status aa_rulebase_add(aa_rulebase* rulebase, const char* defrule) {
  if (rulebase == nullptr || defrule == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    rulebase->value.add(academy::parse_defrule(defrule));
    return AA_OK;
  });
}

uint64_t aa_rulebase_size(const aa_rulebase* rulebase) { return rulebase == nullptr ? 0 : rulebase->value.size(); }

aa_status aa_rulebase_run(const aa_rulebase* rulebase, const char* facts, char** store) {
  if (rulebase == nullptr || facts == nullptr || store == nullptr) return fail(AA_E_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    using academy::sl::Node;
    Node parsed = academy::sl::parse(facts);
    if (!parsed.is_list()) throw academy::Error(academy::Errc::MalformedFrame, "facts must be a list");
    academy::WorkingMemory mem;
    for (const auto& f : parsed.children()) {
      if (!f.is_list() || f.children().size() != 2 || !f.children()[0].is_atom() || !f.children()[1].is_atom()) {
        throw academy::Error(academy::Errc::MalformedFrame, "facts must be ((attribute value) ...)");
      }
      mem.assert_fact({f.children()[0].text(), f.children()[1].text()});
    }
    mem.run(rulebase->value);
    Node out = Node::list();
    for (const auto& [k, v] : mem.store()) out.push(Node::list({Node::atom(k), Node::atom(v)}));
    *store = dup(academy::sl::print(out));
    return AA_OK;
  });
}

void aa_rulebase_free(aa_rulebase* rulebase) { delete rulebase; }

}  // extern "C"

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace academy {

// Every failure raised by the core carries one of these codes. The C API maps
// them onto aa_status values; C++ callers can switch on code().
enum class Errc {
  // content_language
  EmptyInput,
  UnbalancedParens,
  UnterminatedString,
  TrailingGarbage,
  UnknownFrame,
  MalformedFrame,
  // rule_engine
  NotADefrule,
  MissingArrow,
  EmptyConditions,
  EmptyActions,
  DuplicateConditionAttribute,
  MalformedRule,
  DuplicateRuleName,
  // data_miner
  UnknownVariable,
  EmptyDataset,
  UnknownAttribute,
  MissingAttribute,
  InvalidAlarmType,
  InvalidDataset,
  // repository
  StorageFailure,
  UnknownEvent,
  DuplicateFeedback,
  CorruptLog,
  // agent_runtime
  DuplicateName,
  UnknownBehavior,
  UnknownReceiver,
  UnknownAgent,
  // ontology_service
  DuplicateOntology,
  UnknownOntology,
  NoMapRegistered,
  UnmappedTerm,
  InvalidOntology,
  // scenario
  ConfigError,
  TranscriptMismatch,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Parse errors additionally carry the 1-based byte position into the source
// text; an error at end of input reports size() + 1.
class ParseError : public Error {
 public:
  ParseError(Errc code, std::size_t index, const std::string& message)
      : Error(code, message + " at offset " + std::to_string(index + 1)), offset_(index + 1) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace academy

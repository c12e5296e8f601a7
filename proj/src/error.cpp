#include "academy/error.hpp"

namespace academy {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnbalancedParens: return "UnbalancedParens";
    case Errc::UnterminatedString: return "UnterminatedString";
    case Errc::TrailingGarbage: return "TrailingGarbage";
    case Errc::UnknownFrame: return "UnknownFrame";
    case Errc::MalformedFrame: return "MalformedFrame";
    case Errc::NotADefrule: return "NotADefrule";
    case Errc::MissingArrow: return "MissingArrow";
    case Errc::EmptyConditions: return "EmptyConditions";
    case Errc::EmptyActions: return "EmptyActions";
    case Errc::DuplicateConditionAttribute: return "DuplicateConditionAttribute";
    case Errc::MalformedRule: return "MalformedRule";
    case Errc::DuplicateRuleName: return "DuplicateRuleName";
    case Errc::UnknownVariable: return "UnknownVariable";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::UnknownAttribute: return "UnknownAttribute";
    case Errc::MissingAttribute: return "MissingAttribute";
    case Errc::InvalidAlarmType: return "InvalidAlarmType";
    case Errc::InvalidDataset: return "InvalidDataset";
    case Errc::StorageFailure: return "StorageFailure";
    case Errc::UnknownEvent: return "UnknownEvent";
    case Errc::DuplicateFeedback: return "DuplicateFeedback";
    case Errc::CorruptLog: return "CorruptLog";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::UnknownBehavior: return "UnknownBehavior";
    case Errc::UnknownReceiver: return "UnknownReceiver";
    case Errc::UnknownAgent: return "UnknownAgent";
    case Errc::DuplicateOntology: return "DuplicateOntology";
    case Errc::UnknownOntology: return "UnknownOntology";
    case Errc::NoMapRegistered: return "NoMapRegistered";
    case Errc::UnmappedTerm: return "UnmappedTerm";
    case Errc::InvalidOntology: return "InvalidOntology";
    case Errc::ConfigError: return "ConfigError";
    case Errc::TranscriptMismatch: return "TranscriptMismatch";
  }
  return "Unknown";
}

}  // namespace academy

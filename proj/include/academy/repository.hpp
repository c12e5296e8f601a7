#pragma once

// Agent Use Repository: an append-only log of sensed values, observations and
// feedback, with an in-memory index rebuilt by replaying the log.
//
// Log format (UTF-8, one canonical SL expression per line):
//   (academyLog :version 1 :threshold K :schema ((attr cat...)...))   header
//   (sensed :tick T :station S :location L :var V :value X :status ok)
//   (obs :id N :tick T :location L :raw ((v x)...) :cat ((v c)...) :pred P
//        :label none|C :labelsrc none|individual|institutional [:votes (...)])
//   (fb :event N :source individual|institutional :by ID :verdict correct|incorrect
//       [:suggested C] :tick T)

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "academy/miner.hpp"

namespace academy {

using EventId = std::uint64_t;
using Tick = std::int64_t;

enum class SourceKind { Individual, Institutional };

std::string_view source_kind_name(SourceKind kind) noexcept;

struct Label {
  AlarmType value;
  SourceKind source = SourceKind::Individual;
  friend bool operator==(const Label&, const Label&) = default;
};

struct ObservationRecord {
  EventId event_id = 0;
  Tick tick = 0;
  std::string location;
  std::map<std::string, double, std::less<>> raw;
  Assignment categories;
  AlarmType predicted;
  std::optional<Label> label;  // nullopt while unlabeled
  friend bool operator==(const ObservationRecord&, const ObservationRecord&) = default;
};

struct Verdict {
  bool correct = true;
  AlarmType suggested;  // meaningful only when !correct

  static Verdict confirm() { return {true, AlarmType()}; }
  static Verdict reject(AlarmType suggested) { return {false, suggested}; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct FeedbackRecord {
  EventId event_id = 0;
  SourceKind source = SourceKind::Individual;
  std::string source_id;  // user id or authority id
  Verdict verdict;
  Tick tick = 0;
  friend bool operator==(const FeedbackRecord&, const FeedbackRecord&) = default;
};

// One accepted verdict, reduced to the label it argues for.
struct Vote {
  SourceKind source = SourceKind::Individual;
  std::string source_id;
  AlarmType suggested;
  friend bool operator==(const Vote&, const Vote&) = default;
};

struct SensedRecord {
  Tick tick = 0;
  std::string station;
  std::string location;
  std::string variable;
  double value = 0;
  std::string status;  // ok | faulty | redundant
  friend bool operator==(const SensedRecord&, const SensedRecord&) = default;
};

// nullopt: the event's label did not change.
using LabelChange = std::optional<AlarmType>;

struct RepositoryConfig {
  std::vector<Attribute> schema;
  int threshold = 5;  // concordant individual verdicts needed to relabel
  friend bool operator==(const RepositoryConfig&, const RepositoryConfig&) = default;
};

struct RepositoryIndex {
  std::map<EventId, ObservationRecord> observations;
  std::map<EventId, std::vector<Vote>> votes;
  friend bool operator==(const RepositoryIndex&, const RepositoryIndex&) = default;
};

struct RepositoryStats {
  std::size_t observations = 0;
  std::size_t labeled_individual = 0;
  std::size_t labeled_institutional = 0;
  std::size_t feedback_records = 0;
  std::size_t sensed_records = 0;
  std::map<std::string, std::size_t> observations_by_location;
  std::map<std::string, std::size_t> labeled_by_location;
};

std::string format_stats(const RepositoryStats& stats);

class Repository {
 public:
  // Opens (or creates) the log at `path` and replays it. An existing header
  // must agree with `config`. An empty path keeps everything in memory.
  Repository(std::filesystem::path path, RepositoryConfig config);
  // Opens an existing log, taking the configuration from its header.
  explicit Repository(std::filesystem::path path);

  Repository(const Repository&) = delete;
  Repository& operator=(const Repository&) = delete;

  // Assigns the next event id (ignoring rec.event_id) and appends.
  EventId record_observation(ObservationRecord rec);
  // Throws UnknownEvent, DuplicateFeedback.
  LabelChange record_feedback(const FeedbackRecord& fb);
  void record_sensed(const SensedRecord& rec);

  // Snapshot of the labeled observations at `location`.
  Dataset query_examples(std::string_view location) const;

  // Rewrites the log as header + one obs line per observation with labels and
  // pending votes folded in. Sensed and fb lines are dropped.
  void compact();

  std::optional<ObservationRecord> find(EventId id) const;
  RepositoryIndex index() const;
  RepositoryStats stats() const;
  const RepositoryConfig& config() const noexcept { return config_; }
  const std::filesystem::path& path() const noexcept { return path_; }
  std::vector<std::string> locations() const;

  // Reads a log into a fresh in-memory index; used by tests and tools.
  static RepositoryIndex replay(const std::filesystem::path& path);

 private:
  void load(bool take_config_from_header);
  void apply_line(const std::string& line, std::size_t line_no, bool& saw_header, bool take_config);
  LabelChange apply_feedback(const FeedbackRecord& fb);
  void append(const std::string& line);

  std::filesystem::path path_;
  std::ofstream log_;
  RepositoryConfig config_;
  RepositoryIndex index_;
  RepositoryStats counters_;
  EventId next_id_ = 1;
  mutable std::mutex mu_;
};

// Serialization helpers shared with tests.
std::string header_line(const RepositoryConfig& config);
std::string observation_line(const ObservationRecord& rec, const std::vector<Vote>* votes = nullptr);
std::string feedback_line(const FeedbackRecord& fb);
std::string sensed_line(const SensedRecord& rec);
// Shortest decimal text that reads back to the same double.
std::string format_real(double value);
double parse_real(std::string_view text);

}  // namespace academy

#pragma once

// The O3RTAA environmental-alert scenario: a synthetic sensor network, the
// Diagnosis / Predictor / Distributor / User / Feedback agents, per-epoch
// metrics and the deterministic simulation driver.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "academy/config.hpp"
#include "academy/miner.hpp"
#include "academy/ontology.hpp"
#include "academy/platform.hpp"
#include "academy/repository.hpp"
#include "academy/rules.hpp"

namespace academy {

// Order-independent randomness: a splitmix64 chain over the mixed-in values.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : state_(seed) {}
  Draw& add(std::uint64_t value);
  Draw& add(std::string_view text);
  std::uint64_t bits() const;
  // Uniform in [0, 1).
  double unit() const;
  // Uniform in [0, n).
  std::uint64_t below(std::uint64_t n) const;

 private:
  std::uint64_t state_;
};

struct SensorReading {
  Tick tick = 0;
  std::string station;
  std::string location;
  std::string variable;
  double value = 0;
  bool faulty = false;  // ground truth of fault injection
};

// Latent regime per (station, variable), a Markov chain over {low, normal,
// high}; readings are drawn uniformly from the regime's range.
class Environment {
 public:
  explicit Environment(const ScenarioConfig& config);

  // One reading per (station, variable) in configuration order. A pure
  // function of (config, tick): earlier ticks are recomputed as needed.
  std::vector<SensorReading> generate_tick(Tick tick);

  // True regime categories of station `index` at the last generated tick.
  Assignment state(std::size_t index) const;
  AlarmType truth(std::size_t index) const;
  std::size_t station_count() const noexcept { return stations_.size(); }

 private:
  void advance_to(Tick tick);

  std::uint64_t seed_;
  double stay_;
  double fault_prob_;
  std::vector<StationConfig> stations_;
  std::vector<VariableConfig> variables_;
  DecisionTree truth_;
  std::vector<std::vector<int>> regime_;  // [station][variable], 0 low 1 normal 2 high
  Tick current_ = -1;
};

enum class Screening { Significant, Faulty, Redundant };

std::string_view screening_name(Screening s) noexcept;

struct Diagnosis {
  Screening screening = Screening::Significant;
  std::string location;
  // The station's forwarded category map; filled only when Significant.
  Assignment categories;
};

// Screens raw readings: out-of-bounds is Faulty, an unchanged category
// (relative to the last forwarded one) is Redundant, anything else is
// Significant and becomes the new forwarded value.
class Diagnoser {
 public:
  explicit Diagnoser(const ScenarioConfig& config);

  // Throws UnknownVariable.
  Diagnosis screen(const SensorReading& reading);

  // Forwarded categories / raw values of a station; empty when never seen.
  Assignment categories(std::string_view station) const;
  std::map<std::string, double, std::less<>> raw(std::string_view station) const;
  // True when every configured variable has a forwarded value.
  bool complete(std::string_view station) const;

 private:
  struct Forwarded {
    std::string category;
    double value = 0;
  };
  std::vector<VariableConfig> variables_;
  Discretizer discretizer_;
  std::map<std::string, std::map<std::string, Forwarded, std::less<>>, std::less<>> forwarded_;
};

// Asserts the categories plus (DEFAULT true), runs the rules and reads
// ALARM_TYPE; an absent key means 0.
AlarmType predict_alarm(const RuleBase& rules, const Assignment& categories);

// Every complete assignment over the schema, in lexicographic domain order.
std::vector<Assignment> input_grid(const std::vector<Attribute>& schema);

// Grid points on which the rules agree with the tree.
std::size_t grid_agreement(const RuleBase& rules, const DecisionTree& truth, const std::vector<Attribute>& schema);

struct DeliveryDecision {
  std::string user;
  Channel channel = Channel::Email;
  std::optional<Tick> delay_until;  // nullopt: send now
  friend bool operator==(const DeliveryDecision&, const DeliveryDecision&) = default;
};

// Recipients are the users subscribed to `type` whose location (from
// `current_location`, falling back to the profile) equals `location`.
DeliveryDecision decide_channel(const UserProfile& user, AlarmType type, Tick tick, const PolicyConfig& policy,
                                int day_length);
std::vector<DeliveryDecision> distribute(AlarmType type, std::string_view location, const std::vector<UserProfile>& users,
                                         const std::map<std::string, std::string, std::less<>>& current_location,
                                         Tick tick, const PolicyConfig& policy, int day_length);

bool window_contains(const ChannelWindow& w, Tick tick, int day_length);
Tick next_window_start(const ChannelWindow& w, Tick tick, int day_length);

// Simulated verdicts. A user is right with probability `accuracy`; a wrong
// user suggests a code other than the truth. Suggesting the prediction is a
// confirmation.
Verdict individual_verdict(std::uint64_t seed, std::string_view user, EventId event, AlarmType truth,
                           AlarmType predicted, double accuracy);
bool institutional_review(std::uint64_t seed, EventId event, double fraction);
Verdict institutional_verdict(AlarmType truth, AlarmType predicted);

struct FeedbackEvent {
  EventId event = 0;
  AlarmType predicted;
  AlarmType truth;
  std::vector<std::string> recipients;  // users the alarm was delivered to
  Tick tick = 0;
};

// The feedback records produced for one event: the authority's verdict when
// the event is selected for review, then one per recipient.
std::vector<FeedbackRecord> feedback_round(const FeedbackEvent& event, const ScenarioConfig& config);

struct DeliveryRecord {
  Tick tick = 0;  // tick the notice was sent
  EventId event = 0;
  std::string user;
  Channel channel = Channel::Email;
  AlarmType type;
  std::string location;
  bool delayed = false;
};

struct EpochMetrics {
  std::string location;
  int epoch = 0;
  Tick start_tick = 0;
  std::size_t rules = 0;
  std::array<std::array<std::size_t, 4>, 4> confusion{};  // [truth][predicted]
  std::size_t grid_agree = 0;
  std::size_t grid_total = 0;

  std::size_t events() const;
  std::size_t correct() const;
  // nullopt when the denominator is zero.
  std::optional<double> precision(int code) const;
  std::optional<double> recall(int code) const;
  double grid_rate() const;
};

struct SimulationReport {
  std::uint64_t seed = 0;
  Tick ticks = 0;
  std::vector<EpochMetrics> epochs;  // by location, then epoch
  std::size_t readings = 0;
  std::size_t faulty = 0;
  std::size_t redundant = 0;
  std::size_t observations = 0;
  std::size_t alarms = 0;
  std::size_t deliveries = 0;
  std::size_t delayed_deliveries = 0;
  std::size_t individual_feedback = 0;
  std::size_t institutional_feedback = 0;
  std::size_t labels = 0;
  std::size_t retrain_requests = 0;
  std::size_t retrain_failures = 0;
  std::size_t messages = 0;

  const EpochMetrics* find(std::string_view location, int epoch) const;
};

// Plain-text table of per-epoch precision/recall and grid agreement.
std::string format_report(const SimulationReport& report);

// Behavior class names registered by the scenario.
inline constexpr std::string_view kDiagnosisBehavior = "DiagnosisBehavior";
inline constexpr std::string_view kPredictorBehavior = "PredictorBehavior";
inline constexpr std::string_view kDistributorBehavior = "DistributorBehavior";
inline constexpr std::string_view kUserBehavior = "UserBehavior";
inline constexpr std::string_view kFeedbackBehavior = "FeedbackBehavior";
inline constexpr std::string_view kOntologyBehavior = "OntologyAgentBehavior";

std::string predictor_name(std::string_view location);

// Ontology Agent: answers ontologyQuery requests with a Mapping, or a failure
// naming the error.
class OntologyAgentBehavior : public Behavior {
 public:
  explicit OntologyAgentBehavior(const OntologyService* service) : service_(service) {}
  bool handle(AgentContext& ctx, const Envelope& env, const sl::Node& content) override;

 private:
  const OntologyService* service_;
};

struct SimulationOptions {
  std::ostream* transcript = nullptr;  // envelope lines, header and report trailer
  std::vector<DeliveryRecord>* deliveries = nullptr;
};

// Runs the closed loop for config.ticks ticks. Deterministic per config.
// Throws ConfigError for an unusable configuration.
SimulationReport run_simulation(const ScenarioConfig& config, const SimulationOptions& options = {});

// Recomputes the run a transcript describes and compares byte for byte.
// Throws TranscriptMismatch naming the first differing line.
void replay_transcript(std::istream& transcript);

}  // namespace academy

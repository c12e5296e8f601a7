#pragma once

// Scenario configuration: INI-style sections read from plain text.
//
//   [simulation]  seed, ticks, day_length, regime_stay, fault_prob, mobility, log
//   [stations]    count + locations (round-robin), or explicit "<id> = <location>"
//   [variable <name>]  bounds, thresholds, low, normal, high (regime ranges)
//   [truth]       tree = (node ...) | (leaf ...)
//   [policy]      K, W, epsilon, R, urgent_threshold
//   [feedback]    institutional_fraction, individual_accuracy, authority
//   [user <id>]   location, alarms, mobile, channels, roam
//   [ontology <name>]  terms (comma separated)
//   [map <from> <to>]  <term> = <term>
//   [agents]      ontology (shared ontology of the predictor agents)

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "academy/miner.hpp"
#include "academy/ontology.hpp"
#include "academy/repository.hpp"

namespace academy {

struct Range {
  double min = 0;
  double max = 0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct VariableConfig {
  std::string name;
  Range bounds;          // physically plausible readings
  Thresholds thresholds;
  Range low, normal, high;  // generating ranges per regime
};

struct StationConfig {
  std::string id;
  std::string location;
};

enum class Channel { Email, Sms, Html };

std::string_view channel_name(Channel c) noexcept;

// Daily recurring window [start, end) in ticks modulo day_length.
struct ChannelWindow {
  Channel channel = Channel::Email;
  int start = 0;
  int end = 24;
  friend bool operator==(const ChannelWindow&, const ChannelWindow&) = default;
};

struct UserProfile {
  std::string id;
  std::set<int> subscribed_alarms;
  std::string location;
  bool mobile = false;
  std::vector<ChannelWindow> channels;
  std::vector<std::string> roam;  // locations a mobile user moves among
};

struct PolicyConfig {
  int threshold = 5;       // K
  int window = 50;         // W
  double epsilon = 0.1;    // error-rate trigger
  int retrain_every = 200; // R
  int urgent_threshold = 3;
};

struct FeedbackConfig {
  double institutional_fraction = 0.2;
  double individual_accuracy = 0.9;
  std::string authority = "civil_protection";
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  Tick ticks = 600;
  int day_length = 24;
  double regime_stay = 0.7;
  double fault_prob = 0.0;
  double mobility = 0.1;  // per-tick chance a mobile user changes location
  std::string log_path;   // empty: in-memory repository

  std::vector<StationConfig> stations;
  std::vector<VariableConfig> variables;
  DecisionTree hidden_truth;
  std::vector<UserProfile> users;
  PolicyConfig policy;
  FeedbackConfig feedback;
  std::vector<Ontology> ontologies;
  std::vector<TermMap> term_maps;
  std::string shared_ontology = "O3RTAAEnglish";

  // Source text the configuration was parsed from (embedded in transcripts).
  std::string source;

  std::vector<std::string> locations() const;  // sorted, unique
  std::vector<Attribute> schema() const;       // variables x {low, normal, high}
  Discretizer discretizer() const;
  const VariableConfig* variable(std::string_view name) const;
};

// Throws ConfigError naming the offending "section.key".
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

// The stock O3RTAA configuration shipped as config/o3rtaa.ini.
std::string_view default_config_text();

}  // namespace academy

#include <algorithm>

#include "academy/error.hpp"
#include "academy/o3rtaa.hpp"

namespace academy {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

const Range& regime_range(const VariableConfig& v, int regime) {
  switch (regime) {
    case 0: return v.low;
    case 1: return v.normal;
    default: return v.high;
  }
}

std::string_view regime_category(int regime) {
  switch (regime) {
    case 0: return kLow;
    case 1: return kNormal;
    default: return kHigh;
  }
}

}  // namespace

Draw& Draw::add(std::uint64_t value) {
  state_ = splitmix(state_ ^ splitmix(value));
  return *this;
}

Draw& Draw::add(std::string_view text) {
  // FNV-1a keeps string hashing identical across standard libraries.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return add(h);
}

std::uint64_t Draw::bits() const { return splitmix(state_); }

double Draw::unit() const { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

std::uint64_t Draw::below(std::uint64_t n) const { return n == 0 ? 0 : bits() % n; }

Environment::Environment(const ScenarioConfig& config)
    : seed_(config.seed),
      stay_(config.regime_stay),
      fault_prob_(config.fault_prob),
      stations_(config.stations),
      variables_(config.variables),
      truth_(config.hidden_truth),
      regime_(config.stations.size(), std::vector<int>(config.variables.size(), 1)) {}

void Environment::advance_to(Tick tick) {
  if (tick < current_) current_ = -1;
  while (current_ < tick) {
    ++current_;
    for (std::size_t s = 0; s < stations_.size(); ++s) {
      for (std::size_t v = 0; v < variables_.size(); ++v) {
        Draw d = Draw(seed_).add("regime").add(s).add(v).add(static_cast<std::uint64_t>(current_));
        int& r = regime_[s][v];
        if (current_ == 0) {
          r = static_cast<int>(d.below(3));
        } else if (d.unit() >= stay_) {
          r = (r + 1 + static_cast<int>(Draw(d.bits()).below(2))) % 3;
        }
      }
    }
  }
}

std::vector<SensorReading> Environment::generate_tick(Tick tick) {
  advance_to(tick);
  std::vector<SensorReading> out;
  out.reserve(stations_.size() * variables_.size());
  for (std::size_t s = 0; s < stations_.size(); ++s) {
    for (std::size_t v = 0; v < variables_.size(); ++v) {
      const VariableConfig& var = variables_[v];
      Draw d = Draw(seed_).add("reading").add(s).add(v).add(static_cast<std::uint64_t>(tick));
      const Range& range = regime_range(var, regime_[s][v]);
      SensorReading r{tick, stations_[s].id, stations_[s].location, var.name, 0.0, false};
      r.value = range.min + (range.max - range.min) * Draw(d.bits()).add(1).unit();
      if (Draw(d.bits()).add(2).unit() < fault_prob_) {
        double span = var.bounds.max - var.bounds.min;
        double spike = span * (1.0 + Draw(d.bits()).add(3).unit());
        r.value = Draw(d.bits()).add(4).below(2) == 0 ? var.bounds.min - spike : var.bounds.max + spike;
        r.faulty = true;
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

Assignment Environment::state(std::size_t index) const {
  Assignment out;
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    out.emplace(variables_[v].name, std::string(regime_category(regime_.at(index)[v])));
  }
  return out;
}

AlarmType Environment::truth(std::size_t index) const { return classify(truth_, state(index)); }

std::string_view screening_name(Screening s) noexcept {
  switch (s) {
    case Screening::Significant: return "ok";
    case Screening::Faulty: return "faulty";
    case Screening::Redundant: return "redundant";
  }
  return "ok";
}

Diagnoser::Diagnoser(const ScenarioConfig& config) : variables_(config.variables), discretizer_(config.discretizer()) {}

Diagnosis Diagnoser::screen(const SensorReading& reading) {
  auto var = std::find_if(variables_.begin(), variables_.end(),
                          [&](const VariableConfig& v) { return v.name == reading.variable; });
  if (var == variables_.end()) throw Error(Errc::UnknownVariable, reading.variable);
  Diagnosis out;
  out.location = reading.location;
  if (!(reading.value >= var->bounds.min && reading.value <= var->bounds.max)) {
    out.screening = Screening::Faulty;
    return out;
  }
  std::string category = discretizer_.discretize(reading.variable, reading.value);
  auto& station = forwarded_[reading.station];
  auto it = station.find(reading.variable);
  if (it != station.end() && it->second.category == category) {
    out.screening = Screening::Redundant;
    return out;
  }
  station[reading.variable] = {std::move(category), reading.value};
  out.screening = Screening::Significant;
  out.categories = categories(reading.station);
  return out;
}

Assignment Diagnoser::categories(std::string_view station) const {
  Assignment out;
  if (auto it = forwarded_.find(station); it != forwarded_.end()) {
    for (const auto& [var, f] : it->second) out.emplace(var, f.category);
  }
  return out;
}

std::map<std::string, double, std::less<>> Diagnoser::raw(std::string_view station) const {
  std::map<std::string, double, std::less<>> out;
  if (auto it = forwarded_.find(station); it != forwarded_.end()) {
    for (const auto& [var, f] : it->second) out.emplace(var, f.value);
  }
  return out;
}

bool Diagnoser::complete(std::string_view station) const {
  auto it = forwarded_.find(station);
  return it != forwarded_.end() && it->second.size() == variables_.size();
}

AlarmType predict_alarm(const RuleBase& rules, const Assignment& categories) {
  WorkingMemory mem;
  for (const auto& [attr, cat] : categories) mem.assert_fact({attr, cat});
  mem.assert_fact({std::string(kDefaultAttribute), std::string(kDefaultValue)});
  mem.run(rules);
  auto stored = mem.stored(kAlarmKey);
  return stored ? AlarmType::parse(*stored) : AlarmType();
}

std::vector<Assignment> input_grid(const std::vector<Attribute>& schema) {
  std::vector<Assignment> out{Assignment{}};
  for (const auto& attr : schema) {
    std::vector<Assignment> next;
    next.reserve(out.size() * attr.domain.size());
    for (const auto& partial : out) {
      for (const auto& cat : attr.domain) {
        Assignment a = partial;
        a[attr.name] = cat;
        next.push_back(std::move(a));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::size_t grid_agreement(const RuleBase& rules, const DecisionTree& truth, const std::vector<Attribute>& schema) {
  std::size_t agree = 0;
  for (const auto& x : input_grid(schema)) {
    if (predict_alarm(rules, x) == classify(truth, x)) ++agree;
  }
  return agree;
}

bool window_contains(const ChannelWindow& w, Tick tick, int day_length) {
  Tick phase = ((tick % day_length) + day_length) % day_length;
  return phase >= w.start && phase < w.end;
}

Tick next_window_start(const ChannelWindow& w, Tick tick, int day_length) {
  Tick phase = ((tick % day_length) + day_length) % day_length;
  Tick day_start = tick - phase;
  return phase < w.start ? day_start + w.start : day_start + day_length + w.start;
}

DeliveryDecision decide_channel(const UserProfile& user, AlarmType type, Tick tick, const PolicyConfig& policy,
                                int day_length) {
  if (type.code() >= policy.urgent_threshold) return {user.id, Channel::Sms, std::nullopt};
  for (const auto& w : user.channels) {
    if (window_contains(w, tick, day_length)) return {user.id, w.channel, std::nullopt};
  }
  const ChannelWindow& first = user.channels.front();
  return {user.id, first.channel, next_window_start(first, tick, day_length)};
}

std::vector<DeliveryDecision> distribute(AlarmType type, std::string_view location, const std::vector<UserProfile>& users,
                                         const std::map<std::string, std::string, std::less<>>& current_location,
                                         Tick tick, const PolicyConfig& policy, int day_length) {
  std::vector<DeliveryDecision> out;
  if (type.code() == 0) return out;
  for (const auto& u : users) {
    if (u.subscribed_alarms.count(type.code()) == 0) continue;
    auto it = current_location.find(u.id);
    const std::string& where = it != current_location.end() ? it->second : u.location;
    if (where != location) continue;
    out.push_back(decide_channel(u, type, tick, policy, day_length));
  }
  return out;
}

Verdict individual_verdict(std::uint64_t seed, std::string_view user, EventId event, AlarmType truth,
                           AlarmType predicted, double accuracy) {
  Draw d = Draw(seed).add("individual").add(user).add(event);
  AlarmType opinion = truth;
  if (d.unit() >= accuracy) {
    int offset = 1 + static_cast<int>(Draw(d.bits()).below(AlarmType::kMaxCode));
    opinion = AlarmType((truth.code() + offset) % (AlarmType::kMaxCode + 1));
  }
  return opinion == predicted ? Verdict::confirm() : Verdict::reject(opinion);
}

bool institutional_review(std::uint64_t seed, EventId event, double fraction) {
  return Draw(seed).add("institutional").add(event).unit() < fraction;
}

Verdict institutional_verdict(AlarmType truth, AlarmType predicted) {
  return truth == predicted ? Verdict::confirm() : Verdict::reject(truth);
}

std::vector<FeedbackRecord> feedback_round(const FeedbackEvent& event, const ScenarioConfig& config) {
  std::vector<FeedbackRecord> out;
  if (institutional_review(config.seed, event.event, config.feedback.institutional_fraction)) {
    out.push_back({event.event, SourceKind::Institutional, config.feedback.authority,
                   institutional_verdict(event.truth, event.predicted), event.tick});
  }
  for (const auto& user : event.recipients) {
    out.push_back({event.event, SourceKind::Individual, user,
                   individual_verdict(config.seed, user, event.event, event.truth, event.predicted,
                                      config.feedback.individual_accuracy),
                   event.tick});
  }
  return out;
}

}  // namespace academy

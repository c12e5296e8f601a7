#include "academy/o3rtaa.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "academy/error.hpp"

namespace academy {

namespace {

using sl::Node;

Node sym(std::string text) { return Node::atom(std::move(text)); }
Node kw(std::string name) { return Node::keyword(std::move(name)); }
Node num(std::uint64_t n) { return Node::atom(std::to_string(n)); }
Node code(AlarmType t) { return Node::atom(t.symbol()); }

const Node& field(const Node& msg, std::string_view key) {
  const Node* v = sl::keyword_value(msg, key);
  if (v == nullptr) throw Error(Errc::MalformedFrame, "missing :" + std::string(key));
  return *v;
}

const std::string& atom_field(const Node& msg, std::string_view key) {
  const Node& v = field(msg, key);
  if (!v.is_atom()) throw Error(Errc::MalformedFrame, ":" + std::string(key) + " must be a symbol");
  return v.text();
}

std::uint64_t number_field(const Node& msg, std::string_view key) {
  const std::string& text = atom_field(msg, key);
  std::uint64_t n = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(Errc::MalformedFrame, ":" + std::string(key) + " must be a number");
  }
  return n;
}

// ((name value) ...) pairs.
std::vector<std::pair<std::string, std::string>> pairs_field(const Node& msg, std::string_view key) {
  const Node& v = field(msg, key);
  std::vector<std::pair<std::string, std::string>> out;
  if (!v.is_list()) throw Error(Errc::MalformedFrame, ":" + std::string(key) + " must be a list");
  for (const auto& p : v.children()) {
    if (!p.is_list() || p.children().size() != 2 || !p.children()[0].is_atom() || !p.children()[1].is_atom()) {
      throw Error(Errc::MalformedFrame, ":" + std::string(key) + " entries must be (name value)");
    }
    out.emplace_back(p.children()[0].text(), p.children()[1].text());
  }
  return out;
}

constexpr std::string_view kEnvironmentName = "environment";
constexpr std::string_view kDiagnosisName = "diagnosis";
constexpr std::string_view kDistributorName = "distributor";
constexpr std::string_view kFeedbackName = "feedback";
constexpr std::string_view kOntologyName = "ontology";

// Simulation state shared by the scenario behaviors. Only the deterministic
// scheduler thread touches it.
struct SimContext {
  const ScenarioConfig& config;
  Repository& repository;
  Environment& environment;
  SimulationReport& report;
  std::vector<DeliveryRecord>* deliveries = nullptr;
  std::vector<Attribute> schema;
  std::map<std::string, std::size_t, std::less<>> station_index;
  std::map<std::string, std::string, std::less<>> predictor_location;  // agent -> location
  std::map<EventId, AlarmType> event_truth;
  std::map<std::pair<std::string, int>, EpochMetrics> metrics;

  EpochMetrics& epoch(const std::string& location, int n) {
    auto& m = metrics[{location, n}];
    m.location = location;
    m.epoch = n;
    return m;
  }
};

class DiagnosisBehavior : public Behavior {
 public:
  explicit DiagnosisBehavior(SimContext& sim) : sim_(sim), diagnoser_(sim.config) {}

  bool handle(AgentContext& ctx, const Envelope&, const Node& content) override {
    if (!content.has_head("sensorReadings")) return false;
    const std::string& station = atom_field(content, "station");
    const std::string& location = atom_field(content, "location");
    bool significant = false;
    for (const auto& [var, value] : pairs_field(content, "values")) {
      SensorReading r{ctx.tick(), station, location, var, parse_real(value), false};
      Diagnosis d = diagnoser_.screen(r);
      ++sim_.report.readings;
      if (d.screening == Screening::Faulty) ++sim_.report.faulty;
      if (d.screening == Screening::Redundant) ++sim_.report.redundant;
      if (d.screening == Screening::Significant) significant = true;
      sim_.repository.record_sensed({r.tick, station, location, var, r.value, std::string(screening_name(d.screening))});
    }
    if (significant) pending_.insert(station);
    if (pending_.count(station) != 0 && diagnoser_.complete(station)) {
      pending_.erase(station);
      Node raw = Node::list();
      for (const auto& [var, value] : diagnoser_.raw(station)) raw.push(Node::list({sym(var), sym(format_real(value))}));
      Node cat = Node::list();
      for (const auto& [var, c] : diagnoser_.categories(station)) cat.push(Node::list({sym(var), sym(c)}));
      ctx.send(Performative::Inform, predictor_name(location), sim_.config.shared_ontology,
               Node::list({sym("observation"), kw("station"), sym(station), kw("location"), sym(location), kw("raw"),
                           std::move(raw), kw("cat"), std::move(cat)}));
    }
    return true;
  }

 private:
  SimContext& sim_;
  Diagnoser diagnoser_;
  std::set<std::string, std::less<>> pending_;
};

class PredictorBehavior : public Behavior {
 public:
  explicit PredictorBehavior(SimContext& sim) : sim_(sim) {}

  bool handle(AgentContext& ctx, const Envelope& env, const Node& content) override {
    if (content.has_head("error") && env.performative == Performative::Failure) {
      ++sim_.report.retrain_failures;
      return true;
    }
    if (!content.has_head("observation")) return false;
    const std::string& station = atom_field(content, "station");
    const std::string& location = atom_field(content, "location");

    ObservationRecord rec;
    rec.tick = ctx.tick();
    rec.location = location;
    for (const auto& [var, value] : pairs_field(content, "raw")) rec.raw[var] = parse_real(value);
    for (const auto& [var, c] : pairs_field(content, "cat")) rec.categories[var] = c;
    rec.predicted = predict_alarm(ctx.self.rules(), rec.categories);
    AlarmType predicted = rec.predicted;
    EventId id = sim_.repository.record_observation(std::move(rec));
    ++sim_.report.observations;

    AlarmType truth = sim_.environment.truth(sim_.station_index.at(station));
    sim_.event_truth[id] = truth;
    sim_.epoch(location, ctx.self.rule_epoch()).confusion[truth.code()][predicted.code()]++;

    const std::string& ontology = sim_.config.shared_ontology;
    if (predicted.code() > 0) {
      ++sim_.report.alarms;
      ctx.send(Performative::Inform, kDistributorName, ontology,
               Node::list({sym("alarm"), kw("event"), num(id), kw("type"), code(predicted), kw("location"), sym(location)}));
    }
    ctx.send(Performative::Inform, kFeedbackName, ontology,
             Node::list({sym("event"), kw("id"), num(id), kw("station"), sym(station), kw("location"), sym(location),
                         kw("pred"), code(predicted)}));

    ++count_;
    bool retrain = count_ % static_cast<std::size_t>(sim_.config.policy.retrain_every) == 0;
    if (sim_.config.policy.window > 0) {
      window_.push_back(id);
      if (window_.size() == static_cast<std::size_t>(sim_.config.policy.window)) {
        std::size_t labeled = 0;
        std::size_t wrong = 0;
        for (EventId e : window_) {
          auto obs = sim_.repository.find(e);
          if (!obs || !obs->label) continue;
          ++labeled;
          if (obs->label->value != obs->predicted) ++wrong;
        }
        window_.clear();
        if (labeled > 0 && static_cast<double>(wrong) / static_cast<double>(labeled) > sim_.config.policy.epsilon) {
          retrain = true;
        }
      }
    }
    if (retrain) {
      ++sim_.report.retrain_requests;
      ctx.send(Performative::Request, kAtmName, kTrainingOntology, retrain_request(ctx.self.name(), location));
    }
    return true;
  }

 private:
  SimContext& sim_;
  std::size_t count_ = 0;
  std::vector<EventId> window_;
};

class DistributorBehavior : public Behavior {
 public:
  explicit DistributorBehavior(SimContext& sim) : sim_(sim) {}

  bool handle(AgentContext& ctx, const Envelope&, const Node& content) override {
    if (content.has_head("alarm")) {
      EventId id = number_field(content, "event");
      Pending p{AlarmType::parse(atom_field(content, "type")), atom_field(content, "location"), {}, {}};
      for (const auto& u : sim_.config.users) {
        if (u.mobile && u.subscribed_alarms.count(p.type.code()) != 0) p.awaiting.insert(u.id);
      }
      for (const auto& user : p.awaiting) {
        ctx.send(Performative::Request, user, sim_.config.shared_ontology,
                 Node::list({sym("whereAreYou"), kw("event"), num(id)}));
      }
      bool ready = p.awaiting.empty();
      pending_.emplace(id, std::move(p));
      if (ready) finish(ctx, id);
      return true;
    }
    if (content.has_head("userLocation")) {
      EventId id = number_field(content, "event");
      auto it = pending_.find(id);
      if (it == pending_.end()) return true;
      const std::string& user = atom_field(content, "user");
      it->second.awaiting.erase(user);
      it->second.reported[user] = atom_field(content, "location");
      if (it->second.awaiting.empty()) finish(ctx, id);
      return true;
    }
    if (content.has_head("clock")) {
      Tick now = static_cast<Tick>(number_field(content, "tick"));
      auto end = delayed_.upper_bound(now);
      for (auto it = delayed_.begin(); it != end; ++it) notify(ctx, it->second, true);
      delayed_.erase(delayed_.begin(), end);
      return true;
    }
    return false;
  }

 private:
  struct Pending {
    AlarmType type;
    std::string location;
    std::set<std::string> awaiting;
    std::map<std::string, std::string, std::less<>> reported;
  };
  struct Notice {
    EventId event;
    std::string user;
    Channel channel;
    AlarmType type;
    std::string location;
  };

  void finish(AgentContext& ctx, EventId id) {
    auto node = pending_.extract(id);
    const Pending& p = node.mapped();
    auto decisions = distribute(p.type, p.location, sim_.config.users, p.reported, ctx.tick(), sim_.config.policy,
                                sim_.config.day_length);
    for (const auto& d : decisions) {
      Notice n{id, d.user, d.channel, p.type, p.location};
      if (d.delay_until) {
        delayed_.emplace(*d.delay_until, std::move(n));
      } else {
        notify(ctx, n, false);
      }
    }
  }

  void notify(AgentContext& ctx, const Notice& n, bool delayed) {
    ctx.send(Performative::Inform, n.user, sim_.config.shared_ontology,
             Node::list({sym("alarmNotice"), kw("event"), num(n.event), kw("type"), code(n.type), kw("location"),
                         sym(n.location), kw("channel"), sym(std::string(channel_name(n.channel)))}));
    ++sim_.report.deliveries;
    if (delayed) ++sim_.report.delayed_deliveries;
    if (sim_.deliveries != nullptr) {
      sim_.deliveries->push_back({ctx.tick(), n.event, n.user, n.channel, n.type, n.location, delayed});
    }
  }

  SimContext& sim_;
  std::map<EventId, Pending> pending_;
  std::multimap<Tick, Notice> delayed_;
};

class UserBehavior : public Behavior {
 public:
  explicit UserBehavior(SimContext& sim) : sim_(sim) {}

  bool handle(AgentContext& ctx, const Envelope& env, const Node& content) override {
    const UserProfile& me = profile(ctx.self.name());
    if (content.has_head("clock")) {
      Tick now = static_cast<Tick>(number_field(content, "tick"));
      Draw d = Draw(sim_.config.seed).add("move").add(me.id).add(static_cast<std::uint64_t>(now));
      if (me.mobile && d.unit() < sim_.config.mobility) location_ = me.roam[Draw(d.bits()).below(me.roam.size())];
      return true;
    }
    if (content.has_head("whereAreYou")) {
      ctx.reply(env, Performative::Inform,
                Node::list({sym("userLocation"), kw("user"), sym(me.id), kw("location"), sym(location_), kw("event"),
                            num(number_field(content, "event"))}));
      return true;
    }
    if (content.has_head("alarmNotice")) {
      EventId id = number_field(content, "event");
      AlarmType type = AlarmType::parse(atom_field(content, "type"));
      Verdict v = individual_verdict(sim_.config.seed, me.id, id, sim_.event_truth.at(id), type,
                                     sim_.config.feedback.individual_accuracy);
      Node msg = Node::list({sym("feedback"), kw("event"), num(id), kw("verdict"), sym(v.correct ? "correct" : "incorrect")});
      if (!v.correct) {
        msg.push(kw("suggested"));
        msg.push(code(v.suggested));
      }
      ctx.send(Performative::Inform, kFeedbackName, sim_.config.shared_ontology, msg);
      return true;
    }
    return false;
  }

 private:
  const UserProfile& profile(const std::string& name) {
    if (profile_ == nullptr) {
      for (const auto& u : sim_.config.users) {
        if (u.id == name) profile_ = &u;
      }
      if (profile_ == nullptr) throw Error(Errc::UnknownAgent, "no profile for " + name);
      location_ = profile_->location;
    }
    return *profile_;
  }

  SimContext& sim_;
  const UserProfile* profile_ = nullptr;
  std::string location_;
};

class FeedbackBehavior : public Behavior {
 public:
  explicit FeedbackBehavior(SimContext& sim) : sim_(sim) {}

  bool handle(AgentContext& ctx, const Envelope& env, const Node& content) override {
    if (content.has_head("event")) {
      EventId id = number_field(content, "id");
      if (institutional_review(sim_.config.seed, id, sim_.config.feedback.institutional_fraction)) {
        AlarmType predicted = AlarmType::parse(atom_field(content, "pred"));
        record({id, SourceKind::Institutional, sim_.config.feedback.authority,
                institutional_verdict(sim_.event_truth.at(id), predicted), ctx.tick()});
      }
      return true;
    }
    if (content.has_head("feedback")) {
      EventId id = number_field(content, "event");
      Verdict v = Verdict::confirm();
      if (atom_field(content, "verdict") == "incorrect") v = Verdict::reject(AlarmType::parse(atom_field(content, "suggested")));
      record({id, SourceKind::Individual, env.sender, v, ctx.tick()});
      return true;
    }
    return false;
  }

 private:
  void record(const FeedbackRecord& fb) {
    if (fb.source == SourceKind::Institutional) {
      ++sim_.report.institutional_feedback;
    } else {
      ++sim_.report.individual_feedback;
    }
    if (sim_.repository.record_feedback(fb)) ++sim_.report.labels;
  }

  SimContext& sim_;
};

class SimListener : public PlatformListener {
 public:
  SimListener(SimContext& sim, std::ostream* transcript) : sim_(sim), transcript_(transcript) {}

  void on_send(Tick tick, const Envelope& env) override {
    ++sim_.report.messages;
    if (transcript_ != nullptr) *transcript_ << transcript_line(tick, env) << '\n';
  }

  void on_rules_installed(Agent& agent) override {
    auto it = sim_.predictor_location.find(agent.name());
    if (it == sim_.predictor_location.end()) return;
    start_epoch(it->second, agent.rule_epoch(), agent.rules(), tick_);
  }

  void start_epoch(const std::string& location, int epoch, const RuleBase& rules, Tick tick) {
    EpochMetrics& m = sim_.epoch(location, epoch);
    m.start_tick = tick;
    m.rules = rules.size();
    m.grid_agree = grid_agreement(rules, sim_.config.hidden_truth, sim_.schema);
    m.grid_total = input_grid(sim_.schema).size();
  }

  Tick tick_ = 0;

 private:
  SimContext& sim_;
  std::ostream* transcript_;
};

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::string format_rate(std::optional<double> v) {
  if (!v) return "-";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

}  // namespace

std::string predictor_name(std::string_view location) { return "predictor_" + std::string(location); }

std::size_t EpochMetrics::events() const {
  std::size_t n = 0;
  for (const auto& row : confusion) {
    for (auto c : row) n += c;
  }
  return n;
}

std::size_t EpochMetrics::correct() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < confusion.size(); ++i) n += confusion[i][i];
  return n;
}

std::optional<double> EpochMetrics::precision(int c) const {
  std::size_t col = 0;
  for (const auto& row : confusion) col += row[static_cast<std::size_t>(c)];
  if (col == 0) return std::nullopt;
  return static_cast<double>(confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]) / static_cast<double>(col);
}

std::optional<double> EpochMetrics::recall(int c) const {
  std::size_t row = 0;
  for (auto v : confusion[static_cast<std::size_t>(c)]) row += v;
  if (row == 0) return std::nullopt;
  return static_cast<double>(confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)]) / static_cast<double>(row);
}

double EpochMetrics::grid_rate() const {
  return grid_total == 0 ? 0.0 : static_cast<double>(grid_agree) / static_cast<double>(grid_total);
}

const EpochMetrics* SimulationReport::find(std::string_view location, int epoch) const {
  for (const auto& m : epochs) {
    if (m.location == location && m.epoch == epoch) return &m;
  }
  return nullptr;
}

std::string format_report(const SimulationReport& r) {
  std::ostringstream out;
  out << "seed " << r.seed << " ticks " << r.ticks << '\n';
  out << "readings " << r.readings << " faulty " << r.faulty << " redundant " << r.redundant << '\n';
  out << "observations " << r.observations << " alarms " << r.alarms << " deliveries " << r.deliveries << " delayed "
      << r.delayed_deliveries << '\n';
  out << "feedback individual " << r.individual_feedback << " institutional " << r.institutional_feedback
      << " label_changes " << r.labels << '\n';
  out << "retrain requests " << r.retrain_requests << " failures " << r.retrain_failures << " messages " << r.messages
      << '\n';
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %5s %6s %5s %7s %8s", "location", "epoch", "start", "rules", "events",
                "accuracy");
  out << line;
  for (int c = 0; c <= AlarmType::kMaxCode; ++c) {
    std::snprintf(line, sizeof line, " %6s%d %6s%d", "p", c, "r", c);
    out << line;
  }
  out << "   grid\n";
  for (const auto& m : r.epochs) {
    std::optional<double> acc;
    if (m.events() > 0) acc = static_cast<double>(m.correct()) / static_cast<double>(m.events());
    std::snprintf(line, sizeof line, "%-12s %5d %6lld %5zu %7zu %8s", m.location.c_str(), m.epoch,
                  static_cast<long long>(m.start_tick), m.rules, m.events(), format_rate(acc).c_str());
    out << line;
    for (int c = 0; c <= AlarmType::kMaxCode; ++c) {
      std::snprintf(line, sizeof line, " %7s %7s", format_rate(m.precision(c)).c_str(), format_rate(m.recall(c)).c_str());
      out << line;
    }
    std::snprintf(line, sizeof line, " %3zu/%zu\n", m.grid_agree, m.grid_total);
    out << line;
  }
  return out.str();
}

bool OntologyAgentBehavior::handle(AgentContext& ctx, const Envelope& env, const Node& content) {
  if (!content.has_head("ontologyQuery")) return false;
  try {
    auto query = std::get<OntologyQuery>(decode_frame(content));
    ctx.reply(env, Performative::Inform, encode_frame(service_->map_term(query)));
  } catch (const Error& e) {
    ctx.reply(env, Performative::Failure, error_content(e.code(), e.what()));
  }
  return true;
}

SimulationReport run_simulation(const ScenarioConfig& config, const SimulationOptions& options) {
  if (config.stations.empty() || config.variables.empty()) throw Error(Errc::ConfigError, "stations: none configured");
  validate_tree(config.hidden_truth, config.schema());

  SimulationReport report;
  report.seed = config.seed;
  report.ticks = config.ticks;

  if (!config.log_path.empty()) {
    std::error_code ec;
    std::filesystem::remove(config.log_path, ec);
  }
  Repository repository(config.log_path, RepositoryConfig{config.schema(), config.policy.threshold});
  Environment environment(config);
  SimContext sim{config, repository, environment, report, options.deliveries, config.schema(), {}, {}, {}, {}};
  for (std::size_t i = 0; i < config.stations.size(); ++i) sim.station_index.emplace(config.stations[i].id, i);
  const auto locations = config.locations();
  for (const auto& loc : locations) sim.predictor_location.emplace(predictor_name(loc), loc);

  OntologyService ontologies;
  for (const auto& o : config.ontologies) ontologies.register_ontology(o);
  for (const auto& m : config.term_maps) ontologies.register_map(m);

  const std::map<std::string, std::vector<std::string>> training = {
      {"diagnosisAgent", {std::string(kDiagnosisBehavior)}},
      {"predictorAgent", {std::string(kPredictorBehavior)}},
      {"distributorAgent", {std::string(kDistributorBehavior)}},
      {"userAgent", {std::string(kUserBehavior)}},
      {"feedbackAgent", {std::string(kFeedbackBehavior)}},
      {"ontologyAgent", {std::string(kOntologyBehavior)}},
  };

  BehaviorRegistry registry;
  registry.add(std::string(kAtmBehavior), [&] { return std::make_unique<AtmBehavior>(training, &repository); });
  registry.add(std::string(kDiagnosisBehavior), [&] { return std::make_unique<DiagnosisBehavior>(sim); });
  registry.add(std::string(kPredictorBehavior), [&] { return std::make_unique<PredictorBehavior>(sim); });
  registry.add(std::string(kDistributorBehavior), [&] { return std::make_unique<DistributorBehavior>(sim); });
  registry.add(std::string(kUserBehavior), [&] { return std::make_unique<UserBehavior>(sim); });
  registry.add(std::string(kFeedbackBehavior), [&] { return std::make_unique<FeedbackBehavior>(sim); });
  registry.add(std::string(kOntologyBehavior), [&] { return std::make_unique<OntologyAgentBehavior>(&ontologies); });

  std::ostream* transcript = options.transcript;
  if (transcript != nullptr) {
    *transcript << "# academy-transcript 1\n# seed " << config.seed << "\n# ticks " << config.ticks << '\n';
    for (const auto& line : split_lines(config.source)) *transcript << "# config " << line << '\n';
  }

  Platform platform(std::move(registry), PlatformOptions{SchedulerMode::Seeded, config.seed});
  SimListener listener(sim, transcript);
  platform.set_listener(&listener);

  const std::string& ontology = config.shared_ontology;
  platform.spawn({std::string(kAtmName), "trainingModule", {std::string(kAtmBehavior)}, std::string(kTrainingOntology)});
  platform.spawn({std::string(kEnvironmentName), "sensorNetwork", {}, ontology});
  if (!config.ontologies.empty()) platform.create_agent({std::string(kOntologyName), "ontologyAgent", {}, ontology});
  platform.create_agent({std::string(kDiagnosisName), "diagnosisAgent", {}, ontology});
  for (const auto& loc : locations) platform.create_agent({predictor_name(loc), "predictorAgent", {}, ontology});
  platform.create_agent({std::string(kDistributorName), "distributorAgent", {}, ontology});
  platform.create_agent({std::string(kFeedbackName), "feedbackAgent", {}, ontology});
  for (const auto& u : config.users) platform.create_agent({u.id, "userAgent", {}, ontology});
  platform.run_until_idle();

  if (config.ticks > 0) {
    for (const auto& loc : locations) listener.start_epoch(loc, 0, RuleBase{}, 0);
  }

  std::vector<std::string> mobile;
  for (const auto& u : config.users) {
    if (u.mobile) mobile.push_back(u.id);
  }
  const std::size_t nvars = config.variables.size();
  for (Tick t = 0; t < config.ticks; ++t) {
    platform.set_tick(t);
    listener.tick_ = t;
    Node clock = Node::list({sym("clock"), kw("tick"), num(static_cast<std::uint64_t>(t))});
    for (const auto& id : mobile) platform.send(Performative::Inform, kEnvironmentName, id, ontology, clock);
    platform.send(Performative::Inform, kEnvironmentName, kDistributorName, ontology, clock);

    auto readings = environment.generate_tick(t);
    for (std::size_t s = 0; s < config.stations.size(); ++s) {
      Node values = Node::list();
      for (std::size_t v = 0; v < nvars; ++v) {
        const auto& r = readings[s * nvars + v];
        values.push(Node::list({sym(r.variable), sym(format_real(r.value))}));
      }
      platform.send(Performative::Inform, kEnvironmentName, kDiagnosisName, ontology,
                    Node::list({sym("sensorReadings"), kw("station"), sym(config.stations[s].id), kw("location"),
                                sym(config.stations[s].location), kw("values"), std::move(values)}));
    }
    platform.run_until_idle();
  }

  for (auto& [key, m] : sim.metrics) report.epochs.push_back(m);
  if (transcript != nullptr) {
    for (const auto& line : split_lines(format_report(report))) *transcript << "# report " << line << '\n';
    transcript->flush();
  }
  return report;
}

void replay_transcript(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));

  auto mismatch = [](std::size_t line_no, const std::string& why) {
    throw Error(Errc::TranscriptMismatch, "line " + std::to_string(line_no) + ": " + why);
  };
  if (lines.empty() || lines[0] != "# academy-transcript 1") mismatch(1, "not an academy transcript");

  std::optional<std::uint64_t> seed;
  std::optional<Tick> ticks;
  std::string source;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& l = lines[i];
    if (l.rfind("# seed ", 0) == 0) {
      seed = std::stoull(l.substr(7));
    } else if (l.rfind("# ticks ", 0) == 0) {
      ticks = std::stoll(l.substr(8));
    } else if (l.rfind("# config ", 0) == 0) {
      source += l.substr(9);
      source += '\n';
    } else if (l == "# config") {
      source += '\n';
    } else {
      break;
    }
  }
  if (!seed || !ticks) mismatch(2, "missing seed or ticks header");

  ScenarioConfig config = parse_config(source);
  config.seed = *seed;
  config.ticks = *ticks;
  config.log_path.clear();

  std::ostringstream recomputed;
  run_simulation(config, {&recomputed, nullptr});
  std::istringstream again(recomputed.str());
  std::size_t line_no = 0;
  for (std::string line; std::getline(again, line);) {
    if (line_no >= lines.size()) mismatch(line_no + 1, "transcript ends early; expected '" + line + "'");
    if (lines[line_no] != line) {
      mismatch(line_no + 1, "expected '" + line + "', found '" + lines[line_no] + "'");
    }
    ++line_no;
  }
  if (line_no != lines.size()) mismatch(line_no + 1, "unexpected trailing line '" + lines[line_no] + "'");
}

}  // namespace academy

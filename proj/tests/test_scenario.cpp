#include <doctest.h>

#include <sstream>

#include "academy/error.hpp"
#include "academy/o3rtaa.hpp"
#include "oracles.hpp"
#include "reference_texts.hpp"

using namespace academy;

namespace {

ScenarioConfig default_config() { return parse_config(default_config_text()); }

ScenarioConfig convergence_config(std::uint64_t seed) {
  ScenarioConfig c = load_config(ACADEMY_CONFIG_DIR "/convergence.ini");
  c.seed = seed;
  return c;
}

UserProfile user(std::string id, std::string loc, std::set<int> alarms, std::vector<ChannelWindow> ch) {
  UserProfile u;
  u.id = std::move(id);
  u.location = std::move(loc);
  u.subscribed_alarms = std::move(alarms);
  u.channels = std::move(ch);
  return u;
}

SensorReading reading(std::string station, std::string var, double value) {
  return {0, std::move(station), "valencia", std::move(var), value, false};
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("environment: bounds, fault rate, determinism") {
    ScenarioConfig c = default_config();
    c.fault_prob = 0;
    Environment clean(c);
    for (Tick t = 0; t < 200; ++t) {
      for (const auto& r : clean.generate_tick(t)) {
        const VariableConfig* v = c.variable(r.variable);
        CHECK_FALSE(r.faulty);
        CHECK(r.value >= v->bounds.min);
        CHECK(r.value <= v->bounds.max);
      }
    }

    c.fault_prob = 0.05;
    Environment noisy(c);
    std::size_t n = 0, faults = 0;
    for (Tick t = 0; n < 10000; ++t) {
      for (const auto& r : noisy.generate_tick(t)) {
        if (n == 10000) break;
        ++n;
        const VariableConfig* v = c.variable(r.variable);
        bool outside = r.value < v->bounds.min || r.value > v->bounds.max;
        CHECK(outside == r.faulty);
        faults += r.faulty ? 1 : 0;
      }
    }
    double rate = static_cast<double>(faults) / static_cast<double>(n);
    CHECK(std::abs(rate - 0.05) <= 0.01);

    Environment a(c), b(c);
    for (Tick t = 0; t < 50; ++t) {
      auto ra = a.generate_tick(t);
      auto rb = b.generate_tick(t);
      REQUIRE(ra.size() == rb.size());
      for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].value == rb[i].value);
    }
    // Pure in the tick: going back recomputes the same values.
    auto t10 = a.generate_tick(10);
    a.generate_tick(40);
    auto again = a.generate_tick(10);
    for (std::size_t i = 0; i < t10.size(); ++i) CHECK(t10[i].value == again[i].value);
  }

  TEST_CASE("diagnose: faulty, redundant, significant") {
    ScenarioConfig c = default_config();
    Diagnoser d(c);
    CHECK(d.screen(reading("st01", "ozone", -3)).screening == Screening::Faulty);
    CHECK(d.categories("st01").empty());
    auto first = d.screen(reading("st01", "ozone", 50));
    CHECK(first.screening == Screening::Significant);
    CHECK(first.location == "valencia");
    CHECK(first.categories == Assignment{{"ozone", "normal"}});
    CHECK(d.screen(reading("st01", "ozone", 60)).screening == Screening::Redundant);
    CHECK(d.raw("st01").at("ozone") == 50);
    auto flip = d.screen(reading("st01", "ozone", 120));
    CHECK(flip.screening == Screening::Significant);
    CHECK(flip.categories == Assignment{{"ozone", "high"}});
    CHECK_FALSE(d.complete("st01"));
    d.screen(reading("st01", "NO2NO3", 10));
    d.screen(reading("st01", "pressure", 1010));
    CHECK(d.complete("st01"));
    // Stations are independent.
    CHECK(d.screen(reading("st02", "ozone", 120)).screening == Screening::Significant);
    CHECK_THROWS_AS(d.screen(reading("st01", "humidity", 1)), Error);
    CHECK(screening_name(Screening::Redundant) == "redundant");
  }

  TEST_CASE("diagnosis soundness over generated readings") {
    ScenarioConfig c = default_config();
    c.fault_prob = 0.1;
    Environment env(c);
    Diagnoser d(c);
    Discretizer disc = c.discretizer();
    std::map<std::pair<std::string, std::string>, std::string> last;
    for (Tick t = 0; t < 300; ++t) {
      for (const auto& r : env.generate_tick(t)) {
        auto out = d.screen(r);
        if (r.faulty) {
          CHECK(out.screening == Screening::Faulty);
          continue;
        }
        std::string cat = disc.discretize(r.variable, r.value);
        auto key = std::make_pair(r.station, r.variable);
        auto it = last.find(key);
        bool changed = it == last.end() || it->second != cat;
        CHECK((out.screening == Screening::Significant) == changed);
        if (changed) {
          CHECK(out.categories.at(r.variable) == cat);
          last[key] = cat;
        }
      }
    }
  }

  TEST_CASE("predict_alarm") {
    CHECK(predict_alarm(RuleBase{}, {{"ozone", "normal"}}).code() == 0);
    RuleBase reference({parse_defrule(ref::kRule6), parse_defrule(ref::kRule5)});
    CHECK(predict_alarm(reference, {{"ozone", "normal"}}).code() == 3);
    ScenarioConfig c = default_config();
    RuleBase truth(tree_to_rules(c.hidden_truth));
    CHECK(grid_agreement(truth, c.hidden_truth, c.schema()) == 27);
    for (const auto& x : oracle::grid(c.schema())) CHECK(predict_alarm(truth, x) == oracle::classify(c.hidden_truth, x));
    CHECK(input_grid(c.schema()).size() == 27);
  }

  TEST_CASE("distribute: urgency, windows, subscriptions, location") {
    PolicyConfig policy;
    std::vector<UserProfile> users{
        user("office", "valencia", {1, 2, 3}, {{Channel::Email, 9, 17}}),
        user("both", "valencia", {2, 3}, {{Channel::Html, 8, 12}, {Channel::Sms, 20, 24}}),
        user("urgent_only", "valencia", {3}, {{Channel::Email, 0, 24}}),
        user("elsewhere", "sagunto", {1, 2, 3}, {{Channel::Email, 0, 24}}),
    };
    std::map<std::string, std::string, std::less<>> where;
    // Code 3 at 4 a.m.: sms now, whatever the windows.
    auto d = distribute(AlarmType(3), "valencia", users, where, 4, policy, 24);
    REQUIRE(d.size() == 3);
    for (const auto& x : d) {
      CHECK(x.channel == Channel::Sms);
      CHECK_FALSE(x.delay_until);
    }
    // Code 2 inside the email window.
    CHECK(decide_channel(users[0], AlarmType(2), 10, policy, 24) == DeliveryDecision{"office", Channel::Email, std::nullopt});
    // Outside every window: first channel at its next start, possibly tomorrow.
    CHECK(decide_channel(users[0], AlarmType(1), 4, policy, 24) == DeliveryDecision{"office", Channel::Email, 9});
    CHECK(decide_channel(users[0], AlarmType(1), 30, policy, 24) == DeliveryDecision{"office", Channel::Email, 33});
    CHECK(decide_channel(users[1], AlarmType(2), 21, policy, 24) == DeliveryDecision{"both", Channel::Sms, std::nullopt});
    CHECK(decide_channel(users[1], AlarmType(2), 13, policy, 24) == DeliveryDecision{"both", Channel::Html, 32});
    // Unsubscribed users are absent; code 0 reaches nobody.
    d = distribute(AlarmType(1), "valencia", users, where, 10, policy, 24);
    REQUIRE(d.size() == 1);
    CHECK(d[0].user == "office");
    CHECK(distribute(AlarmType(0), "valencia", users, where, 10, policy, 24).empty());
    // Current location wins over the profile.
    where["elsewhere"] = "valencia";
    where["office"] = "gandia";
    d = distribute(AlarmType(1), "valencia", users, where, 10, policy, 24);
    REQUIRE(d.size() == 1);
    CHECK(d[0].user == "elsewhere");
  }

  TEST_CASE("distribution totality over random profiles") {
    std::mt19937_64 rng(5);
    const std::vector<std::string> locs{"a", "b", "c"};
    PolicyConfig policy;
    for (int round = 0; round < 200; ++round) {
      std::vector<UserProfile> users;
      std::map<std::string, std::string, std::less<>> where;
      for (int i = 0; i < 12; ++i) {
        std::set<int> alarms;
        for (int code = 1; code <= 3; ++code) {
          if (rng() % 2) alarms.insert(code);
        }
        int s = static_cast<int>(rng() % 20);
        users.push_back(user("u" + std::to_string(i), locs[rng() % 3], alarms,
                             {{static_cast<Channel>(rng() % 3), s, s + 1 + static_cast<int>(rng() % 4)}}));
        if (rng() % 3 == 0) where[users.back().id] = locs[rng() % 3];
      }
      AlarmType type(1 + static_cast<int>(rng() % 3));
      std::string loc = locs[rng() % 3];
      Tick tick = static_cast<Tick>(rng() % 100);
      auto d = distribute(type, loc, users, where, tick, policy, 24);
      std::map<std::string, int> got;
      for (const auto& x : d) {
        ++got[x.user];
        if (x.delay_until) CHECK(*x.delay_until >= tick);
      }
      for (const auto& u : users) {
        std::string at = where.count(u.id) ? where.at(u.id) : u.location;
        bool expected = u.subscribed_alarms.count(type.code()) && at == loc;
        CHECK(got[u.id] == (expected ? 1 : 0));
      }
    }
  }

  TEST_CASE("feedback_round") {
    ScenarioConfig c = default_config();
    c.feedback.institutional_fraction = 1.0;
    c.feedback.individual_accuracy = 1.0;
    FeedbackEvent ev{7, AlarmType(1), AlarmType(2), {"u01", "u02"}, 3};
    auto recs = feedback_round(ev, c);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].source == SourceKind::Institutional);
    CHECK(recs[0].verdict == Verdict::reject(AlarmType(2)));
    CHECK(recs[1].verdict == Verdict::reject(AlarmType(2)));
    ev.predicted = AlarmType(2);
    for (const auto& r : feedback_round(ev, c)) CHECK(r.verdict == Verdict::confirm());

    // Fraction 1, accuracy 1: every event labeled with the truth.
    Repository repo("", {c.schema(), c.policy.threshold});
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
      ObservationRecord o;
      o.location = "valencia";
      o.predicted = AlarmType(static_cast<int>(rng() % 4));
      EventId id = repo.record_observation(o);
      AlarmType truth(static_cast<int>(rng() % 4));
      for (const auto& r : feedback_round({id, o.predicted, truth, {"u01"}, 0}, c)) repo.record_feedback(r);
      REQUIRE(repo.find(id)->label);
      CHECK(repo.find(id)->label->value == truth);
    }

    // No review and fewer than K recipients: nothing gets labeled.
    c.feedback.institutional_fraction = 0;
    c.feedback.individual_accuracy = 0.9;
    Repository quiet("", {c.schema(), 5});
    for (int i = 0; i < 50; ++i) {
      ObservationRecord o;
      o.location = "valencia";
      EventId id = quiet.record_observation(o);
      for (const auto& r : feedback_round({id, AlarmType(0), AlarmType(3), {"a", "b", "c", "d"}, 0}, c)) {
        quiet.record_feedback(r);
      }
      CHECK_FALSE(quiet.find(id)->label);
    }
  }

  TEST_CASE("individual verdict accuracy and institutional review fraction") {
    std::size_t wrong = 0, reviewed = 0;
    const int n = 20000;
    for (int e = 0; e < n; ++e) {
      AlarmType truth(e % 4);
      Verdict v = individual_verdict(9, "u", static_cast<EventId>(e), truth, truth, 0.9);
      if (!v.correct) {
        ++wrong;
        CHECK(v.suggested != truth);
      }
      reviewed += institutional_review(9, static_cast<EventId>(e), 0.2) ? 1 : 0;
    }
    CHECK(std::abs(static_cast<double>(wrong) / n - 0.1) < 0.01);
    CHECK(std::abs(static_cast<double>(reviewed) / n - 0.2) < 0.01);
  }

  TEST_CASE("zero ticks gives empty metrics") {
    ScenarioConfig c = default_config();
    c.ticks = 0;
    SimulationReport r = run_simulation(c);
    CHECK(r.epochs.empty());
    CHECK(r.readings == 0);
    CHECK(r.observations == 0);
  }

  TEST_CASE("same seed gives identical report and transcript; transcript replays") {
    ScenarioConfig c = default_config();
    c.ticks = 60;
    std::ostringstream t1, t2;
    std::vector<DeliveryRecord> deliveries;
    SimulationReport a = run_simulation(c, {&t1, &deliveries});
    SimulationReport b = run_simulation(c, {&t2, nullptr});
    CHECK(format_report(a) == format_report(b));
    CHECK(t1.str() == t2.str());
    CHECK(a.readings == 60 * 25 * 3);
    CHECK(a.deliveries == deliveries.size());
    for (const auto& d : deliveries) {
      if (d.type.code() >= c.policy.urgent_threshold) {
        CHECK(d.channel == Channel::Sms);
        CHECK_FALSE(d.delayed);
      }
    }
    for (const auto& m : a.epochs) {
      std::size_t rows = 0;
      for (const auto& row : m.confusion) {
        for (auto v : row) rows += v;
      }
      CHECK(rows == m.events());
      CHECK(m.grid_total == 27);
    }

    std::istringstream in(t1.str());
    CHECK_NOTHROW(replay_transcript(in));

    std::string tampered = t1.str();
    auto at = tampered.find("sensorReadings");
    REQUIRE(at != std::string::npos);
    tampered.replace(at, 6, "SENSOR");
    std::istringstream bad(tampered);
    try {
      replay_transcript(bad);
      FAIL("tampered transcript replayed");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::TranscriptMismatch);
    }

    c.seed = 2;
    CHECK(format_report(run_simulation(c)) != format_report(a));
  }

  TEST_CASE("learning monotonicity over the first three retraining epochs") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      ScenarioConfig c = convergence_config(seed);
      SimulationReport r = run_simulation(c);
      for (const auto& loc : c.locations()) {
        const EpochMetrics* e1 = r.find(loc, 1);
        REQUIRE_MESSAGE(e1 != nullptr, "seed " << seed << " " << loc);
        double prev = e1->grid_rate();
        for (int epoch = 2; epoch <= 3; ++epoch) {
          const EpochMetrics* e = r.find(loc, epoch);
          if (e == nullptr) break;
          CHECK_MESSAGE(e->grid_rate() >= prev, "seed " << seed << " " << loc << " epoch " << epoch);
          prev = e->grid_rate();
        }
      }
    }
  }
}

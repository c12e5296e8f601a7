#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "academy/error.hpp"
#include "academy/repository.hpp"
#include "temp_dir.hpp"

using namespace academy;

namespace {

RepositoryConfig config(int k = 5) {
  return {{{"NO2NO3", {"low", "normal", "high"}}, {"ozone", {"low", "normal", "high"}}}, k};
}

ObservationRecord obs(std::string location, int pred, double ozone = 55.5, std::string cat = "normal") {
  ObservationRecord r;
  r.tick = 1;
  r.location = std::move(location);
  r.raw = {{"NO2NO3", 10.25}, {"ozone", ozone}};
  r.categories = {{"NO2NO3", "low"}, {"ozone", std::move(cat)}};
  r.predicted = AlarmType(pred);
  return r;
}

FeedbackRecord individual(EventId e, std::string user, Verdict v) { return {e, SourceKind::Individual, std::move(user), v, 2}; }
FeedbackRecord institutional(EventId e, Verdict v, std::string by = "civil_protection") {
  return {e, SourceKind::Institutional, std::move(by), v, 2};
}

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

Errc error_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::StorageFailure;
}

}  // namespace

TEST_SUITE("repository") {
  TEST_CASE("record_observation assigns increasing ids from 1") {
    Repository repo("", config());
    CHECK(repo.record_observation(obs("valencia", 0)) == 1);
    EventId last = 1;
    for (int i = 0; i < 99; ++i) {
      EventId id = repo.record_observation(obs("valencia", 0));
      CHECK(id > last);
      last = id;
    }
    CHECK(last == 100);
  }

  TEST_CASE("replay after 100 appends reproduces the index") {
    TempDir dir;
    auto path = dir.path / "aur.log";
    RepositoryIndex before;
    {
      Repository repo(path, config());
      for (int i = 0; i < 100; ++i) repo.record_observation(obs(i % 2 ? "valencia" : "gandia", i % 4, 40.0 + i * 0.1));
      before = repo.index();
    }
    CHECK(Repository::replay(path) == before);
    Repository reopened(path);
    CHECK(reopened.index() == before);
    CHECK(reopened.config() == config());
    CHECK(reopened.record_observation(obs("valencia", 0)) == 101);
  }

  TEST_CASE("reals survive the log byte-exactly") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 55.000000000000007, 0.0}) {
      CHECK(parse_real(format_real(v)) == v);
    }
  }

  TEST_CASE("threshold: K-1 individual verdicts do nothing, the K-th relabels") {
    Repository repo("", config(5));
    EventId e = repo.record_observation(obs("valencia", 3));
    for (int i = 0; i < 4; ++i) CHECK_FALSE(repo.record_feedback(individual(e, "u" + std::to_string(i), Verdict::reject(AlarmType(2)))));
    CHECK_FALSE(repo.find(e)->label.has_value());
    CHECK(repo.record_feedback(individual(e, "u4", Verdict::reject(AlarmType(2)))) == AlarmType(2));
    CHECK(repo.find(e)->label == Label{AlarmType(2), SourceKind::Individual});
  }

  TEST_CASE("confirmations count toward the predicted label") {
    Repository repo("", config(2));
    EventId e = repo.record_observation(obs("valencia", 1));
    CHECK_FALSE(repo.record_feedback(individual(e, "a", Verdict::confirm())));
    CHECK_FALSE(repo.record_feedback(individual(e, "b", Verdict::reject(AlarmType(2)))));
    CHECK(repo.record_feedback(individual(e, "c", Verdict::reject(AlarmType(1)))) == AlarmType(1));
  }

  TEST_CASE("institutional verdicts label immediately and take precedence") {
    Repository repo("", config(1));
    EventId e = repo.record_observation(obs("valencia", 3));
    CHECK(repo.record_feedback(institutional(e, Verdict::reject(AlarmType(0)))) == AlarmType(0));
    CHECK(repo.find(e)->label == Label{AlarmType(0), SourceKind::Institutional});
    CHECK_FALSE(repo.record_feedback(individual(e, "u1", Verdict::reject(AlarmType(2)))));
    CHECK(repo.find(e)->label == Label{AlarmType(0), SourceKind::Institutional});

    EventId c = repo.record_observation(obs("valencia", 2));
    CHECK(repo.record_feedback(institutional(c, Verdict::confirm())) == AlarmType(2));
  }

  TEST_CASE("feedback errors") {
    Repository repo("", config());
    EventId e = repo.record_observation(obs("valencia", 0));
    CHECK(error_of([&] { repo.record_feedback(individual(99, "u", Verdict::confirm())); }) == Errc::UnknownEvent);
    repo.record_feedback(individual(e, "u", Verdict::confirm()));
    CHECK(error_of([&] { repo.record_feedback(individual(e, "u", Verdict::confirm())); }) == Errc::DuplicateFeedback);
    // The same id under another source kind is a different voter.
    CHECK_NOTHROW(repo.record_feedback(institutional(e, Verdict::confirm(), "u")));
  }

  TEST_CASE("query_examples: labeled rows of one location") {
    Repository repo("", config(1));
    CHECK(repo.query_examples("valencia").examples.empty());
    EventId a = repo.record_observation(obs("valencia", 1));
    repo.record_observation(obs("valencia", 2));
    EventId c = repo.record_observation(obs("gandia", 3));
    repo.record_feedback(individual(a, "u", Verdict::reject(AlarmType(0))));
    repo.record_feedback(institutional(c, Verdict::confirm()));
    Dataset ds = repo.query_examples("valencia");
    REQUIRE(ds.examples.size() == 1);
    CHECK(ds.examples[0].label == AlarmType(0));
    CHECK(ds.examples[0].attributes.at("ozone") == "normal");
    CHECK(ds.schema == config().schema);
    CHECK(repo.query_examples("gandia").examples.size() == 1);
    CHECK(repo.locations() == std::vector<std::string>{"gandia", "valencia"});
  }

  TEST_CASE("compact") {
    TempDir dir;
    auto path = dir.path / "aur.log";
    {
      Repository empty(path, config());
      empty.compact();
    }
    CHECK(line_count(path) == 1);  // header only
    std::filesystem::remove(path);
    Repository fresh(path, config(3));
    for (int i = 0; i < 20; ++i) fresh.record_observation(obs("valencia", i % 4));
    fresh.record_sensed({1, "st01", "valencia", "ozone", 12.5, "ok"});
    fresh.record_feedback(institutional(2, Verdict::reject(AlarmType(1))));
    fresh.record_feedback(individual(3, "a", Verdict::reject(AlarmType(2))));
    fresh.record_feedback(individual(3, "b", Verdict::reject(AlarmType(2))));
    auto before = fresh.index();
    fresh.compact();
    CHECK(fresh.index() == before);
    CHECK(Repository::replay(path) == before);
    CHECK(line_count(path) == 1 + before.observations.size());
    // Pending votes survive: a third concordant verdict still relabels.
    CHECK(fresh.record_feedback(individual(3, "c", Verdict::reject(AlarmType(2)))) == AlarmType(2));
    CHECK(Repository::replay(path) == fresh.index());
  }

  TEST_CASE("corrupt logs are reported") {
    TempDir dir;
    auto path = dir.path / "bad.log";
    {
      std::ofstream out(path);
      out << "(obs :id 1)\n";
    }
    CHECK(error_of([&] { Repository r(path); }) == Errc::CorruptLog);
    CHECK(error_of([&] { Repository r(dir.path / "missing.log"); }) == Errc::StorageFailure);
    {
      Repository r(dir.path / "k.log", config(5));
    }
    CHECK(error_of([&] { Repository r(dir.path / "k.log", config(3)); }) == Errc::CorruptLog);
  }

  TEST_CASE("property: institutional precedence and threshold monotonicity") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
      int k = 1 + static_cast<int>(rng() % 6);
      Repository repo("", config(k));
      EventId e = repo.record_observation(obs("valencia", static_cast<int>(rng() % 4)));
      bool institutional_done = false;
      AlarmType inst_label;
      std::map<int, int> tallies;
      int voters = 0;
      for (int step = 0; step < 25; ++step) {
        if (!institutional_done && rng() % 10 == 0) {
          AlarmType v(static_cast<int>(rng() % 4));
          CHECK(repo.record_feedback(institutional(e, Verdict::reject(v))).has_value() ==
                !(repo.find(e)->label == Label{v, SourceKind::Institutional}));
          institutional_done = true;
          inst_label = v;
          continue;
        }
        AlarmType v(static_cast<int>(rng() % 4));
        auto before = repo.find(e)->label;
        auto change = repo.record_feedback(individual(e, "u" + std::to_string(voters++), Verdict::reject(v)));
        int count = ++tallies[v.code()];
        if (institutional_done) {
          CHECK_FALSE(change.has_value());
          CHECK(repo.find(e)->label == Label{inst_label, SourceKind::Institutional});
        } else if (count == k && !(before == std::optional<Label>(Label{v, SourceKind::Individual}))) {
          CHECK(change == v);
        } else {
          CHECK(repo.find(e)->label == before);
        }
      }
    }
  }
}

#include "academy/repository.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <system_error>

#include "academy/error.hpp"
#include "academy/sl.hpp"

namespace academy {

namespace {

using sl::Node;

constexpr int kLogVersion = 1;

Node kw(std::string_view name) { return Node::keyword(std::string(name)); }
Node sym(std::string_view text) { return Node::atom(std::string(text)); }

[[noreturn]] void corrupt(std::size_t line_no, const std::string& why) {
  throw Error(Errc::CorruptLog, "line " + std::to_string(line_no) + ": " + why);
}

const Node& field(const Node& rec, std::string_view key, std::size_t line_no) {
  const Node* v = sl::keyword_value(rec, key);
  if (v == nullptr) corrupt(line_no, "missing :" + std::string(key));
  return *v;
}

std::string atom_field(const Node& rec, std::string_view key, std::size_t line_no) {
  const Node& v = field(rec, key, line_no);
  if (!v.is_atom()) corrupt(line_no, ":" + std::string(key) + " must be a symbol");
  return v.text();
}

template <typename Int>
Int int_field(const Node& rec, std::string_view key, std::size_t line_no) {
  std::string text = atom_field(rec, key, line_no);
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) corrupt(line_no, "bad integer in :" + std::string(key));
  return value;
}

SourceKind parse_source(const std::string& text, std::size_t line_no) {
  if (text == "individual") return SourceKind::Individual;
  if (text == "institutional") return SourceKind::Institutional;
  corrupt(line_no, "unknown source '" + text + "'");
}

Node schema_node(const std::vector<Attribute>& schema) {
  Node out = Node::list();
  for (const auto& a : schema) {
    Node entry = Node::list({sym(a.name)});
    for (const auto& c : a.domain) entry.push(sym(c));
    out.push(std::move(entry));
  }
  return out;
}

}  // namespace

std::string_view source_kind_name(SourceKind kind) noexcept {
  return kind == SourceKind::Individual ? "individual" : "institutional";
}

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error(Errc::StorageFailure, "cannot format real");
  return std::string(buf, ptr);
}

double parse_real(std::string_view text) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(Errc::CorruptLog, "bad real '" + std::string(text) + "'");
  }
  return value;
}

std::string header_line(const RepositoryConfig& config) {
  return sl::print(Node::list({sym("academyLog"), kw("version"), sym(std::to_string(kLogVersion)), kw("threshold"),
                               sym(std::to_string(config.threshold)), kw("schema"), schema_node(config.schema)}));
}

std::string observation_line(const ObservationRecord& rec, const std::vector<Vote>* votes) {
  Node raw = Node::list();
  for (const auto& [var, value] : rec.raw) raw.push(Node::list({sym(var), sym(format_real(value))}));
  Node cat = Node::list();
  for (const auto& [var, value] : rec.categories) cat.push(Node::list({sym(var), sym(value)}));
  Node out = Node::list({sym("obs"), kw("id"), sym(std::to_string(rec.event_id)), kw("tick"),
                         sym(std::to_string(rec.tick)), kw("location"), sym(rec.location), kw("raw"), std::move(raw),
                         kw("cat"), std::move(cat), kw("pred"), sym(rec.predicted.symbol()), kw("label"),
                         sym(rec.label ? rec.label->value.symbol() : "none"), kw("labelsrc"),
                         sym(rec.label ? source_kind_name(rec.label->source) : "none")});
  if (votes != nullptr && !votes->empty()) {
    Node v = Node::list();
    for (const auto& vote : *votes) {
      v.push(Node::list({sym(source_kind_name(vote.source)), sym(vote.source_id), sym(vote.suggested.symbol())}));
    }
    out.push(kw("votes"));
    out.push(std::move(v));
  }
  return sl::print(out);
}

std::string feedback_line(const FeedbackRecord& fb) {
  Node out = Node::list({sym("fb"), kw("event"), sym(std::to_string(fb.event_id)), kw("source"),
                         sym(source_kind_name(fb.source)), kw("by"), sym(fb.source_id), kw("verdict"),
                         sym(fb.verdict.correct ? "correct" : "incorrect")});
  if (!fb.verdict.correct) {
    out.push(kw("suggested"));
    out.push(sym(fb.verdict.suggested.symbol()));
  }
  out.push(kw("tick"));
  out.push(sym(std::to_string(fb.tick)));
  return sl::print(out);
}

std::string sensed_line(const SensedRecord& rec) {
  return sl::print(Node::list({sym("sensed"), kw("tick"), sym(std::to_string(rec.tick)), kw("station"), sym(rec.station),
                               kw("location"), sym(rec.location), kw("var"), sym(rec.variable), kw("value"),
                               sym(format_real(rec.value)), kw("status"), sym(rec.status)}));
}

std::string format_stats(const RepositoryStats& s) {
  std::ostringstream out;
  auto row = [&](std::string_view name, std::size_t value) {
    out << std::left << std::setw(25) << name << value << "\n";
  };
  row("observations", s.observations);
  row("labeled (individual)", s.labeled_individual);
  row("labeled (institutional)", s.labeled_institutional);
  row("unlabeled", s.observations - s.labeled_individual - s.labeled_institutional);
  row("feedback records", s.feedback_records);
  row("sensed records", s.sensed_records);
  if (!s.observations_by_location.empty()) {
    out << std::left << std::setw(25) << "location" << std::setw(14) << "observations" << "labeled\n";
    for (const auto& [loc, n] : s.observations_by_location) {
      auto labeled = s.labeled_by_location.find(loc);
      out << std::left << std::setw(25) << loc << std::setw(14) << n
          << (labeled == s.labeled_by_location.end() ? 0 : labeled->second) << "\n";
    }
  }
  return out.str();
}

Repository::Repository(std::filesystem::path path, RepositoryConfig config)
    : path_(std::move(path)), config_(std::move(config)) {
  if (config_.threshold < 1) throw Error(Errc::InvalidDataset, "feedback threshold must be at least 1");
  Dataset{config_.schema, {}}.validate();
  load(false);
}

Repository::Repository(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) {
    throw Error(Errc::StorageFailure, "no repository log at '" + path_.string() + "'");
  }
  load(true);
}

void Repository::load(bool take_config) {
  if (path_.empty()) return;
  bool saw_header = false;
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_);
    if (!in) throw Error(Errc::StorageFailure, "cannot read " + path_.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      apply_line(line, line_no, saw_header, take_config);
    }
  }
  if (!saw_header && take_config) throw Error(Errc::CorruptLog, path_.string() + " has no header");
  log_.open(path_, std::ios::app | std::ios::binary);
  if (!log_) throw Error(Errc::StorageFailure, "cannot open " + path_.string() + " for append");
  if (!saw_header) append(header_line(config_));
}

void Repository::apply_line(const std::string& line, std::size_t line_no, bool& saw_header, bool take_config) {
  Node rec = [&] {
    try {
      return sl::parse(line);
    } catch (const Error& e) {
      corrupt(line_no, e.what());
    }
  }();
  if (rec.has_head("academyLog")) {
    if (saw_header) corrupt(line_no, "duplicate header");
    saw_header = true;
    if (int_field<int>(rec, "version", line_no) != kLogVersion) corrupt(line_no, "unsupported log version");
    RepositoryConfig cfg;
    cfg.threshold = int_field<int>(rec, "threshold", line_no);
    for (const Node& entry : field(rec, "schema", line_no).children()) {
      if (!entry.is_list() || entry.children().empty()) corrupt(line_no, "bad schema entry");
      Attribute a{entry.children()[0].text(), {}};
      for (std::size_t i = 1; i < entry.children().size(); ++i) a.domain.push_back(entry.children()[i].text());
      cfg.schema.push_back(std::move(a));
    }
    if (take_config) {
      config_ = std::move(cfg);
    } else if (!(cfg == config_)) {
      throw Error(Errc::CorruptLog, path_.string() + " was written with a different schema or threshold");
    }
    return;
  }
  if (!saw_header) corrupt(line_no, "record before header");

  if (rec.has_head("sensed")) {
    ++counters_.sensed_records;
    return;
  }
  if (rec.has_head("obs")) {
    ObservationRecord obs;
    obs.event_id = int_field<EventId>(rec, "id", line_no);
    obs.tick = int_field<Tick>(rec, "tick", line_no);
    obs.location = atom_field(rec, "location", line_no);
    for (const Node& p : field(rec, "raw", line_no).children()) {
      if (p.children().size() != 2) corrupt(line_no, "bad :raw entry");
      obs.raw[p.children()[0].text()] = parse_real(p.children()[1].text());
    }
    for (const Node& p : field(rec, "cat", line_no).children()) {
      if (p.children().size() != 2) corrupt(line_no, "bad :cat entry");
      obs.categories[p.children()[0].text()] = p.children()[1].text();
    }
    obs.predicted = AlarmType::parse(atom_field(rec, "pred", line_no));
    std::string label = atom_field(rec, "label", line_no);
    if (label != "none") obs.label = Label{AlarmType::parse(label), parse_source(atom_field(rec, "labelsrc", line_no), line_no)};
    if (obs.event_id < next_id_) corrupt(line_no, "event ids must increase");
    if (const Node* votes = sl::keyword_value(rec, "votes")) {
      auto& dst = index_.votes[obs.event_id];
      for (const Node& v : votes->children()) {
        if (v.children().size() != 3) corrupt(line_no, "bad vote");
        dst.push_back({parse_source(v.children()[0].text(), line_no), v.children()[1].text(),
                       AlarmType::parse(v.children()[2].text())});
      }
    }
    next_id_ = obs.event_id + 1;
    ++counters_.observations;
    index_.observations.emplace(obs.event_id, std::move(obs));
    return;
  }
  if (rec.has_head("fb")) {
    FeedbackRecord fb;
    fb.event_id = int_field<EventId>(rec, "event", line_no);
    fb.source = parse_source(atom_field(rec, "source", line_no), line_no);
    fb.source_id = atom_field(rec, "by", line_no);
    std::string verdict = atom_field(rec, "verdict", line_no);
    if (verdict == "correct") {
      fb.verdict = Verdict::confirm();
    } else if (verdict == "incorrect") {
      fb.verdict = Verdict::reject(AlarmType::parse(atom_field(rec, "suggested", line_no)));
    } else {
      corrupt(line_no, "unknown verdict '" + verdict + "'");
    }
    fb.tick = int_field<Tick>(rec, "tick", line_no);
    try {
      apply_feedback(fb);
    } catch (const Error& e) {
      corrupt(line_no, e.what());
    }
    ++counters_.feedback_records;
    return;
  }
  corrupt(line_no, "unknown record " + line.substr(0, 40));
}

void Repository::append(const std::string& line) {
  if (path_.empty()) return;
  log_ << line << '\n';
  log_.flush();
  if (!log_) throw Error(Errc::StorageFailure, "cannot append to " + path_.string());
}

EventId Repository::record_observation(ObservationRecord rec) {
  std::lock_guard lock(mu_);
  rec.event_id = next_id_;
  append(observation_line(rec));
  ++next_id_;
  ++counters_.observations;
  EventId id = rec.event_id;
  index_.observations.emplace(id, std::move(rec));
  return id;
}

LabelChange Repository::apply_feedback(const FeedbackRecord& fb) {
  auto obs_it = index_.observations.find(fb.event_id);
  if (obs_it == index_.observations.end()) throw Error(Errc::UnknownEvent, std::to_string(fb.event_id));
  ObservationRecord& obs = obs_it->second;
  auto& votes = index_.votes[fb.event_id];
  bool duplicate = std::any_of(votes.begin(), votes.end(), [&](const Vote& v) {
    return v.source == fb.source && v.source_id == fb.source_id;
  });
  if (duplicate) {
    throw Error(Errc::DuplicateFeedback, "event " + std::to_string(fb.event_id) + " already has feedback from " +
                                             fb.source_id);
  }
  AlarmType suggested = fb.verdict.correct ? obs.predicted : fb.verdict.suggested;
  votes.push_back({fb.source, fb.source_id, suggested});

  std::optional<Label> next = obs.label;
  if (fb.source == SourceKind::Institutional) {
    next = Label{suggested, SourceKind::Institutional};
  } else if (!(obs.label && obs.label->source == SourceKind::Institutional)) {
    auto concordant = std::count_if(votes.begin(), votes.end(), [&](const Vote& v) {
      return v.source == SourceKind::Individual && v.suggested == suggested;
    });
    if (concordant == config_.threshold) next = Label{suggested, SourceKind::Individual};
  }
  if (next == obs.label) return std::nullopt;
  obs.label = next;
  return next->value;
}

LabelChange Repository::record_feedback(const FeedbackRecord& fb) {
  std::lock_guard lock(mu_);
  // A rejected verdict must never reach the log.
  auto obs_it = index_.observations.find(fb.event_id);
  if (obs_it == index_.observations.end()) throw Error(Errc::UnknownEvent, std::to_string(fb.event_id));
  auto votes_it = index_.votes.find(fb.event_id);
  if (votes_it != index_.votes.end()) {
    for (const Vote& v : votes_it->second) {
      if (v.source == fb.source && v.source_id == fb.source_id) {
        throw Error(Errc::DuplicateFeedback, "event " + std::to_string(fb.event_id) + " already has feedback from " +
                                                 fb.source_id);
      }
    }
  }
  append(feedback_line(fb));
  ++counters_.feedback_records;
  return apply_feedback(fb);
}

void Repository::record_sensed(const SensedRecord& rec) {
  std::lock_guard lock(mu_);
  append(sensed_line(rec));
  ++counters_.sensed_records;
}

Dataset Repository::query_examples(std::string_view location) const {
  std::lock_guard lock(mu_);
  Dataset ds{config_.schema, {}};
  for (const auto& [id, obs] : index_.observations) {
    if (obs.location != location || !obs.label) continue;
    TrainingExample ex{{}, obs.label->value};
    for (const auto& attr : config_.schema) {
      auto it = obs.categories.find(attr.name);
      if (it == obs.categories.end()) {
        throw Error(Errc::InvalidDataset, "event " + std::to_string(id) + " lacks " + attr.name);
      }
      ex.attributes.emplace(attr.name, it->second);
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

void Repository::compact() {
  std::lock_guard lock(mu_);
  counters_.sensed_records = 0;
  counters_.feedback_records = 0;
  if (path_.empty()) return;
  auto tmp = path_;
  tmp += ".compact";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    out << header_line(config_) << '\n';
    for (const auto& [id, obs] : index_.observations) {
      auto votes = index_.votes.find(id);
      out << observation_line(obs, votes == index_.votes.end() ? nullptr : &votes->second) << '\n';
    }
    out.flush();
    if (!out) throw Error(Errc::StorageFailure, "cannot write " + tmp.string());
  }
  log_.close();
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  log_.open(path_, std::ios::app | std::ios::binary);
  if (ec) throw Error(Errc::StorageFailure, "cannot replace " + path_.string() + ": " + ec.message());
  if (!log_) throw Error(Errc::StorageFailure, "cannot reopen " + path_.string());
}

std::optional<ObservationRecord> Repository::find(EventId id) const {
  std::lock_guard lock(mu_);
  auto it = index_.observations.find(id);
  if (it == index_.observations.end()) return std::nullopt;
  return it->second;
}

RepositoryIndex Repository::index() const {
  std::lock_guard lock(mu_);
  RepositoryIndex out = index_;
  // Events with no votes are indistinguishable from events never voted on.
  std::erase_if(out.votes, [](const auto& kv) { return kv.second.empty(); });
  return out;
}

RepositoryStats Repository::stats() const {
  std::lock_guard lock(mu_);
  RepositoryStats s = counters_;
  for (const auto& [id, obs] : index_.observations) {
    ++s.observations_by_location[obs.location];
    if (!obs.label) continue;
    ++s.labeled_by_location[obs.location];
    if (obs.label->source == SourceKind::Individual) {
      ++s.labeled_individual;
    } else {
      ++s.labeled_institutional;
    }
  }
  return s;
}

std::vector<std::string> Repository::locations() const {
  std::lock_guard lock(mu_);
  std::set<std::string> locs;
  for (const auto& [id, obs] : index_.observations) locs.insert(obs.location);
  return {locs.begin(), locs.end()};
}

RepositoryIndex Repository::replay(const std::filesystem::path& path) { return Repository(path).index(); }

}  // namespace academy

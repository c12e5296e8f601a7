#include "academy/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "academy/error.hpp"
#include "academy/sl.hpp"

namespace academy {

namespace {

using boost::property_tree::ptree;

[[noreturn]] void config_error(const std::string& path, const std::string& why) {
  throw Error(Errc::ConfigError, path + ": " + why);
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    std::string piece = trim(s.substr(start, end - start));
    if (!piece.empty()) out.push_back(std::move(piece));
    start = end + 1;
  }
  return out;
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double to_real(const std::string& text, const std::string& path) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) config_error(path, "expected a number, got '" + text + "'");
  return v;
}

template <typename Int>
Int to_int(const std::string& text, const std::string& path) {
  Int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) config_error(path, "expected an integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& text, const std::string& path) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  config_error(path, "expected true or false, got '" + text + "'");
}

Range to_range(const std::string& text, const std::string& path) {
  auto parts = words(text);
  if (parts.size() != 2) config_error(path, "expected two numbers 'min max'");
  Range r{to_real(parts[0], path), to_real(parts[1], path)};
  if (!(r.min <= r.max)) config_error(path, "min must not exceed max");
  return r;
}

void check_unit(double v, const std::string& path, bool allow_one = true) {
  if (!(v >= 0.0 && (allow_one ? v <= 1.0 : v < 1.0))) {
    config_error(path, allow_one ? "must lie in [0, 1]" : "must lie in [0, 1)");
  }
}

// Reads the keys of one section, rejecting any not in `allowed`.
class Section {
 public:
  Section(std::string name, const ptree& tree) : name_(std::move(name)), tree_(tree) {}

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& [key, _] : tree_) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) config_error(path(key), "unknown key");
    }
  }
  std::optional<std::string> get(std::string_view key) const {
    auto v = tree_.get_child_optional(ptree::path_type(std::string(key), '\0'));
    if (!v) return std::nullopt;
    return trim(v->data());
  }
  std::string require(std::string_view key) const {
    auto v = get(key);
    if (!v) config_error(path(key), "missing");
    return *v;
  }
  std::string path(std::string_view key) const { return name_ + "." + std::string(key); }
  const ptree& tree() const { return tree_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  const ptree& tree_;
};

ChannelWindow to_window(const std::string& text, const std::string& path, int day_length) {
  auto colon = text.find(':');
  auto dash = text.find('-', colon == std::string::npos ? 0 : colon);
  if (colon == std::string::npos || dash == std::string::npos) config_error(path, "expected channel:start-end");
  std::string name = trim(text.substr(0, colon));
  ChannelWindow w;
  if (name == "email") {
    w.channel = Channel::Email;
  } else if (name == "sms") {
    w.channel = Channel::Sms;
  } else if (name == "html") {
    w.channel = Channel::Html;
  } else {
    config_error(path, "unknown channel '" + name + "'");
  }
  w.start = to_int<int>(trim(text.substr(colon + 1, dash - colon - 1)), path);
  w.end = to_int<int>(trim(text.substr(dash + 1)), path);
  if (!(0 <= w.start && w.start < w.end && w.end <= day_length)) {
    config_error(path, "window must satisfy 0 <= start < end <= day_length");
  }
  return w;
}

void read_simulation(const Section& s, ScenarioConfig& cfg) {
  s.allow({"seed", "ticks", "day_length", "regime_stay", "fault_prob", "mobility", "log"});
  if (auto v = s.get("seed")) cfg.seed = to_int<std::uint64_t>(*v, s.path("seed"));
  if (auto v = s.get("ticks")) cfg.ticks = to_int<Tick>(*v, s.path("ticks"));
  if (cfg.ticks < 0) config_error(s.path("ticks"), "must be non-negative");
  if (auto v = s.get("day_length")) cfg.day_length = to_int<int>(*v, s.path("day_length"));
  if (cfg.day_length < 1) config_error(s.path("day_length"), "must be positive");
  if (auto v = s.get("regime_stay")) cfg.regime_stay = to_real(*v, s.path("regime_stay"));
  check_unit(cfg.regime_stay, s.path("regime_stay"));
  if (auto v = s.get("fault_prob")) cfg.fault_prob = to_real(*v, s.path("fault_prob"));
  check_unit(cfg.fault_prob, s.path("fault_prob"), false);
  if (auto v = s.get("mobility")) cfg.mobility = to_real(*v, s.path("mobility"));
  check_unit(cfg.mobility, s.path("mobility"));
  if (auto v = s.get("log")) cfg.log_path = *v;
}

void read_stations(const Section& s, ScenarioConfig& cfg) {
  auto count = s.get("count");
  if (count) {
    s.allow({"count", "locations"});
    int n = to_int<int>(*count, s.path("count"));
    if (n < 1) config_error(s.path("count"), "must be positive");
    auto locs = split(s.require("locations"), ',');
    if (locs.empty()) config_error(s.path("locations"), "needs at least one location");
    int width = n >= 100 ? 3 : 2;
    for (int i = 0; i < n; ++i) {
      std::string id = std::to_string(i + 1);
      id.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(id.size()))), '0');
      cfg.stations.push_back({"st" + id, locs[static_cast<std::size_t>(i) % locs.size()]});
    }
  } else {
    for (const auto& [key, value] : s.tree()) cfg.stations.push_back({key, trim(value.data())});
  }
  for (const auto& st : cfg.stations) {
    if (!sl::is_valid_atom(st.id) || !sl::is_valid_atom(st.location)) {
      config_error(s.path(st.id), "station ids and locations must be symbols");
    }
  }
}

void read_variable(const Section& s, const std::string& name, ScenarioConfig& cfg) {
  s.allow({"bounds", "thresholds", "low", "normal", "high"});
  if (!sl::is_valid_atom(name)) config_error(s.name(), "variable name must be a symbol");
  VariableConfig v;
  v.name = name;
  v.bounds = to_range(s.require("bounds"), s.path("bounds"));
  Range t = to_range(s.require("thresholds"), s.path("thresholds"));
  if (!(t.min < t.max)) config_error(s.path("thresholds"), "must satisfy low < high");
  v.thresholds = {t.min, t.max};
  v.low = to_range(s.require("low"), s.path("low"));
  v.normal = to_range(s.require("normal"), s.path("normal"));
  v.high = to_range(s.require("high"), s.path("high"));
  // Readings drawn from a regime must discretize back to that regime.
  if (!(v.low.max < t.min)) config_error(s.path("low"), "must lie below the low threshold");
  if (!(v.normal.min >= t.min && v.normal.max <= t.max)) config_error(s.path("normal"), "must lie within the thresholds");
  if (!(v.high.min > t.max)) config_error(s.path("high"), "must lie above the high threshold");
  for (const Range* r : {&v.low, &v.normal, &v.high}) {
    if (r->min < v.bounds.min || r->max > v.bounds.max) config_error(s.path("bounds"), "regime ranges must lie within bounds");
  }
  cfg.variables.push_back(std::move(v));
}

void read_policy(const Section& s, ScenarioConfig& cfg) {
  s.allow({"K", "W", "epsilon", "R", "urgent_threshold"});
  auto& p = cfg.policy;
  if (auto v = s.get("K")) p.threshold = to_int<int>(*v, s.path("K"));
  if (p.threshold < 1) config_error(s.path("K"), "must be at least 1");
  if (auto v = s.get("W")) p.window = to_int<int>(*v, s.path("W"));
  if (p.window < 0) config_error(s.path("W"), "must be non-negative");
  if (auto v = s.get("epsilon")) p.epsilon = to_real(*v, s.path("epsilon"));
  check_unit(p.epsilon, s.path("epsilon"));
  if (auto v = s.get("R")) p.retrain_every = to_int<int>(*v, s.path("R"));
  if (p.retrain_every < 1) config_error(s.path("R"), "must be at least 1");
  if (auto v = s.get("urgent_threshold")) p.urgent_threshold = to_int<int>(*v, s.path("urgent_threshold"));
  if (p.urgent_threshold < 1 || p.urgent_threshold > AlarmType::kMaxCode) {
    config_error(s.path("urgent_threshold"), "must be an alarm code in [1, 3]");
  }
}

void read_feedback(const Section& s, ScenarioConfig& cfg) {
  s.allow({"institutional_fraction", "individual_accuracy", "authority"});
  auto& f = cfg.feedback;
  if (auto v = s.get("institutional_fraction")) f.institutional_fraction = to_real(*v, s.path("institutional_fraction"));
  check_unit(f.institutional_fraction, s.path("institutional_fraction"));
  if (auto v = s.get("individual_accuracy")) f.individual_accuracy = to_real(*v, s.path("individual_accuracy"));
  check_unit(f.individual_accuracy, s.path("individual_accuracy"));
  if (auto v = s.get("authority")) f.authority = *v;
  if (!sl::is_valid_atom(f.authority)) config_error(s.path("authority"), "must be a symbol");
}

void read_user(const Section& s, const std::string& id, ScenarioConfig& cfg) {
  s.allow({"location", "alarms", "mobile", "channels", "roam"});
  if (!sl::is_valid_atom(id)) config_error(s.name(), "user id must be a symbol");
  UserProfile u;
  u.id = id;
  u.location = s.require("location");
  for (const auto& w : words(s.require("alarms"))) {
    int code = to_int<int>(w, s.path("alarms"));
    if (code < 1 || code > AlarmType::kMaxCode) config_error(s.path("alarms"), "alarm codes must lie in [1, 3]");
    u.subscribed_alarms.insert(code);
  }
  if (auto v = s.get("mobile")) u.mobile = to_bool(*v, s.path("mobile"));
  for (const auto& w : split(s.require("channels"), ',')) u.channels.push_back(to_window(w, s.path("channels"), cfg.day_length));
  if (u.channels.empty()) config_error(s.path("channels"), "needs at least one channel");
  if (auto v = s.get("roam")) u.roam = split(*v, ',');
  if (u.mobile && u.roam.empty()) u.roam = {u.location};
  cfg.users.push_back(std::move(u));
}

void read_ontology(const Section& s, const std::string& name, ScenarioConfig& cfg) {
  s.allow({"terms"});
  Ontology o{name, {}};
  for (auto& t : split(s.require("terms"), ',')) o.terms.insert(std::move(t));
  cfg.ontologies.push_back(std::move(o));
}

void read_map(const Section& s, const std::vector<std::string>& names, ScenarioConfig& cfg) {
  if (names.size() != 2) config_error(s.name(), "expected [map <from> <to>]");
  TermMap m{names[0], names[1], {}};
  for (const auto& [key, value] : s.tree()) m.pairs.emplace_back(trim(key), trim(value.data()));
  cfg.term_maps.push_back(std::move(m));
}

void validate(ScenarioConfig& cfg) {
  if (cfg.stations.empty()) config_error("stations", "no stations configured");
  if (cfg.variables.empty()) config_error("variable", "no variables configured");
  auto locs = cfg.locations();
  auto known = [&](const std::string& loc) { return std::binary_search(locs.begin(), locs.end(), loc); };
  for (const auto& u : cfg.users) {
    if (!known(u.location)) config_error("user " + u.id + ".location", "unknown location '" + u.location + "'");
    for (const auto& r : u.roam) {
      if (!known(r)) config_error("user " + u.id + ".roam", "unknown location '" + r + "'");
    }
  }
  try {
    validate_tree(cfg.hidden_truth, cfg.schema());
  } catch (const Error& e) {
    config_error("truth.tree", e.what());
  }
  try {
    OntologyService svc;
    for (const auto& o : cfg.ontologies) svc.register_ontology(o);
    for (const auto& m : cfg.term_maps) svc.register_map(m);
    if (!cfg.ontologies.empty() && !svc.has(cfg.shared_ontology)) {
      config_error("agents.ontology", "unknown ontology '" + cfg.shared_ontology + "'");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    config_error("ontology", e.what());
  }
}

}  // namespace

std::string_view channel_name(Channel c) noexcept {
  switch (c) {
    case Channel::Email: return "email";
    case Channel::Sms: return "sms";
    case Channel::Html: return "html";
  }
  return "email";
}

std::vector<std::string> ScenarioConfig::locations() const {
  std::vector<std::string> out;
  for (const auto& s : stations) out.push_back(s.location);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Attribute> ScenarioConfig::schema() const {
  std::vector<Attribute> out;
  for (const auto& v : variables) out.push_back({v.name, {std::string(kLow), std::string(kNormal), std::string(kHigh)}});
  return out;
}

Discretizer ScenarioConfig::discretizer() const {
  Discretizer d;
  for (const auto& v : variables) d.set(v.name, v.thresholds);
  return d;
}

const VariableConfig* ScenarioConfig::variable(std::string_view name) const {
  auto it = std::find_if(variables.begin(), variables.end(), [&](const VariableConfig& v) { return v.name == name; });
  return it == variables.end() ? nullptr : &*it;
}

ScenarioConfig parse_config(std::string_view text) {
  ptree root;
  try {
    std::istringstream in{std::string(text)};
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    config_error("line " + std::to_string(e.line()), e.message());
  }

  ScenarioConfig cfg;
  cfg.source = std::string(text);
  bool saw_truth = false;

  // [simulation] first: day_length is needed to validate user windows.
  if (auto sim = root.get_child_optional(ptree::path_type("simulation", '\0'))) read_simulation(Section("simulation", *sim), cfg);

  for (const auto& [raw_name, body] : root) {
    if (!body.data().empty() && body.empty()) config_error(raw_name, "key outside of any section");
    auto name_words = words(raw_name);
    if (name_words.empty()) config_error(raw_name, "empty section name");
    const std::string& kind = name_words[0];
    Section s(raw_name, body);
    auto rest = std::vector<std::string>(name_words.begin() + 1, name_words.end());
    if (kind == "simulation" && rest.empty()) {
      continue;
    } else if (kind == "stations" && rest.empty()) {
      read_stations(s, cfg);
    } else if (kind == "variable" && rest.size() == 1) {
      read_variable(s, rest[0], cfg);
    } else if (kind == "truth" && rest.empty()) {
      s.allow({"tree"});
      try {
        cfg.hidden_truth = tree_from_sl(sl::parse(s.require("tree")));
      } catch (const Error& e) {
        if (e.code() == Errc::ConfigError) throw;
        config_error(s.path("tree"), e.what());
      }
      saw_truth = true;
    } else if (kind == "policy" && rest.empty()) {
      read_policy(s, cfg);
    } else if (kind == "feedback" && rest.empty()) {
      read_feedback(s, cfg);
    } else if (kind == "agents" && rest.empty()) {
      s.allow({"ontology"});
      if (auto v = s.get("ontology")) cfg.shared_ontology = *v;
    } else if (kind == "user" && rest.size() == 1) {
      read_user(s, rest[0], cfg);
    } else if (kind == "ontology" && rest.size() == 1) {
      read_ontology(s, rest[0], cfg);
    } else if (kind == "map") {
      read_map(s, rest, cfg);
    } else {
      config_error(raw_name, "unknown section");
    }
  }
  if (!saw_truth) config_error("truth.tree", "missing");
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigError, path.string() + ": cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace academy

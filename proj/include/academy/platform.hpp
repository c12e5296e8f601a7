#pragma once

// In-process agent platform: directory, mailboxes, schedulers and the
// training protocol (agentsToBeTrained -> loadClass -> addRule).

#include <atomic>
#include <compare>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "academy/error.hpp"
#include "academy/frames.hpp"
#include "academy/repository.hpp"
#include "academy/rules.hpp"
#include "academy/sl.hpp"

namespace academy {

enum class Performative { Request, Inform, Failure };

std::string_view performative_name(Performative p) noexcept;
Performative parse_performative(std::string_view text);

struct AgentId {
  std::string name;
  friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

struct Envelope {
  Performative performative = Performative::Inform;
  std::string sender;
  std::string receiver;
  std::string ontology;
  std::string content;  // canonical SL
  friend bool operator==(const Envelope&, const Envelope&) = default;
};

struct DeliveryReceipt {
  std::uint64_t sequence = 0;  // global send order, starting at 1
};

// "tick sender receiver performative ontology content"
std::string transcript_line(Tick tick, const Envelope& env);

// Failure replies carry (error :code <Errc> :message "...").
sl::Node error_content(Errc code, std::string_view message);

inline constexpr std::string_view kTrainingOntology = "AgentAcademy";
inline constexpr std::string_view kAtmName = "atm";
inline constexpr std::string_view kFactoryName = "factory";

struct AgentSpec {
  std::string name;
  std::string agent_type;
  std::vector<std::string> behaviors;
  std::string ontology;
};

class Agent;
class Platform;

struct AgentContext {
  Platform& platform;
  Agent& self;

  void send(Performative performative, std::string_view receiver, std::string_view ontology, const sl::Node& content);
  void reply(const Envelope& to, Performative performative, const sl::Node& content);
  Tick tick() const;
};

class Behavior {
 public:
  virtual ~Behavior() = default;
  // Returns true when the message was consumed.
  virtual bool handle(AgentContext& ctx, const Envelope& env, const sl::Node& content) = 0;
};

using BehaviorFactory = std::function<std::unique_ptr<Behavior>()>;

// Closed set of behavior classes an agent may load by name.
class BehaviorRegistry {
 public:
  // Throws DuplicateName.
  void add(std::string class_name, BehaviorFactory factory);
  bool has(std::string_view class_name) const;
  // Throws UnknownBehavior.
  std::unique_ptr<Behavior> create(std::string_view class_name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, BehaviorFactory, std::less<>> factories_;
};

class Agent {
 public:
  Agent(AgentSpec spec) : spec_(std::move(spec)) {}

  const std::string& name() const noexcept { return spec_.name; }
  const std::string& agent_type() const noexcept { return spec_.agent_type; }
  const std::string& ontology() const noexcept { return spec_.ontology; }
  const AgentSpec& spec() const noexcept { return spec_; }

  const std::vector<std::string>& behavior_names() const noexcept { return behavior_names_; }
  const RuleBase& rules() const noexcept { return rules_; }
  // Number of successful addRule installs so far.
  int rule_epoch() const noexcept { return rule_epoch_; }

  // All-or-nothing: on UnknownBehavior nothing is installed.
  void load_behaviors(const LoadClass& frame, const BehaviorRegistry& registry);
  // Replaces the rulebase wholesale. On any parse error the old rulebase is
  // kept and the error is rethrown.
  void install_rules(const AddRule& frame);

  // Finds an installed behavior by dynamic type.
  template <typename B>
  B* behavior() {
    for (auto& b : behaviors_) {
      if (auto* p = dynamic_cast<B*>(b.get())) return p;
    }
    return nullptr;
  }

 private:
  friend class Platform;

  AgentSpec spec_;
  std::vector<std::string> behavior_names_;
  std::vector<std::unique_ptr<Behavior>> behaviors_;
  RuleBase rules_;
  int rule_epoch_ = 0;
  std::size_t slot_ = 0;  // registration index

  struct Queued {
    std::uint64_t sequence;
    Envelope envelope;
    sl::Node content;
  };
  std::deque<Queued> mailbox_;
  std::mutex mailbox_mu_;
  std::condition_variable mailbox_cv_;
};

enum class SchedulerMode {
  Fifo,    // messages processed in global send order
  Seeded,  // next agent drawn at random among those with mail; per-pair FIFO still holds
};

struct PlatformOptions {
  SchedulerMode mode = SchedulerMode::Fifo;
  std::uint64_t seed = 0;
};

// Receives platform events the owner may want to observe.
struct PlatformListener {
  virtual ~PlatformListener() = default;
  virtual void on_send(Tick, const Envelope&) {}
  virtual void on_rules_installed(Agent&) {}
};

class Platform {
 public:
  explicit Platform(BehaviorRegistry registry, PlatformOptions options = {});
  ~Platform();

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  // Agent Factory path: registers an untrained agent and announces it to the
  // ATM with an agentsToBeTrained request. Throws DuplicateName,
  // UnknownBehavior.
  AgentId create_agent(const AgentSpec& spec);
  // Registers an agent with its behaviors installed immediately (platform
  // services such as the ATM itself).
  AgentId spawn(const AgentSpec& spec);

  // Throws UnknownReceiver, or a ParseError when content is not SL.
  DeliveryReceipt deliver(Envelope env);
  DeliveryReceipt send(Performative performative, std::string_view sender, std::string_view receiver,
                       std::string_view ontology, const sl::Node& content);

  // Deterministic scheduler on the calling thread. Returns messages handled.
  std::size_t run_until_idle();
  // One thread per agent with mail; returns when every mailbox is drained.
  std::size_t run_threaded_until_idle();

  bool has(std::string_view name) const;
  // Throws UnknownAgent.
  Agent& agent(std::string_view name);
  std::vector<std::string> agent_names() const;

  const BehaviorRegistry& registry() const noexcept { return registry_; }

  void set_tick(Tick tick) noexcept { tick_ = tick; }
  Tick tick() const noexcept { return tick_; }

  void set_listener(PlatformListener* listener) noexcept { listener_ = listener; }
  PlatformListener* listener() const noexcept { return listener_; }

 private:
  DeliveryReceipt enqueue(Envelope env, sl::Node content);
  void dispatch(Agent& agent, const Envelope& env, const sl::Node& content);
  Agent* next_agent();

  BehaviorRegistry registry_;
  PlatformOptions options_;
  std::mt19937_64 rng_;
  std::vector<std::unique_ptr<Agent>> agents_;  // registration order
  std::map<std::string, Agent*, std::less<>> directory_;
  mutable std::mutex directory_mu_;
  std::set<std::size_t> ready_;  // slots with mail
  std::mutex ready_mu_;
  std::mutex send_mu_;
  std::uint64_t next_sequence_ = 1;
  std::atomic<std::int64_t> in_flight_{0};
  std::mutex idle_mu_;
  std::condition_variable idle_cv_;
  std::atomic<Tick> tick_{0};
  PlatformListener* listener_ = nullptr;
};

// Agent Training Module. Answers agentsToBeTrained with loadClass per the
// configured behavior set of each agent type, and (retrain :agent A
// :location L) with an addRule frame mined from the repository.
class AtmBehavior : public Behavior {
 public:
  AtmBehavior(std::map<std::string, std::vector<std::string>> behaviors_by_type, const Repository* repository)
      : behaviors_by_type_(behaviors_by_type.begin(), behaviors_by_type.end()), repository_(repository) {}

  bool handle(AgentContext& ctx, const Envelope& env, const sl::Node& content) override;

  void configure_type(const std::string& agent_type, std::vector<std::string> behaviors);
  bool knows_type(std::string_view agent_type) const;

  // Mines `location` into defrule sources. Throws EmptyDataset.
  std::vector<std::string> mine_rules(std::string_view location) const;

 private:
  void train(AgentContext& ctx, const Envelope& env, const AgentsToBeTrained& frame);
  void retrain(AgentContext& ctx, const Envelope& env, const sl::Node& request);

  std::map<std::string, std::vector<std::string>, std::less<>> behaviors_by_type_;
  const Repository* repository_;
  mutable std::mutex mu_;
};

// (retrain :agent A :location L)
sl::Node retrain_request(std::string_view agent, std::string_view location);

inline constexpr std::string_view kAtmBehavior = "TrainingModuleBehavior";

}  // namespace academy

#include "academy/platform.hpp"

#include <algorithm>
#include <thread>

#include "academy/error.hpp"
#include "academy/miner.hpp"

namespace academy {

std::string_view performative_name(Performative p) noexcept {
  switch (p) {
    case Performative::Request: return "request";
    case Performative::Inform: return "inform";
    case Performative::Failure: return "failure";
  }
  return "inform";
}

Performative parse_performative(std::string_view text) {
  if (text == "request") return Performative::Request;
  if (text == "inform") return Performative::Inform;
  if (text == "failure") return Performative::Failure;
  throw Error(Errc::MalformedFrame, "unknown performative '" + std::string(text) + "'");
}

std::string transcript_line(Tick tick, const Envelope& env) {
  std::string out = std::to_string(tick);
  for (std::string_view part : {std::string_view(env.sender), std::string_view(env.receiver),
                                performative_name(env.performative), std::string_view(env.ontology)}) {
    out += ' ';
    out += part;
  }
  out += ' ';
  out += env.content;
  return out;
}

sl::Node error_content(Errc code, std::string_view message) {
  using sl::Node;
  return Node::list({Node::atom("error"), Node::keyword("code"), Node::atom(std::string(errc_name(code))),
                     Node::keyword("message"), Node::str(std::string(message))});
}

void AgentContext::send(Performative performative, std::string_view receiver, std::string_view ontology,
                        const sl::Node& content) {
  platform.send(performative, self.name(), receiver, ontology, content);
}

void AgentContext::reply(const Envelope& to, Performative performative, const sl::Node& content) {
  platform.send(performative, self.name(), to.sender, to.ontology, content);
}

Tick AgentContext::tick() const { return platform.tick(); }

void BehaviorRegistry::add(std::string class_name, BehaviorFactory factory) {
  if (!sl::is_valid_atom(class_name)) throw Error(Errc::UnknownBehavior, "invalid class name '" + class_name + "'");
  if (factories_.count(class_name) != 0) throw Error(Errc::DuplicateName, class_name);
  factories_.emplace(std::move(class_name), std::move(factory));
}

bool BehaviorRegistry::has(std::string_view class_name) const { return factories_.find(class_name) != factories_.end(); }

std::unique_ptr<Behavior> BehaviorRegistry::create(std::string_view class_name) const {
  auto it = factories_.find(class_name);
  if (it == factories_.end()) throw Error(Errc::UnknownBehavior, std::string(class_name));
  return it->second();
}

std::vector<std::string> BehaviorRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : factories_) out.push_back(name);
  return out;
}

void Agent::load_behaviors(const LoadClass& frame, const BehaviorRegistry& registry) {
  std::vector<std::unique_ptr<Behavior>> loaded;
  for (const auto& name : frame.behaviors) loaded.push_back(registry.create(name));
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    behavior_names_.push_back(frame.behaviors[i]);
    behaviors_.push_back(std::move(loaded[i]));
  }
}

void Agent::install_rules(const AddRule& frame) {
  std::vector<Rule> parsed;
  parsed.reserve(frame.rules.size());
  for (const auto& source : frame.rules) parsed.push_back(parse_defrule(source));
  RuleBase next(std::move(parsed));
  rules_ = std::move(next);
  ++rule_epoch_;
}

Platform::Platform(BehaviorRegistry registry, PlatformOptions options)
    : registry_(std::move(registry)), options_(options), rng_(options.seed) {
  // The factory is addressable so training failures can be answered to it.
  spawn({std::string(kFactoryName), "agentFactory", {}, std::string(kTrainingOntology)});
}

Platform::~Platform() = default;

AgentId Platform::spawn(const AgentSpec& spec) {
  if (!sl::is_valid_atom(spec.name) || !sl::is_valid_atom(spec.agent_type)) {
    throw Error(Errc::MalformedFrame, "agent name and type must be symbols");
  }
  for (const auto& b : spec.behaviors) {
    if (!registry_.has(b)) throw Error(Errc::UnknownBehavior, b);
  }
  auto agent = std::make_unique<Agent>(spec);
  agent->load_behaviors(LoadClass{spec.behaviors}, registry_);
  std::lock_guard lock(directory_mu_);
  if (directory_.count(spec.name) != 0) throw Error(Errc::DuplicateName, spec.name);
  directory_.emplace(spec.name, agent.get());
  agent->slot_ = agents_.size();
  agents_.push_back(std::move(agent));
  return {spec.name};
}

AgentId Platform::create_agent(const AgentSpec& spec) {
  if (!sl::is_valid_atom(spec.name) || !sl::is_valid_atom(spec.agent_type)) {
    throw Error(Errc::MalformedFrame, "agent name and type must be symbols");
  }
  for (const auto& b : spec.behaviors) {
    if (!registry_.has(b)) throw Error(Errc::UnknownBehavior, b);
  }
  {
    std::lock_guard lock(directory_mu_);
    if (directory_.count(spec.name) != 0) throw Error(Errc::DuplicateName, spec.name);
    AgentSpec untrained = spec;
    auto agent = std::make_unique<Agent>(std::move(untrained));
    directory_.emplace(spec.name, agent.get());
    agent->slot_ = agents_.size();
    agents_.push_back(std::move(agent));
  }
  // The user's requested behaviors become the type's training preference
  // unless the ATM already has one.
  if (has(kAtmName)) {
    if (auto* atm = agent(kAtmName).behavior<AtmBehavior>(); atm != nullptr && !spec.behaviors.empty() &&
                                                            !atm->knows_type(spec.agent_type)) {
      atm->configure_type(spec.agent_type, spec.behaviors);
    }
  }
  send(Performative::Request, kFactoryName, kAtmName, kTrainingOntology,
       encode_frame(AgentsToBeTrained{{{spec.name, spec.agent_type}}}));
  return {spec.name};
}

DeliveryReceipt Platform::deliver(Envelope env) {
  sl::Node content = sl::parse(env.content);
  return enqueue(std::move(env), std::move(content));
}

DeliveryReceipt Platform::enqueue(Envelope env, sl::Node content) {
  Agent* receiver = nullptr;
  {
    std::lock_guard lock(directory_mu_);
    auto it = directory_.find(env.receiver);
    if (it == directory_.end()) throw Error(Errc::UnknownReceiver, env.receiver);
    receiver = it->second;
  }
  DeliveryReceipt receipt;
  {
    // Sequence assignment, observation and enqueue happen as one step so the
    // transcript order is the delivery order.
    std::lock_guard lock(send_mu_);
    receipt.sequence = next_sequence_++;
    if (listener_ != nullptr) listener_->on_send(tick_.load(), env);
    in_flight_.fetch_add(1);
    std::lock_guard mlock(receiver->mailbox_mu_);
    receiver->mailbox_.push_back({receipt.sequence, std::move(env), std::move(content)});
    std::lock_guard rlock(ready_mu_);
    ready_.insert(receiver->slot_);
  }
  receiver->mailbox_cv_.notify_one();
  return receipt;
}

DeliveryReceipt Platform::send(Performative performative, std::string_view sender, std::string_view receiver,
                               std::string_view ontology, const sl::Node& content) {
  return enqueue(Envelope{performative, std::string(sender), std::string(receiver), std::string(ontology),
                          sl::print(content)},
                 content);
}

bool Platform::has(std::string_view name) const {
  std::lock_guard lock(directory_mu_);
  return directory_.find(name) != directory_.end();
}

Agent& Platform::agent(std::string_view name) {
  std::lock_guard lock(directory_mu_);
  auto it = directory_.find(name);
  if (it == directory_.end()) throw Error(Errc::UnknownAgent, std::string(name));
  return *it->second;
}

std::vector<std::string> Platform::agent_names() const {
  std::lock_guard lock(directory_mu_);
  std::vector<std::string> out;
  for (const auto& a : agents_) out.push_back(a->name());
  return out;
}

void Platform::dispatch(Agent& agent, const Envelope& env, const sl::Node& content) {
  AgentContext ctx{*this, agent};
  try {
    if (content.has_head("loadClass") || content.has_head("addRule")) {
      Frame frame = decode_frame(content);
      if (auto* load = std::get_if<LoadClass>(&frame)) {
        agent.load_behaviors(*load, registry_);
      } else {
        agent.install_rules(std::get<AddRule>(frame));
        if (listener_ != nullptr) listener_->on_rules_installed(agent);
      }
      return;
    }
    for (auto& behavior : agent.behaviors_) {
      if (behavior->handle(ctx, env, content)) return;
    }
  } catch (const Error& e) {
    // Never answer a failure with a failure.
    if (env.performative != Performative::Failure && has(env.sender)) {
      ctx.reply(env, Performative::Failure, error_content(e.code(), e.what()));
    }
  }
}

Agent* Platform::next_agent() {
  std::lock_guard lock(directory_mu_);
  std::unique_lock rlock(ready_mu_);
  if (ready_.empty()) return nullptr;
  if (options_.mode == SchedulerMode::Fifo) {
    std::vector<std::size_t> slots(ready_.begin(), ready_.end());
    rlock.unlock();
    Agent* best = nullptr;
    std::uint64_t best_seq = 0;
    for (std::size_t slot : slots) {
      Agent* a = agents_[slot].get();
      std::lock_guard mlock(a->mailbox_mu_);
      if (best == nullptr || a->mailbox_.front().sequence < best_seq) {
        best = a;
        best_seq = a->mailbox_.front().sequence;
      }
    }
    return best;
  }
  auto it = ready_.begin();
  std::advance(it, std::uniform_int_distribution<std::size_t>(0, ready_.size() - 1)(rng_));
  return agents_[*it].get();
}

std::size_t Platform::run_until_idle() {
  std::size_t handled = 0;
  while (Agent* a = next_agent()) {
    Envelope env;
    sl::Node content = sl::Node::list();
    {
      std::lock_guard mlock(a->mailbox_mu_);
      env = std::move(a->mailbox_.front().envelope);
      content = std::move(a->mailbox_.front().content);
      a->mailbox_.pop_front();
      if (a->mailbox_.empty()) {
        std::lock_guard rlock(ready_mu_);
        ready_.erase(a->slot_);
      }
    }
    dispatch(*a, env, content);
    in_flight_.fetch_sub(1);
    ++handled;
  }
  return handled;
}

std::size_t Platform::run_threaded_until_idle() {
  std::atomic<std::size_t> handled{0};
  while (in_flight_.load() > 0) {
    std::vector<Agent*> snapshot;
    {
      std::lock_guard lock(directory_mu_);
      for (auto& a : agents_) snapshot.push_back(a.get());
    }
    std::atomic<bool> stop{false};
    std::vector<std::thread> workers;
    workers.reserve(snapshot.size());
    for (Agent* a : snapshot) {
      workers.emplace_back([this, a, &stop, &handled] {
        while (true) {
          Envelope env;
          sl::Node content = sl::Node::list();
          {
            std::unique_lock mlock(a->mailbox_mu_);
            a->mailbox_cv_.wait(mlock, [&] { return stop.load() || !a->mailbox_.empty(); });
            if (a->mailbox_.empty()) return;
            env = std::move(a->mailbox_.front().envelope);
            content = std::move(a->mailbox_.front().content);
            a->mailbox_.pop_front();
            if (a->mailbox_.empty()) {
              std::lock_guard rlock(ready_mu_);
              ready_.erase(a->slot_);
            }
          }
          dispatch(*a, env, content);
          handled.fetch_add(1);
          if (in_flight_.fetch_sub(1) == 1) {
            std::lock_guard ilock(idle_mu_);
            idle_cv_.notify_all();
          }
        }
      });
    }
    {
      std::unique_lock ilock(idle_mu_);
      idle_cv_.wait(ilock, [&] { return in_flight_.load() == 0; });
    }
    stop.store(true);
    for (Agent* a : snapshot) {
      std::lock_guard mlock(a->mailbox_mu_);
      a->mailbox_cv_.notify_all();
    }
    for (auto& w : workers) w.join();
    // Agents created while running have had no worker yet.
  }
  return handled.load();
}

void AtmBehavior::configure_type(const std::string& agent_type, std::vector<std::string> behaviors) {
  std::lock_guard lock(mu_);
  behaviors_by_type_[agent_type] = std::move(behaviors);
}

bool AtmBehavior::knows_type(std::string_view agent_type) const {
  std::lock_guard lock(mu_);
  return behaviors_by_type_.find(agent_type) != behaviors_by_type_.end();
}

bool AtmBehavior::handle(AgentContext& ctx, const Envelope& env, const sl::Node& content) {
  if (content.has_head("agentsToBeTrained")) {
    train(ctx, env, std::get<AgentsToBeTrained>(decode_frame(content)));
    return true;
  }
  if (content.has_head("retrain")) {
    retrain(ctx, env, content);
    return true;
  }
  return false;
}

void AtmBehavior::train(AgentContext& ctx, const Envelope& env, const AgentsToBeTrained& frame) {
  for (const auto& a : frame.agents) {
    if (!ctx.platform.has(a.name)) {
      ctx.reply(env, Performative::Failure, error_content(Errc::UnknownAgent, a.name));
      continue;
    }
    std::vector<std::string> behaviors;
    bool known = false;
    {
      std::lock_guard lock(mu_);
      if (auto it = behaviors_by_type_.find(a.agent_type); it != behaviors_by_type_.end()) {
        behaviors = it->second;
        known = true;
      }
    }
    if (!known) {
      ctx.reply(env, Performative::Failure,
                error_content(Errc::UnknownBehavior, "no behaviors configured for type " + a.agent_type));
      continue;
    }
    ctx.send(Performative::Request, a.name, kTrainingOntology, encode_frame(LoadClass{std::move(behaviors)}));
  }
}

std::vector<std::string> AtmBehavior::mine_rules(std::string_view location) const {
  if (repository_ == nullptr) throw Error(Errc::EmptyDataset, "no repository attached");
  Dataset ds = repository_->query_examples(location);
  if (ds.examples.empty()) throw Error(Errc::EmptyDataset, "no labeled examples for " + std::string(location));
  std::vector<std::string> out;
  for (const auto& rule : tree_to_rules(induce_tree(ds))) out.push_back(to_defrule(rule));
  return out;
}

void AtmBehavior::retrain(AgentContext& ctx, const Envelope& env, const sl::Node& request) {
  const sl::Node* agent = sl::keyword_value(request, "agent");
  const sl::Node* location = sl::keyword_value(request, "location");
  if (agent == nullptr || location == nullptr || !agent->is_atom() || !location->is_atom()) {
    ctx.reply(env, Performative::Failure, error_content(Errc::MalformedFrame, "expected (retrain :agent A :location L)"));
    return;
  }
  if (!ctx.platform.has(agent->text())) {
    ctx.reply(env, Performative::Failure, error_content(Errc::UnknownAgent, agent->text()));
    return;
  }
  try {
    auto rules = mine_rules(location->text());
    ctx.send(Performative::Request, agent->text(), kTrainingOntology, encode_frame(AddRule{std::move(rules)}));
  } catch (const Error& e) {
    ctx.send(Performative::Failure, agent->text(), kTrainingOntology, error_content(e.code(), e.what()));
  }
}

sl::Node retrain_request(std::string_view agent, std::string_view location) {
  using sl::Node;
  return Node::list({Node::atom("retrain"), Node::keyword("agent"), Node::atom(std::string(agent)),
                     Node::keyword("location"), Node::atom(std::string(location))});
}

}  // namespace academy

#include "acp/aip/personal_agent.hpp"

#include <algorithm>

namespace acp::aip {

using core::Envelope;
using core::Protocol;
using core::Value;

std::string_view to_string(Phase p) noexcept {
  switch (p) {
    case Phase::Request: return "request";
    case Phase::Authenticate: return "authenticate";
    case Phase::Discover: return "discover";
    case Phase::FormGroup: return "form_group";
    case Phase::Distribute: return "distribute";
    case Phase::Execute: return "execute";
    case Phase::Report: return "report";
  }
  return "request";
}

PersonalAgent::PersonalAgent(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys,
                             PersonalAgentConfig config)
    : Peer(fabric, std::move(credential), std::move(keys)), config_(std::move(config)) {}

const Task* PersonalAgent::task(const std::string& task_id) const {
  auto it = runs_.find(task_id);
  return it == runs_.end() ? nullptr : &it->second.task;
}

std::vector<std::string> PersonalAgent::task_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : runs_) out.push_back(id);
  return out;
}

std::size_t PersonalAgent::broad_matches(const std::string& task_id) const {
  auto it = runs_.find(task_id);
  return it == runs_.end() ? 0 : it->second.broad;
}

void PersonalAgent::mark(Run& run, Phase phase) { phases_.push_back({phase, run.task.task_id, now()}); }

PersonalAgent::Run& PersonalAgent::run_for(const Envelope& env) {
  auto id = env.payload.value("task_id", std::string{});
  auto it = runs_.find(id);
  if (it == runs_.end()) throw Error(Errc::UnknownTask, env.msg_type + " for unknown task '" + id + "'");
  return it->second;
}

void PersonalAgent::handle(const Envelope& env) {
  const auto& t = env.msg_type;
  if (t == "task_request") return on_task_request(env);
  if (t == "discover_result") return on_discover_result(env);
  if (t == "group_accept" || t == "group_decline") return on_invite_answer(env);
  if (t == "subtask_accept" || t == "subtask_reject") return on_assign_answer(env);
  if (t == "negotiate") return on_negotiate(env);
  if (t == "user_reply") return on_user_reply(env);
  if (t == "subtask_result") return on_result(env);
}

void PersonalAgent::on_task_request(const Envelope& env) {
  auto requested_id = env.payload.value("task_id", std::string{});
  Task task;
  try {
    task = create_task(Goal::from_value(env.payload.value("goal", Value::object())), party(), ids(), now());
  } catch (const Error& e) {
    send(Protocol::AIP, "task_report", env.sender,
         {{"task_id", requested_id}, {"status", "failed"}, {"failure", e.to_value()}});
    return;
  }
  if (!requested_id.empty()) {
    if (runs_.contains(requested_id)) throw Error(Errc::ParseError, "task id " + requested_id + " is taken");
    task.task_id = requested_id;
    task.group.group_id = "group-" + requested_id;
  }
  auto id = task.task_id;
  auto& run = runs_[id];
  run.task = std::move(task);
  run.user = env.sender;
  mark(run, Phase::Request);
  mark(run, Phase::Authenticate);
  if (session_with(config_.trust_anchor) != nullptr) return after_auth(id);
  authenticate(config_.trust_anchor, [this, id](const a3ap::Session* s, const Error* e) {
    if (s != nullptr) return after_auth(id);
    fail(runs_.at(id), e != nullptr ? *e : Error(Errc::Timeout, "authentication failed"), "authenticate");
  });
}

void PersonalAgent::after_auth(const std::string& task_id) {
  auto& run = runs_.at(task_id);
  mark(run, Phase::Discover);
  std::set<std::string> tags;
  for (const auto& g : run.task.goal.sub_goals) tags.insert(g.required_tags.begin(), g.required_tags.end());
  Value required = Value::array();
  for (const auto& t : tags) required.push_back(t);
  Value query = {{"required", required},
                 {"mode", "loose"},
                 {"limit", std::max(config_.discover_limit, run.task.goal.sub_goals.size())}};
  if (!run.task.goal.text.empty()) query["raw_text"] = run.task.goal.text;
  auto env = send(Protocol::ADP, "discover_request", config_.discovery, {{"query", query}});
  discover_pending_[env.msg_id.hex()] = {task_id, ""};
}

void PersonalAgent::on_discover_result(const Envelope& env) {
  if (!env.correlation_id) return;
  auto it = discover_pending_.find(env.correlation_id->hex());
  if (it == discover_pending_.end()) return;
  auto [task_id, sub_goal] = it->second;
  discover_pending_.erase(it);
  auto& run = runs_.at(task_id);
  if (run.task.state == TaskState::Failed) return;
  auto cause = env.msg_id.hex();
  if (env.payload.contains("error")) return fail(run, Error::from_value(env.payload.at("error")), cause, sub_goal);
  const auto& results = env.payload.at("results");

  if (sub_goal.empty()) {
    run.broad = results.size();
    if (results.empty()) return fail(run, Error(Errc::DiscoveryEmpty, "no agent matches any sub-goal"), cause);
    mark(run, Phase::FormGroup);
    run.task.transition(TaskState::GroupForming, cause, now());
    for (const auto& g : run.task.goal.sub_goals) {
      Value required = Value::array();
      for (const auto& t : g.required_tags) required.push_back(t);
      auto req = send(Protocol::ADP, "discover_request", config_.discovery,
                      {{"query", {{"required", required}, {"mode", "strict"}, {"limit", config_.discover_limit}}}});
      discover_pending_[req.msg_id.hex()] = {task_id, g.name};
      ++run.strict_pending;
    }
    return;
  }
  auto& list = run.candidates[sub_goal];
  for (const auto& r : results) {
    auto agent = r.at("agent").get<std::string>();
    if (agent != party()) list.push_back(agent);
  }
  if (--run.strict_pending == 0) choose_and_invite(run, cause);
}

void PersonalAgent::choose_and_invite(Run& run, const std::string& cause) {
  std::set<std::string> used;
  for (const auto& g : run.task.goal.sub_goals) {
    const auto& list = run.candidates[g.name];
    if (list.empty()) {
      return fail(run, Error(Errc::DiscoveryEmpty, "no agent covers sub-goal '" + g.name + "'", {{"sub_goal", g.name}}),
                  cause, g.name);
    }
    auto pick = std::find_if(list.begin(), list.end(), [&](const std::string& a) { return !used.contains(a); });
    // Every candidate already serves another sub-goal: share the top one.
    run.chosen[g.name] = pick != list.end() ? *pick : list.front();
    used.insert(run.chosen[g.name]);
  }
  run.invited_at = now();
  for (const auto& g : run.task.goal.sub_goals) {
    const auto& agent = run.chosen[g.name];
    if (!run.task.group.membership.contains(agent)) invite(run, agent);
  }
}

void PersonalAgent::invite(Run& run, const std::string& agent) {
  auto& group = run.task.group;
  group.members.insert(agent);
  group.membership[agent] = Membership::Invited;
  Value goals = Value::array();
  std::set<std::string> tags;
  for (const auto& g : run.task.goal.sub_goals) {
    if (run.chosen[g.name] != agent) continue;
    goals.push_back(g.name);
    tags.insert(g.required_tags.begin(), g.required_tags.end());
  }
  Value tag_list = Value::array();
  for (const auto& t : tags) tag_list.push_back(t);
  send(Protocol::AIP, "group_invite", agent,
       {{"task_id", run.task.task_id}, {"group_id", group.group_id}, {"sub_goals", goals}, {"required_tags", tag_list}});
}

void PersonalAgent::on_invite_answer(const Envelope& env) {
  auto& run = run_for(env);
  if (run.task.state != TaskState::GroupForming) return;
  auto& group = run.task.group;
  auto it = group.membership.find(env.sender);
  if (it == group.membership.end() || it->second != Membership::Invited) {
    throw Error(Errc::InvalidTransition, env.sender + " answered without an open invitation");
  }
  auto cause = env.msg_id.hex();
  if (env.msg_type == "group_accept") {
    it->second = Membership::Joined;
    return check_formation(run, cause);
  }
  it->second = Membership::Declined;
  group.members.erase(env.sender);
  for (const auto& g : run.task.goal.sub_goals) {
    if (run.chosen[g.name] != env.sender) continue;
    const auto& list = run.candidates[g.name];
    auto alt = std::find_if(list.begin(), list.end(), [&](const std::string& a) {
      auto m = group.membership.find(a);
      return m == group.membership.end() || m->second != Membership::Declined;
    });
    if (alt == list.end()) {
      return fail(run, Error(Errc::AllDeclined, "every candidate for '" + g.name + "' declined", {{"sub_goal", g.name}}),
                  cause, g.name);
    }
    run.chosen[g.name] = *alt;
    if (!group.membership.contains(*alt)) invite(run, *alt);
  }
  check_formation(run, cause);
}

void PersonalAgent::check_formation(Run& run, const std::string& cause) {
  const auto& group = run.task.group;
  if (!group.ready_to_distribute()) return;
  for (const auto& [_, agent] : run.chosen) {
    if (group.membership.at(agent) != Membership::Joined) return;
  }
  run.task.transition(TaskState::Distributing, cause, now());
  mark(run, Phase::Distribute);
  distribute(run, cause);
}

void PersonalAgent::on_tick(std::int64_t t) {
  Peer::on_tick(t);
  for (auto& [_, run] : runs_) {
    if (run.task.state == TaskState::GroupForming && run.invited_at > 0 &&
        run.task.group.count(Membership::Invited) > 0 && t - run.invited_at > config_.timeout) {
      fail(run, Error(Errc::Timeout, "invitations unanswered"), "timeout");
    }
  }
}

void PersonalAgent::distribute(Run& run, const std::string&) {
  run.task.plan = config_.planner(run.task, run.chosen);
  for (auto& st : run.task.plan) assign(run, st);
}

void PersonalAgent::assign(Run& run, SubTask& st) {
  st.status = SubTaskStatus::Assigned;
  send(Protocol::AIP, "subtask_assign", st.assignee, {{"task_id", run.task.task_id}, {"subtask", st.to_value()}});
}

void PersonalAgent::on_assign_answer(const Envelope& env) {
  auto& run = run_for(env);
  if (run.task.state != TaskState::Distributing) return;
  auto id = env.payload.value("subtask_id", std::string{});
  auto* st = run.task.subtask(id);
  if (st == nullptr) throw Error(Errc::UnknownSubtask, "answer for unknown sub-task '" + id + "'");
  if (st->assignee != env.sender || st->status != SubTaskStatus::Assigned) {
    throw Error(Errc::InvalidTransition, env.sender + " answered an assignment it does not hold");
  }
  auto cause = env.msg_id.hex();
  if (env.msg_type == "subtask_accept") {
    st->status = SubTaskStatus::Accepted;
    bool all = std::all_of(run.task.plan.begin(), run.task.plan.end(),
                           [](const SubTask& s) { return s.status == SubTaskStatus::Accepted; });
    if (!all) return;
    run.task.transition(TaskState::Executing, cause, now());
    mark(run, Phase::Execute);
    return start_ready(run);
  }
  auto reason = env.payload.value("reason", std::string{});
  Error rejected(Errc::AssignRejected, env.sender + " rejected " + id + ": " + reason,
                 {{"agent", env.sender}, {"reason", reason}, {"sub_goal", st->name}});
  if (run.reassigned.contains(id)) return fail(run, rejected, cause, st->name);
  const auto& list = run.candidates[st->name];
  auto alt = std::find_if(list.begin(), list.end(), [&](const std::string& a) {
    auto m = run.task.group.membership.find(a);
    return a != env.sender && m != run.task.group.membership.end() && m->second == Membership::Joined;
  });
  if (alt == list.end()) return fail(run, rejected, cause, st->name);
  run.reassigned.insert(id);
  st->assignee = *alt;
  run.chosen[st->name] = *alt;
  assign(run, *st);
}

void PersonalAgent::start_ready(Run& run) {
  for (auto& st : run.task.plan) {
    if (st.status != SubTaskStatus::Accepted) continue;
    Value inputs = Value::object();
    bool ready = true;
    for (const auto& d : st.depends_on) {
      const auto* dep = run.task.subtask(d);
      auto res = run.task.results.find(d);
      if (dep == nullptr || dep->status != SubTaskStatus::Done || res == run.task.results.end()) {
        ready = false;
        break;
      }
      inputs[dep->name] = res->second.result;
    }
    if (!ready) continue;
    st.status = SubTaskStatus::Running;
    send(Protocol::AIP, "subtask_start", st.assignee,
         {{"task_id", run.task.task_id}, {"subtask_id", st.subtask_id}, {"params", st.params}, {"inputs", inputs}});
  }
}

void PersonalAgent::on_negotiate(const Envelope& env) {
  auto& run = run_for(env);
  auto id = env.payload.value("subtask_id", std::string{});
  auto* st = run.task.subtask(id);
  if (st == nullptr) throw Error(Errc::UnknownSubtask, "negotiation for unknown sub-task '" + id + "'");
  if (env.sender != st->assignee) throw Error(Errc::InvalidTransition, env.sender + " does not hold " + id);
  if (run.task.state != TaskState::Executing && run.task.state != TaskState::Escalated) return;
  auto thread_id = env.payload.at("thread_id").get<std::string>();
  auto [it, fresh] = threads_.try_emplace(thread_id);
  auto& thread = it->second;
  if (fresh) {
    thread.thread_id = thread_id;
    thread.subtask_id = id;
    thread.participants = {party(), env.sender};
  }
  if (thread.subtask_id != id) throw Error(Errc::UnknownSubtask, thread_id + " belongs to " + thread.subtask_id);
  auto kind = negotiation_kind_from_string(env.payload.at("kind").get<std::string>());
  auto params = env.payload.value("params", Value::object());
  auto note = env.payload.value("note", std::string{});
  thread.append({kind, env.sender, params, note});  // throws ClosedThread
  auto cause = env.msg_id.hex();
  switch (kind) {
    case NegotiationKind::Proposal:
    case NegotiationKind::Counter:
    case NegotiationKind::InfoRequest:
      st->status = SubTaskStatus::NeedsNegotiation;
      run.escalations.push_back({thread_id, cause});
      return pump_escalations(run);
    case NegotiationKind::Accept:
      st->params.update(params);
      st->status = SubTaskStatus::Running;
      return;
    case NegotiationKind::Reject:
      st->status = SubTaskStatus::Failed;
      return fail(run, Error(Errc::SubtaskFailed, st->name + ": " + note, {{"thread_id", thread_id}}), cause, st->name);
  }
}

void PersonalAgent::pump_escalations(Run& run) {
  if (run.task.state != TaskState::Executing || !run.prompt.empty() || run.escalations.empty()) return;
  auto esc = run.escalations.front();
  run.escalations.pop_front();
  const auto& thread = threads_.at(esc.thread_id);
  if (!thread.open()) return pump_escalations(run);
  const auto& last = thread.messages.back();
  const auto* st = run.task.subtask(thread.subtask_id);
  run.task.transition(TaskState::Escalated, esc.cause, now());
  auto prompt_id = st->name + ":" + std::string(to_string(last.kind));
  for (int n = 2; run.prompt_thread.contains(prompt_id); ++n) {
    prompt_id = st->name + ":" + std::string(to_string(last.kind)) + "#" + std::to_string(n);
  }
  run.prompt = prompt_id;
  run.prompt_thread[prompt_id] = esc.thread_id;
  send(Protocol::AIP, "user_prompt", run.user,
       {{"task_id", run.task.task_id},
        {"prompt_id", prompt_id},
        {"thread_id", esc.thread_id},
        {"subtask_id", st->subtask_id},
        {"sub_goal", st->name},
        {"kind", std::string(to_string(last.kind))},
        {"params", last.params},
        {"note", last.note}});
}

void PersonalAgent::leader_says(Run& run, const std::string& thread_id, NegotiationKind kind, const Value& params,
                                const std::string& note) {
  auto& thread = threads_.at(thread_id);
  thread.append({kind, party(), params, note});
  const auto* st = run.task.subtask(thread.subtask_id);
  send(Protocol::AIP, "negotiate", st->assignee,
       {{"task_id", run.task.task_id},
        {"subtask_id", st->subtask_id},
        {"thread_id", thread_id},
        {"kind", std::string(to_string(kind))},
        {"params", params},
        {"note", note}});
}

void PersonalAgent::on_user_reply(const Envelope& env) {
  auto& run = run_for(env);
  if (env.sender != run.user) throw Error(Errc::InvalidTransition, "reply from " + env.sender + " who is not the user");
  auto prompt_id = env.payload.value("prompt_id", std::string{});
  if (run.task.state != TaskState::Escalated || prompt_id != run.prompt) {
    throw Error(Errc::InvalidTransition, "reply to '" + prompt_id + "' which is not outstanding");
  }
  auto cause = env.msg_id.hex();
  run.prompt.clear();
  run.task.transition(TaskState::Executing, cause, now());
  auto thread_id = run.prompt_thread.at(prompt_id);
  auto& thread = threads_.at(thread_id);
  auto* st = run.task.subtask(thread.subtask_id);
  auto answer = env.payload.value("answer", Value::object());
  const auto last = thread.messages.back();
  if (last.kind == NegotiationKind::InfoRequest) {
    leader_says(run, thread_id, NegotiationKind::Accept, answer, "answered by the user");
    st->status = SubTaskStatus::Running;
  } else if (answer.value("accept", false)) {
    leader_says(run, thread_id, NegotiationKind::Accept, last.params, "accepted by the user");
    st->params.update(last.params);
    st->status = SubTaskStatus::Running;
  } else if (answer.contains("counter")) {
    leader_says(run, thread_id, NegotiationKind::Counter, answer.at("counter"), answer.value("note", std::string{}));
  } else {
    auto reason = answer.value("reason", std::string("declined by the user"));
    leader_says(run, thread_id, NegotiationKind::Reject, Value::object(), reason);
    st->status = SubTaskStatus::Failed;
    return fail(run, Error(Errc::SubtaskFailed, st->name + ": " + reason, {{"thread_id", thread_id}}), cause,
                st->name);
  }
  pump_escalations(run);
  maybe_complete(run, cause);
}

void PersonalAgent::on_result(const Envelope& env) {
  auto& run = run_for(env);
  if (run.task.state != TaskState::Executing && run.task.state != TaskState::Escalated) return;
  auto id = env.payload.value("subtask_id", std::string{});
  const auto* st = run.task.subtask(id);
  if (st != nullptr && st->assignee != env.sender) {
    throw Error(Errc::InvalidTransition, env.sender + " reported for " + id + " which it does not hold");
  }
  auto cause = env.msg_id.hex();
  SubTaskResult result{env.payload.value("ok", true), env.payload.value("result", Value::object()),
                       env.payload.value("reason", std::string{})};
  bool fresh = false;
  try {
    fresh = run.task.record_result(id, result);
  } catch (const Error& e) {
    if (e.code() == Errc::DuplicateResult) return fail(run, e, cause, st->name);
    throw;
  }
  if (!fresh) return;
  if (!result.ok) return fail(run, Error(Errc::SubtaskFailed, st->name + ": " + result.reason), cause, st->name);
  start_ready(run);
  maybe_complete(run, cause);
}

void PersonalAgent::maybe_complete(Run& run, const std::string& cause) {
  if (run.task.state != TaskState::Executing || !run.task.all_done()) return;
  run.task.transition(TaskState::Aggregating, cause, now());
  mark(run, Phase::Report);
  run.task.transition(TaskState::Completed, cause, now());
  report(run);
}

void PersonalAgent::fail(Run& run, const Error& error, const std::string& cause, const std::string& sub_goal) {
  if (run.task.state == TaskState::Failed || run.task.state == TaskState::Completed) return;
  run.task.fail(error, cause, now(), sub_goal);
  report(run);
}

void PersonalAgent::report(Run& run) {
  Value p = {{"task_id", run.task.task_id},
             {"status", run.task.state == TaskState::Completed ? "completed" : "failed"},
             {"aggregate", aggregate(run.task)}};
  if (run.task.failure) p["failure"] = *run.task.failure;
  send(Protocol::AIP, "task_report", run.user, p);
}

}  // namespace acp::aip

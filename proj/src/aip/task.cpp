#include "acp/aip/task.hpp"

#include <algorithm>

namespace acp::aip {

using core::Value;

namespace {

constexpr std::pair<TaskState, std::string_view> kStates[] = {
    {TaskState::Created, "Created"},       {TaskState::GroupForming, "GroupForming"},
    {TaskState::Distributing, "Distributing"}, {TaskState::Executing, "Executing"},
    {TaskState::Escalated, "Escalated"},   {TaskState::Aggregating, "Aggregating"},
    {TaskState::Completed, "Completed"},   {TaskState::Failed, "Failed"},
};

constexpr std::pair<NegotiationKind, std::string_view> kKinds[] = {
    {NegotiationKind::Proposal, "proposal"}, {NegotiationKind::Counter, "counter"},
    {NegotiationKind::Accept, "accept"},     {NegotiationKind::Reject, "reject"},
    {NegotiationKind::InfoRequest, "info_request"},
};

Value string_list(const auto& items) {
  Value out = Value::array();
  for (const auto& s : items) out.push_back(s);
  return out;
}

}  // namespace

std::string_view to_string(TaskState s) noexcept {
  for (const auto& [k, n] : kStates)
    if (k == s) return n;
  return "Created";
}

TaskState task_state_from_string(std::string_view s) {
  for (const auto& [k, n] : kStates)
    if (n == s) return k;
  throw Error(Errc::ParseError, "unknown task state '" + std::string(s) + "'");
}

bool is_allowed_transition(TaskState from, TaskState to) noexcept {
  using S = TaskState;
  if (to == S::Failed) return from != S::Failed && from != S::Completed;
  switch (from) {
    case S::Created: return to == S::GroupForming;
    case S::GroupForming: return to == S::Distributing;
    case S::Distributing: return to == S::Executing;
    case S::Executing: return to == S::Escalated || to == S::Aggregating;
    case S::Escalated: return to == S::Executing;
    case S::Aggregating: return to == S::Completed;
    default: return false;
  }
}

Value SubGoal::to_value() const {
  return {{"name", name}, {"required_tags", string_list(required_tags)}, {"params", params},
          {"depends_on", string_list(depends_on)}};
}

SubGoal SubGoal::from_value(const Value& v) {
  try {
    SubGoal g;
    g.name = v.at("name").get<std::string>();
    for (const auto& t : v.at("required_tags")) g.required_tags.insert(t.get<std::string>());
    g.params = v.value("params", Value::object());
    for (const auto& d : v.value("depends_on", Value::array())) g.depends_on.push_back(d.get<std::string>());
    return g;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed sub-goal: ") + e.what());
  }
}

const SubGoal* Goal::find(const std::string& name) const {
  for (const auto& g : sub_goals)
    if (g.name == name) return &g;
  return nullptr;
}

Value Goal::to_value() const {
  Value subs = Value::array();
  for (const auto& g : sub_goals) subs.push_back(g.to_value());
  return {{"text", text}, {"sub_goals", subs}, {"params", params}};
}

Goal Goal::from_value(const Value& v) {
  Goal g;
  if (!v.is_object()) throw Error(Errc::EmptyGoal, "goal must be a map");
  try {
    g.text = v.value("text", std::string{});
    g.params = v.value("params", Value::object());
    for (const auto& s : v.value("sub_goals", Value::array())) g.sub_goals.push_back(SubGoal::from_value(s));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed goal: ") + e.what());
  }
  check_goal(g);
  return g;
}

void check_goal(const Goal& goal) {
  bool any = std::any_of(goal.sub_goals.begin(), goal.sub_goals.end(),
                         [](const SubGoal& g) { return !g.required_tags.empty(); });
  if (!any) throw Error(Errc::EmptyGoal, "the goal has no sub-goal with required tags");
  std::set<std::string> names;
  for (const auto& g : goal.sub_goals) {
    if (g.required_tags.empty()) throw Error(Errc::EmptyGoal, "sub-goal '" + g.name + "' has no required tags");
    if (!names.insert(g.name).second) throw Error(Errc::ParseError, "duplicate sub-goal '" + g.name + "'");
  }
  for (const auto& g : goal.sub_goals) {
    for (const auto& d : g.depends_on) {
      if (!names.contains(d)) throw Error(Errc::ParseError, "sub-goal '" + g.name + "' depends on unknown '" + d + "'");
    }
  }
  // Kahn's algorithm; leftovers sit on a cycle.
  std::map<std::string, std::size_t> waiting;
  for (const auto& g : goal.sub_goals) waiting[g.name] = g.depends_on.size();
  std::vector<std::string> ready;
  for (const auto& [n, c] : waiting)
    if (c == 0) ready.push_back(n);
  std::size_t seen = 0;
  while (!ready.empty()) {
    auto n = ready.back();
    ready.pop_back();
    ++seen;
    for (const auto& g : goal.sub_goals) {
      if (std::find(g.depends_on.begin(), g.depends_on.end(), n) != g.depends_on.end() && --waiting[g.name] == 0) {
        ready.push_back(g.name);
      }
    }
  }
  if (seen != goal.sub_goals.size()) throw Error(Errc::ParseError, "sub-goal dependencies form a cycle");
}

std::string_view to_string(SubTaskStatus s) noexcept {
  switch (s) {
    case SubTaskStatus::Assigned: return "Assigned";
    case SubTaskStatus::Accepted: return "Accepted";
    case SubTaskStatus::Running: return "Running";
    case SubTaskStatus::NeedsNegotiation: return "NeedsNegotiation";
    case SubTaskStatus::Done: return "Done";
    case SubTaskStatus::Failed: return "Failed";
  }
  return "Assigned";
}

Value SubTask::to_value() const {
  return {{"subtask_id", subtask_id}, {"parent", parent},     {"name", name},
          {"required_tags", string_list(required_tags)},      {"params", params},
          {"assignee", assignee},     {"depends_on", string_list(depends_on)},
          {"status", std::string(to_string(status))}};
}

SubTask SubTask::from_value(const Value& v) {
  try {
    SubTask s;
    s.subtask_id = v.at("subtask_id").get<std::string>();
    s.parent = v.at("parent").get<std::string>();
    s.name = v.at("name").get<std::string>();
    for (const auto& t : v.at("required_tags")) s.required_tags.insert(t.get<std::string>());
    s.params = v.value("params", Value::object());
    s.assignee = v.value("assignee", std::string{});
    for (const auto& d : v.value("depends_on", Value::array())) s.depends_on.push_back(d.get<std::string>());
    return s;
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed sub-task: ") + e.what());
  }
}

std::string_view to_string(Membership m) noexcept {
  switch (m) {
    case Membership::Invited: return "Invited";
    case Membership::Joined: return "Joined";
    case Membership::Declined: return "Declined";
  }
  return "Invited";
}

std::size_t Group::count(Membership m) const {
  return static_cast<std::size_t>(
      std::count_if(membership.begin(), membership.end(), [&](const auto& p) { return p.second == m; }));
}

Value Group::to_value() const {
  Value ms = Value::object();
  for (const auto& [a, m] : membership) ms[a] = std::string(to_string(m));
  return {{"group_id", group_id}, {"leader", leader}, {"members", string_list(members)}, {"membership", ms}};
}

std::string_view to_string(NegotiationKind k) noexcept {
  for (const auto& [v, n] : kKinds)
    if (v == k) return n;
  return "proposal";
}

NegotiationKind negotiation_kind_from_string(std::string_view s) {
  for (const auto& [v, n] : kKinds)
    if (n == s) return v;
  throw Error(Errc::ParseError, "unknown negotiation kind '" + std::string(s) + "'");
}

void NegotiationThread::append(NegotiationMessage msg) {
  if (!open()) throw Error(Errc::ClosedThread, "thread " + thread_id + " is closed");
  participants.insert(msg.from);
  if (msg.kind == NegotiationKind::Accept) {
    outcome = Outcome::Accepted;
    accepted_params = msg.params;
  } else if (msg.kind == NegotiationKind::Reject) {
    outcome = Outcome::Rejected;
    reason = msg.note;
  }
  messages.push_back(std::move(msg));
}

Value NegotiationThread::to_value() const {
  Value msgs = Value::array();
  for (const auto& m : messages) {
    msgs.push_back({{"kind", std::string(to_string(m.kind))}, {"from", m.from}, {"params", m.params}, {"note", m.note}});
  }
  std::string out = outcome == Outcome::Open ? "open" : outcome == Outcome::Accepted ? "accepted" : "rejected";
  Value v = {{"thread_id", thread_id}, {"subtask_id", subtask_id}, {"participants", string_list(participants)},
             {"messages", msgs}, {"outcome", out}};
  if (outcome == Outcome::Accepted) v["params"] = accepted_params;
  if (outcome == Outcome::Rejected) v["reason"] = reason;
  return v;
}

Value Transition::to_value() const {
  Value v = {{"to", std::string(to_string(to))}, {"cause", cause}, {"at", at}};
  if (from) v["from"] = std::string(to_string(*from));
  return v;
}

Transition Transition::from_value(const Value& v) {
  Transition t;
  if (v.contains("from")) t.from = task_state_from_string(v.at("from").get<std::string>());
  t.to = task_state_from_string(v.at("to").get<std::string>());
  t.cause = v.value("cause", std::string{});
  t.at = v.value("at", std::int64_t{0});
  return t;
}

Value SubTaskResult::to_value() const {
  Value v = {{"ok", ok}, {"result", result}};
  if (!ok) v["reason"] = reason;
  return v;
}

SubTask* Task::subtask(const std::string& id) {
  for (auto& s : plan)
    if (s.subtask_id == id) return &s;
  return nullptr;
}

const SubTask* Task::subtask(const std::string& id) const {
  return const_cast<Task*>(this)->subtask(id);
}

const SubTask* Task::subtask_for(const std::string& sub_goal) const {
  for (const auto& s : plan)
    if (s.name == sub_goal) return &s;
  return nullptr;
}

void Task::transition(TaskState to, const std::string& cause, std::int64_t at) {
  if (!is_allowed_transition(state, to)) {
    throw Error(Errc::InvalidTransition,
                "task " + task_id + ": " + std::string(to_string(state)) + " -> " + std::string(to_string(to)));
  }
  transcript.push_back({state, to, cause, at});
  state = to;
}

void Task::fail(const Error& error, const std::string& cause, std::int64_t at, const std::string& sub_goal) {
  if (state == TaskState::Failed || state == TaskState::Completed) return;
  Value f = {{"code", std::string(to_string(error.code()))}, {"detail", error.detail()}};
  if (!sub_goal.empty()) f["sub_goal"] = sub_goal;
  failure = f;
  transition(TaskState::Failed, cause, at);
}

bool Task::record_result(const std::string& subtask_id, SubTaskResult result) {
  auto* st = subtask(subtask_id);
  if (st == nullptr) throw Error(Errc::ResultForUnknownSubtask, "no sub-task " + subtask_id + " in " + task_id);
  auto it = results.find(subtask_id);
  if (it != results.end()) {
    if (it->second == result) return false;
    throw Error(Errc::DuplicateResult, "conflicting second result for " + subtask_id);
  }
  st->status = result.ok ? SubTaskStatus::Done : SubTaskStatus::Failed;
  results.emplace(subtask_id, std::move(result));
  return true;
}

bool Task::all_done() const {
  return !plan.empty() && std::all_of(plan.begin(), plan.end(), [](const SubTask& s) {
    return s.status == SubTaskStatus::Done;
  });
}

Value Task::to_value() const {
  Value p = Value::array();
  for (const auto& s : plan) p.push_back(s.to_value());
  Value r = Value::object();
  for (const auto& [k, v] : results) r[k] = v.to_value();
  Value t = Value::array();
  for (const auto& x : transcript) t.push_back(x.to_value());
  Value v = {{"task_id", task_id}, {"goal", goal.to_value()}, {"state", std::string(to_string(state))},
             {"group", group.to_value()}, {"plan", p}, {"results", r}, {"transcript", t}};
  if (failure) v["failure"] = *failure;
  return v;
}

Task create_task(Goal goal, const std::string& leader, core::IdSource& ids, std::int64_t at) {
  check_goal(goal);
  Task t;
  t.task_id = "task-" + ids.next_id().hex().substr(0, 12);
  t.goal = std::move(goal);
  t.group.group_id = "group-" + t.task_id.substr(5);
  t.group.leader = leader;
  t.transcript.push_back({std::nullopt, TaskState::Created, "create", at});
  return t;
}

std::vector<SubTask> plan_one_to_one(const Task& task, const std::map<std::string, std::string>& assignees) {
  std::vector<SubTask> plan;
  auto id_of = [&](const std::string& name) { return task.task_id + "/" + name; };
  for (const auto& g : task.goal.sub_goals) {
    SubTask s;
    s.subtask_id = id_of(g.name);
    s.parent = task.task_id;
    s.name = g.name;
    s.required_tags = g.required_tags;
    s.params = task.goal.params;
    s.params.update(g.params);
    auto it = assignees.find(g.name);
    if (it != assignees.end()) s.assignee = it->second;
    for (const auto& d : g.depends_on) s.depends_on.push_back(id_of(d));
    plan.push_back(std::move(s));
  }
  return plan;
}

Value aggregate(const Task& task) {
  Value out = Value::array();
  for (const auto& s : task.plan) {
    Value entry = {{"sub_goal", s.name}, {"subtask_id", s.subtask_id}, {"assignee", s.assignee}};
    auto it = task.results.find(s.subtask_id);
    if (it != task.results.end()) {
      entry["ok"] = it->second.ok;
      entry["result"] = it->second.result;
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace acp::aip

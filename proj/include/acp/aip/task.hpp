#pragma once

#include "acp/core/error.hpp"
#include "acp/core/rng.hpp"
#include "acp/core/value.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace acp::aip {

enum class TaskState { Created, GroupForming, Distributing, Executing, Escalated, Aggregating, Completed, Failed };
std::string_view to_string(TaskState s) noexcept;
TaskState task_state_from_string(std::string_view s);
// Edges of the task graph; any state may move to Failed.
bool is_allowed_transition(TaskState from, TaskState to) noexcept;

// One unit of the user's intent. Dependencies name other sub-goals.
struct SubGoal {
  std::string name;
  std::set<std::string> required_tags;
  core::Value params = core::Value::object();
  std::vector<std::string> depends_on;

  core::Value to_value() const;
  static SubGoal from_value(const core::Value& v);
};

struct Goal {
  std::string text;  // free-text form of the request, used for the broad discovery pass
  std::vector<SubGoal> sub_goals;
  core::Value params = core::Value::object();  // shared by every sub-goal

  const SubGoal* find(const std::string& name) const;
  core::Value to_value() const;
  // Throws Error(EmptyGoal) when there is no sub-goal with tags, and
  // Error(ParseError) for duplicate names, unknown or cyclic dependencies.
  static Goal from_value(const core::Value& v);
};
void check_goal(const Goal& goal);

enum class SubTaskStatus { Assigned, Accepted, Running, NeedsNegotiation, Done, Failed };
std::string_view to_string(SubTaskStatus s) noexcept;

struct SubTask {
  std::string subtask_id;
  std::string parent;  // task id
  std::string name;    // sub-goal name
  std::set<std::string> required_tags;
  core::Value params = core::Value::object();
  std::string assignee;
  std::vector<std::string> depends_on;  // subtask ids
  SubTaskStatus status = SubTaskStatus::Assigned;

  core::Value to_value() const;
  static SubTask from_value(const core::Value& v);
};

enum class Membership { Invited, Joined, Declined };
std::string_view to_string(Membership m) noexcept;

struct Group {
  std::string group_id;
  std::string leader;
  std::set<std::string> members;
  std::map<std::string, Membership> membership;

  std::size_t count(Membership m) const;
  // At least one Joined member and no invitation outstanding.
  bool ready_to_distribute() const { return count(Membership::Joined) > 0 && count(Membership::Invited) == 0; }
  core::Value to_value() const;
};

enum class NegotiationKind { Proposal, Counter, Accept, Reject, InfoRequest };
std::string_view to_string(NegotiationKind k) noexcept;
NegotiationKind negotiation_kind_from_string(std::string_view s);
inline bool is_terminal(NegotiationKind k) noexcept {
  return k == NegotiationKind::Accept || k == NegotiationKind::Reject;
}

struct NegotiationMessage {
  NegotiationKind kind = NegotiationKind::Proposal;
  std::string from;
  core::Value params = core::Value::object();
  std::string note;
};

struct NegotiationThread {
  enum class Outcome { Open, Accepted, Rejected };

  std::string thread_id;
  std::string subtask_id;
  std::set<std::string> participants;
  std::vector<NegotiationMessage> messages;
  Outcome outcome = Outcome::Open;
  core::Value accepted_params = core::Value::object();
  std::string reason;

  bool open() const noexcept { return outcome == Outcome::Open; }
  // Throws Error(ClosedThread) once a terminal message has been appended.
  void append(NegotiationMessage msg);
  core::Value to_value() const;
};

struct Transition {
  std::optional<TaskState> from;  // empty for the creation entry
  TaskState to = TaskState::Created;
  std::string cause;  // msg id (or a short label for internal causes)
  std::int64_t at = 0;

  core::Value to_value() const;
  static Transition from_value(const core::Value& v);
};

struct SubTaskResult {
  bool ok = true;
  core::Value result = core::Value::object();
  std::string reason;

  core::Value to_value() const;
  friend bool operator==(const SubTaskResult& a, const SubTaskResult& b) {
    return a.ok == b.ok && a.result == b.result && a.reason == b.reason;
  }
};

struct Task {
  std::string task_id;
  Goal goal;
  TaskState state = TaskState::Created;
  Group group;
  std::vector<SubTask> plan;
  std::map<std::string, SubTaskResult> results;
  std::vector<Transition> transcript;
  std::optional<core::Value> failure;  // {sub_goal?, code, detail}

  SubTask* subtask(const std::string& id);
  const SubTask* subtask(const std::string& id) const;
  const SubTask* subtask_for(const std::string& sub_goal) const;

  // Throws Error(InvalidTransition) for edges outside the graph.
  void transition(TaskState to, const std::string& cause, std::int64_t at);
  void fail(const Error& error, const std::string& cause, std::int64_t at, const std::string& sub_goal = {});

  // Records a sub-task result. Returns false for an identical repeat;
  // throws Error(ResultForUnknownSubtask) or Error(DuplicateResult) for a
  // conflicting repeat.
  bool record_result(const std::string& subtask_id, SubTaskResult result);
  bool all_done() const;

  core::Value to_value() const;
};

// Throws Error(EmptyGoal) (or ParseError, see Goal::from_value).
Task create_task(Goal goal, const std::string& leader, core::IdSource& ids, std::int64_t at = 0);

// Turns the goal into sub-tasks. `assignees` maps sub-goal name to agent.
using Planner = std::function<std::vector<SubTask>(const Task&, const std::map<std::string, std::string>& assignees)>;
// One sub-task per sub-goal, ids "<task>/<sub-goal>", dependencies copied
// from the goal, params = goal params overlaid with sub-goal params.
std::vector<SubTask> plan_one_to_one(const Task& task, const std::map<std::string, std::string>& assignees);

// Results keyed by sub-goal, listed in plan order:
//   [{"sub_goal", "subtask_id", "assignee", "result"}, ...]
core::Value aggregate(const Task& task);

}  // namespace acp::aip

#include "acp/aip/transcript_check.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace acp::aip {

using core::Envelope;
using core::Value;

namespace {

enum class Invite { Invited, Joined, Declined };
enum class Sub { Assigned, Accepted, Rejected, Started, Done, Failed };

struct ThreadTrack {
  std::string subtask;
  bool open = true;
  bool escalatable = false;  // carries a proposal or info_request not yet shown to the user
  std::string prompt;        // outstanding prompt id
};

struct SubTrack {
  std::string assignee;
  Sub status = Sub::Assigned;
  std::vector<std::string> deps;
  std::optional<Value> result;
};

struct TaskTrack {
  std::string leader;
  std::string user;
  bool reported = false;
  bool assigning = false;
  bool started = false;
  bool failed = false;
  std::map<std::string, Invite> invites;
  std::map<std::string, SubTrack> subs;
  std::map<std::string, ThreadTrack> threads;
  std::string outstanding_prompt;
  std::map<std::string, std::string> prompt_thread;
};

std::string str(const Value& payload, const char* key) {
  auto it = payload.find(key);
  return it != payload.end() && it->is_string() ? it->get<std::string>() : std::string{};
}

class Checker {
 public:
  core::ValidationReport run(std::span<const Envelope> messages) {
    for (std::size_t i = 0; i < messages.size(); ++i) {
      const auto& env = messages[i];
      if (env.protocol != core::Protocol::AIP) continue;
      at_ = "messages[" + std::to_string(i) + "]";
      step(env);
    }
    return std::move(report_);
  }

 private:
  void bad(const std::string& rule, const std::string& detail) { report_.add(at_, rule, detail); }

  void step(const Envelope& env) {
    const auto& p = env.payload;
    auto task_id = str(p, "task_id");
    if (task_id.empty()) return bad("missing_task", env.msg_type + " carries no task_id");
    if (env.msg_type == "task_request") {
      if (tasks_.contains(task_id)) return bad("duplicate_task", task_id);
      tasks_[task_id] = {env.recipient, env.sender};
      return;
    }
    auto it = tasks_.find(task_id);
    if (it == tasks_.end()) return bad("unknown_task", env.msg_type + " before task_request of " + task_id);
    auto& t = it->second;
    if (t.reported) return bad("after_report", env.msg_type + " after task_report");
    const auto& type = env.msg_type;
    if (type == "group_invite") return invite(t, env);
    if (type == "group_accept" || type == "group_decline") return answer_invite(t, env);
    if (type == "subtask_assign") return assign(t, env);
    if (type == "subtask_accept" || type == "subtask_reject") return answer_assign(t, env);
    if (type == "subtask_start") return start(t, env);
    if (type == "negotiate") return negotiate(t, env);
    if (type == "user_prompt") return prompt(t, env);
    if (type == "user_reply") return reply(t, env);
    if (type == "subtask_result") return result(t, env);
    if (type == "task_report") return report(t, env);
    bad("unknown_message", type);
  }

  bool from_leader(const TaskTrack& t, const Envelope& env) {
    if (env.sender == t.leader) return true;
    bad("wrong_sender", env.msg_type + " must come from the leader");
    return false;
  }

  void invite(TaskTrack& t, const Envelope& env) {
    if (!from_leader(t, env)) return;
    if (t.assigning) bad("invite_after_assign", "group is closed once assignment starts");
    if (env.recipient == t.leader) bad("leader_member", "the leader cannot invite itself");
    if (t.invites.contains(env.recipient)) return bad("duplicate_invite", env.recipient);
    t.invites[env.recipient] = Invite::Invited;
  }

  void answer_invite(TaskTrack& t, const Envelope& env) {
    auto it = t.invites.find(env.sender);
    if (it == t.invites.end() || it->second != Invite::Invited) {
      return bad("no_open_invite", env.sender + " answered without an open invitation");
    }
    it->second = env.msg_type == "group_accept" ? Invite::Joined : Invite::Declined;
    if (it->second == Invite::Declined) t.failed = true;
  }

  void assign(TaskTrack& t, const Envelope& env) {
    if (!from_leader(t, env)) return;
    t.assigning = true;
    if (t.started) bad("assign_after_start", "assignment after execution started");
    for (const auto& [m, s] : t.invites) {
      if (s == Invite::Invited) bad("invites_pending", m + " has not answered its invitation");
    }
    auto inv = t.invites.find(env.recipient);
    if (inv == t.invites.end() || inv->second != Invite::Joined) bad("not_joined", env.recipient);
    const auto& sub = env.payload.contains("subtask") ? env.payload.at("subtask") : Value::object();
    auto id = str(sub, "subtask_id");
    if (id.empty()) return bad("missing_subtask", "subtask_assign without a sub-task");
    auto existing = t.subs.find(id);
    if (existing != t.subs.end() && existing->second.status != Sub::Rejected) return bad("duplicate_assign", id);
    SubTrack s;
    s.assignee = env.recipient;
    for (const auto& d : sub.value("depends_on", Value::array())) s.deps.push_back(d.get<std::string>());
    t.subs[id] = s;
  }

  SubTrack* subtask(TaskTrack& t, const Envelope& env) {
    auto id = str(env.payload, "subtask_id");
    auto it = t.subs.find(id);
    if (it == t.subs.end()) {
      bad("unknown_subtask", env.msg_type + " for unassigned sub-task '" + id + "'");
      return nullptr;
    }
    return &it->second;
  }

  void answer_assign(TaskTrack& t, const Envelope& env) {
    auto* s = subtask(t, env);
    if (s == nullptr) return;
    if (s->assignee != env.sender) return bad("wrong_sender", env.sender + " is not the assignee");
    if (s->status != Sub::Assigned) return bad("no_open_assignment", str(env.payload, "subtask_id"));
    s->status = env.msg_type == "subtask_accept" ? Sub::Accepted : Sub::Rejected;
  }

  void start(TaskTrack& t, const Envelope& env) {
    if (!from_leader(t, env)) return;
    t.started = true;
    for (const auto& [id, s] : t.subs) {
      if (s.status == Sub::Assigned || s.status == Sub::Rejected) bad("not_all_accepted", id + " is not accepted");
    }
    auto* s = subtask(t, env);
    if (s == nullptr) return;
    if (s->assignee != env.recipient) bad("wrong_recipient", "start must go to the assignee");
    if (s->status != Sub::Accepted) return bad("start_state", str(env.payload, "subtask_id") + " cannot start now");
    for (const auto& d : s->deps) {
      auto dep = t.subs.find(d);
      if (dep == t.subs.end() || dep->second.status != Sub::Done) bad("dependency_pending", d);
    }
    s->status = Sub::Started;
  }

  void negotiate(TaskTrack& t, const Envelope& env) {
    auto* s = subtask(t, env);
    if (s == nullptr) return;
    auto sid = str(env.payload, "subtask_id");
    std::set<std::string> parties{env.sender, env.recipient};
    if (parties != std::set<std::string>{t.leader, s->assignee}) {
      bad("wrong_party", "negotiation is between the leader and the assignee");
    }
    if (s->status != Sub::Started) return bad("negotiate_state", sid + " is not running");
    auto thread_id = str(env.payload, "thread_id");
    auto kind = str(env.payload, "kind");
    auto [it, fresh] = t.threads.try_emplace(thread_id);
    auto& th = it->second;
    if (fresh) th.subtask = sid;
    if (th.subtask != sid) return bad("thread_mismatch", thread_id + " belongs to " + th.subtask);
    if (!th.open) return bad("closed_thread", thread_id);
    if (env.sender == t.leader && !th.prompt.empty()) {
      bad("before_reply", "leader answered " + thread_id + " before the user replied");
    }
    if (kind == "proposal" || kind == "info_request") {
      if (env.sender != t.leader) th.escalatable = true;
    } else if (kind == "accept" || kind == "reject") {
      th.open = false;
      th.escalatable = false;
      if (kind == "reject") {
        s->status = Sub::Failed;
        t.failed = true;
      }
    } else if (kind != "counter") {
      bad("unknown_kind", kind);
    }
  }

  void prompt(TaskTrack& t, const Envelope& env) {
    if (!from_leader(t, env)) return;
    if (env.recipient != t.user) bad("wrong_recipient", "prompts go to the user");
    if (!t.outstanding_prompt.empty()) bad("prompt_outstanding", t.outstanding_prompt + " is still unanswered");
    auto thread_id = str(env.payload, "thread_id");
    auto it = t.threads.find(thread_id);
    if (it == t.threads.end() || !it->second.open || !it->second.escalatable) {
      return bad("nothing_to_escalate", "no open proposal or info_request on '" + thread_id + "'");
    }
    auto id = str(env.payload, "prompt_id");
    it->second.escalatable = false;
    it->second.prompt = id;
    t.outstanding_prompt = id;
    t.prompt_thread[id] = thread_id;
  }

  void reply(TaskTrack& t, const Envelope& env) {
    if (env.sender != t.user) bad("wrong_sender", "replies come from the user");
    auto id = str(env.payload, "prompt_id");
    if (id.empty() || id != t.outstanding_prompt) return bad("no_open_prompt", "reply to '" + id + "'");
    t.outstanding_prompt.clear();
    auto th = t.threads.find(t.prompt_thread[id]);
    if (th != t.threads.end()) th->second.prompt.clear();
  }

  void result(TaskTrack& t, const Envelope& env) {
    auto* s = subtask(t, env);
    if (s == nullptr) return;
    auto sid = str(env.payload, "subtask_id");
    if (env.sender != s->assignee) return bad("wrong_sender", env.sender + " is not the assignee of " + sid);
    if (s->result) {
      if (*s->result != env.payload) bad("duplicate_result", sid);
      return;
    }
    if (s->status != Sub::Started) return bad("result_state", sid + " is not running");
    for (const auto& [id, th] : t.threads) {
      if (th.subtask == sid && th.open) bad("thread_open", "result for " + sid + " while " + id + " is open");
    }
    s->result = env.payload;
    bool ok = env.payload.value("ok", true);
    s->status = ok ? Sub::Done : Sub::Failed;
    if (!ok) t.failed = true;
  }

  void report(TaskTrack& t, const Envelope& env) {
    if (!from_leader(t, env)) return;
    if (env.recipient != t.user) bad("wrong_recipient", "the report goes to the user");
    if (!t.outstanding_prompt.empty()) bad("prompt_outstanding", t.outstanding_prompt);
    // A rejection that was never reassigned also ends the task.
    bool failed = t.failed || std::any_of(t.subs.begin(), t.subs.end(),
                                          [](const auto& s) { return s.second.status == Sub::Rejected; });
    if (!failed) {
      if (t.subs.empty()) bad("nothing_done", "report before any sub-task");
      for (const auto& [id, s] : t.subs) {
        if (s.status != Sub::Done) bad("result_missing", id);
      }
    }
    t.reported = true;
  }

  std::map<std::string, TaskTrack> tasks_;
  core::ValidationReport report_;
  std::string at_;
};

}  // namespace

core::ValidationReport check_message_order(std::span<const Envelope> messages) { return Checker().run(messages); }

core::ValidationReport check_transitions(std::span<const Transition> transitions) {
  core::ValidationReport r;
  if (transitions.empty()) {
    r.add("transitions", "non_empty");
    return r;
  }
  std::optional<TaskState> state;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const auto& t = transitions[i];
    auto at = "transitions[" + std::to_string(i) + "]";
    if (i == 0) {
      if (t.from || t.to != TaskState::Created) r.add(at, "creation", "first entry must create the task");
    } else if (!t.from || t.from != state) {
      r.add(at, "chain", "transition does not start from the current state");
    } else if (!is_allowed_transition(*t.from, t.to)) {
      r.add(at, "edge", std::string(to_string(*t.from)) + " -> " + std::string(to_string(t.to)));
    }
    state = t.to;
  }
  return r;
}

}  // namespace acp::aip

#pragma once

#include "acp/a3ap/peer.hpp"
#include "acp/aip/task.hpp"

#include <deque>
#include <map>
#include <set>

namespace acp::aip {

struct PersonalAgentConfig {
  std::string trust_anchor;  // authenticated with before anything else
  std::string discovery;
  std::size_t discover_limit = 10;
  std::int64_t timeout = 50;  // sim steps (or ms) to wait for invitation answers
  Planner planner = plan_one_to_one;
};

// The seven stages of serving one request.
enum class Phase { Request = 1, Authenticate, Discover, FormGroup, Distribute, Execute, Report };
std::string_view to_string(Phase p) noexcept;

struct PhaseMark {
  Phase phase;
  std::string task_id;
  std::int64_t at = 0;
};

// Task leader. Serves task_request messages end to end: authenticate with
// the trust anchor, one broad discovery pass, one strict pass per
// sub-goal, invitations, assignment, dependency-gated starts, escalation of
// worker proposals and questions to the user, and the final task_report.
class PersonalAgent : public a3ap::Peer {
 public:
  PersonalAgent(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys, PersonalAgentConfig config);

  const Task* task(const std::string& task_id) const;
  std::vector<std::string> task_ids() const;
  const std::vector<PhaseMark>& phases() const noexcept { return phases_; }
  const std::map<std::string, NegotiationThread>& threads() const noexcept { return threads_; }
  // Size of the broad discovery answer per task.
  std::size_t broad_matches(const std::string& task_id) const;

  void on_tick(std::int64_t now) override;

 protected:
  void handle(const core::Envelope& env) override;

 private:
  struct Escalation {
    std::string thread_id;
    std::string cause;
  };
  struct Run {
    Task task;
    std::string user;
    std::map<std::string, std::vector<std::string>> candidates;  // sub-goal -> ranked agents
    std::map<std::string, std::string> chosen;                  // sub-goal -> agent
    std::size_t strict_pending = 0;
    std::size_t broad = 0;
    std::int64_t invited_at = 0;
    std::set<std::string> reassigned;
    std::deque<Escalation> escalations;
    std::string prompt;  // outstanding prompt id
    std::map<std::string, std::string> prompt_thread;
  };

  void mark(Run& run, Phase phase);
  void on_task_request(const core::Envelope& env);
  void after_auth(const std::string& task_id);
  void on_discover_result(const core::Envelope& env);
  void choose_and_invite(Run& run, const std::string& cause);
  void invite(Run& run, const std::string& agent);
  void on_invite_answer(const core::Envelope& env);
  void check_formation(Run& run, const std::string& cause);
  void distribute(Run& run, const std::string& cause);
  void assign(Run& run, SubTask& st);
  void on_assign_answer(const core::Envelope& env);
  void start_ready(Run& run);
  void on_negotiate(const core::Envelope& env);
  void pump_escalations(Run& run);
  void on_user_reply(const core::Envelope& env);
  void on_result(const core::Envelope& env);
  void maybe_complete(Run& run, const std::string& cause);
  void fail(Run& run, const Error& error, const std::string& cause, const std::string& sub_goal = {});
  void report(Run& run);
  void leader_says(Run& run, const std::string& thread_id, NegotiationKind kind, const core::Value& params,
                   const std::string& note);
  Run& run_for(const core::Envelope& env);

  PersonalAgentConfig config_;
  std::map<std::string, Run> runs_;
  std::map<std::string, std::pair<std::string, std::string>> discover_pending_;  // msg id -> (task, sub-goal)
  std::map<std::string, NegotiationThread> threads_;
  std::vector<PhaseMark> phases_;
};

}  // namespace acp::aip

#pragma once

#include "acp/a3ap/peer.hpp"
#include "acp/aip/script.hpp"

#include <deque>
#include <map>

namespace acp::aip {

// A collaborating agent driven by a WorkerScript. Tool steps go to the
// configured tool service over ATP (authenticating on first use);
// negotiation steps open a thread with the task leader and wait for its
// answer.
class WorkerAgent : public a3ap::Peer {
 public:
  WorkerAgent(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys, WorkerScript script,
              std::string tool_service);

  const WorkerScript& script() const noexcept { return script_; }
  std::size_t tool_calls() const noexcept { return tool_calls_; }
  // Sub-tasks this agent finished (successfully or not).
  std::size_t finished() const noexcept { return finished_; }

 protected:
  void handle(const core::Envelope& env) override;
  void on_session_failed(const std::string& peer, const Error& error) override;

 private:
  struct Run {
    SubTask subtask;
    std::string task_id;
    std::string leader;
    core::Value vars = core::Value::object();
    std::size_t next = 0;
    int threads = 0;
    std::string waiting_thread;
    NegotiationKind waiting_kind = NegotiationKind::Proposal;
    std::string waiting_save;
    bool done = false;
  };

  void on_assign(const core::Envelope& env);
  void on_start(const core::Envelope& env);
  void on_negotiate(const core::Envelope& env);
  void on_tool_result(const core::Envelope& env);
  void advance(Run& run);
  void call_tool(Run& run, const ScriptStep& step);
  void finish(Run& run, bool ok, const core::Value& result, const std::string& reason = {});
  void negotiate(Run& run, NegotiationKind kind, const core::Value& params, const std::string& note,
                 const std::string& thread_id);

  WorkerScript script_;
  std::string tool_service_;
  int rejections_left_ = 0;
  std::map<std::string, Run> runs_;                 // by subtask id
  std::map<std::string, std::string> pending_;      // tool request msg id -> subtask id
  std::map<std::string, std::string> threads_;      // thread id -> subtask id
  std::deque<std::pair<std::string, ScriptStep>> waiting_session_;
  bool authenticating_ = false;
  std::size_t tool_calls_ = 0;
  std::size_t finished_ = 0;
};

}  // namespace acp::aip

#include "acp/aip/worker_agent.hpp"

namespace acp::aip {

using core::Envelope;
using core::Protocol;
using core::Value;

WorkerAgent::WorkerAgent(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys, WorkerScript script,
                         std::string tool_service)
    : Peer(fabric, std::move(credential), std::move(keys)),
      script_(std::move(script)),
      tool_service_(std::move(tool_service)),
      rejections_left_(script_.reject_assignments) {}

void WorkerAgent::handle(const Envelope& env) {
  const auto& t = env.msg_type;
  if (t == "group_invite") {
    Value p = {{"task_id", env.payload.at("task_id")}, {"group_id", env.payload.value("group_id", std::string{})}};
    if (script_.accept_invites) {
      reply(env, "group_accept", p);
    } else {
      p["reason"] = "not available";
      reply(env, "group_decline", p);
    }
  } else if (t == "subtask_assign") {
    on_assign(env);
  } else if (t == "subtask_start") {
    on_start(env);
  } else if (t == "negotiate") {
    on_negotiate(env);
  } else if (t == "tool_result") {
    on_tool_result(env);
  }
}

void WorkerAgent::on_assign(const Envelope& env) {
  auto st = SubTask::from_value(env.payload.at("subtask"));
  Value p = {{"task_id", env.payload.at("task_id")}, {"subtask_id", st.subtask_id}};
  if (rejections_left_ > 0) {
    --rejections_left_;
    p["reason"] = "capacity exhausted";
    reply(env, "subtask_reject", p);
    return;
  }
  Run run;
  run.subtask = st;
  run.task_id = env.payload.at("task_id").get<std::string>();
  run.leader = env.sender;
  runs_[st.subtask_id] = std::move(run);
  reply(env, "subtask_accept", p);
}

void WorkerAgent::on_start(const Envelope& env) {
  auto id = env.payload.at("subtask_id").get<std::string>();
  auto it = runs_.find(id);
  if (it == runs_.end()) throw Error(Errc::UnknownSubtask, "start for unknown sub-task " + id);
  auto& run = it->second;
  if (env.payload.contains("params")) run.subtask.params = env.payload.at("params");
  run.vars = {{"params", run.subtask.params},
              {"inputs", env.payload.value("inputs", Value::object())},
              {"subtask", {{"subtask_id", id}, {"name", run.subtask.name}, {"task_id", run.task_id}}}};
  advance(run);
}

void WorkerAgent::on_negotiate(const Envelope& env) {
  auto thread_id = env.payload.at("thread_id").get<std::string>();
  auto it = threads_.find(thread_id);
  if (it == threads_.end()) throw Error(Errc::UnknownSubtask, "negotiation on unknown thread " + thread_id);
  auto& run = runs_.at(it->second);
  if (run.done || run.waiting_thread != thread_id) throw Error(Errc::ClosedThread, "thread " + thread_id + " is closed");
  auto kind = negotiation_kind_from_string(env.payload.at("kind").get<std::string>());
  auto params = env.payload.value("params", Value::object());
  auto settle = [&](const Value& agreed) {
    if (!run.waiting_save.empty()) run.vars[run.waiting_save] = agreed;
    if (run.waiting_kind == NegotiationKind::Proposal) {
      run.subtask.params.update(agreed);
      run.vars["params"] = run.subtask.params;
    }
    run.waiting_thread.clear();
    advance(run);
  };
  switch (kind) {
    case NegotiationKind::Accept: settle(params); break;
    case NegotiationKind::Counter:
      if (script_.accept_counters) {
        negotiate(run, NegotiationKind::Accept, params, "counter accepted", thread_id);
        settle(params);
      } else {
        negotiate(run, NegotiationKind::Reject, Value::object(), "counter refused", thread_id);
        run.done = true;
        ++finished_;
      }
      break;
    case NegotiationKind::Reject:
      // The leader already marked the sub-task failed.
      run.done = true;
      run.waiting_thread.clear();
      ++finished_;
      break;
    default: throw Error(Errc::ParseError, "unexpected negotiation kind from the leader");
  }
}

void WorkerAgent::on_tool_result(const Envelope& env) {
  if (!env.correlation_id) return;
  auto it = pending_.find(env.correlation_id->hex());
  if (it == pending_.end()) return;
  auto& run = runs_.at(it->second);
  pending_.erase(it);
  const auto& step = script_.steps_for(run.subtask.name)[run.next - 1];
  if (env.payload.contains("error")) {
    const auto& e = env.payload.at("error");
    finish(run, false, Value::object(),
           step.tool_id + ": " + e.value("code", std::string{}) + " " + e.value("detail", std::string{}));
    return;
  }
  if (!step.save.empty()) run.vars[step.save] = env.payload.at("output");
  advance(run);
}

void WorkerAgent::on_session_failed(const std::string& peer, const Error& error) {
  if (peer != tool_service_) return;
  authenticating_ = false;
  while (!waiting_session_.empty()) {
    auto id = waiting_session_.front().first;
    waiting_session_.pop_front();
    finish(runs_.at(id), false, Value::object(), "tool service unreachable: " + error.detail());
  }
}

void WorkerAgent::advance(Run& run) {
  const auto& steps = script_.steps_for(run.subtask.name);
  while (!run.done && run.next < steps.size()) {
    const auto& step = steps[run.next++];
    try {
      if (step.when && !holds(*step.when, run.vars)) continue;
      switch (step.kind) {
        case ScriptStep::Kind::Tool: call_tool(run, step); return;
        case ScriptStep::Kind::Negotiate: {
          auto thread_id = run.subtask.subtask_id + "#" + std::to_string(++run.threads);
          threads_[thread_id] = run.subtask.subtask_id;
          negotiate(run, step.negotiate, render(step.params, run.vars), step.note, thread_id);
          if (step.negotiate == NegotiationKind::Reject) {
            run.done = true;
            ++finished_;
            return;
          }
          run.waiting_thread = thread_id;
          run.waiting_kind = step.negotiate;
          run.waiting_save = step.save;
          return;
        }
        case ScriptStep::Kind::Result: finish(run, true, render(step.result, run.vars)); return;
        case ScriptStep::Kind::Fail: finish(run, false, Value::object(), step.note); return;
      }
    } catch (const Error& e) {
      finish(run, false, Value::object(), e.detail());
      return;
    }
  }
  if (!run.done) finish(run, true, Value::object());
}

void WorkerAgent::call_tool(Run& run, const ScriptStep& step) {
  if (session_with(tool_service_) == nullptr) {
    // Park the step and authenticate once; every parked step resumes after.
    --run.next;
    waiting_session_.emplace_back(run.subtask.subtask_id, step);
    if (!authenticating_) {
      authenticating_ = true;
      authenticate(tool_service_, [this](const a3ap::Session* s, const Error*) {
        authenticating_ = false;
        if (s == nullptr) return;
        auto parked = std::move(waiting_session_);
        waiting_session_.clear();
        for (auto& [id, _] : parked) advance(runs_.at(id));
      });
    }
    return;
  }
  auto args = render(step.args, run.vars);
  auto env = send(Protocol::ATP, "tool_invoke", tool_service_, {{"tool_id", step.tool_id}, {"args", args}});
  pending_[env.msg_id.hex()] = run.subtask.subtask_id;
  ++tool_calls_;
}

void WorkerAgent::finish(Run& run, bool ok, const Value& result, const std::string& reason) {
  if (run.done) return;
  run.done = true;
  ++finished_;
  Value p = {{"task_id", run.task_id}, {"subtask_id", run.subtask.subtask_id}, {"ok", ok}, {"result", result}};
  if (!ok) p["reason"] = reason;
  send(Protocol::AIP, "subtask_result", run.leader, p);
}

void WorkerAgent::negotiate(Run& run, NegotiationKind kind, const Value& params, const std::string& note,
                            const std::string& thread_id) {
  send(Protocol::AIP, "negotiate", run.leader,
       {{"task_id", run.task_id},
        {"subtask_id", run.subtask.subtask_id},
        {"thread_id", thread_id},
        {"kind", std::string(to_string(kind))},
        {"params", params},
        {"note", note}});
}

}  // namespace acp::aip

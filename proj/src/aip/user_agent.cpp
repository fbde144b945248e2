#include "acp/aip/user_agent.hpp"

#include "acp/aip/script.hpp"

namespace acp::aip {

using core::Envelope;
using core::Value;

UserAgent::UserAgent(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys,
                     std::string personal_agent, std::map<std::string, Value> replies, Ask ask)
    : Peer(fabric, std::move(credential), std::move(keys)),
      personal_agent_(std::move(personal_agent)),
      replies_(std::move(replies)),
      ask_(std::move(ask)) {}

void UserAgent::request(const Goal& goal, const std::string& task_id) {
  send(core::Protocol::AIP, "task_request", personal_agent_, {{"task_id", task_id}, {"goal", goal.to_value()}});
}

void UserAgent::handle(const Envelope& env) {
  if (env.msg_type == "task_report") {
    report_ = env.payload;
    return;
  }
  if (env.msg_type != "user_prompt") return;
  prompts_.push_back(env.payload);
  auto prompt_id = env.payload.value("prompt_id", std::string{});
  Value answer;
  if (ask_) {
    answer = ask_(env.payload);
  } else if (auto it = replies_.find(prompt_id); it != replies_.end()) {
    answer = render(it->second, env.payload);
  } else {
    answer = {{"accept", false}, {"reason", "no answer for " + prompt_id}};
  }
  reply(env, "user_reply", {{"task_id", env.payload.at("task_id")}, {"prompt_id", prompt_id}, {"answer", answer}});
}

}  // namespace acp::aip

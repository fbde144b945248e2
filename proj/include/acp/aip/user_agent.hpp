#pragma once

#include "acp/a3ap/peer.hpp"
#include "acp/aip/task.hpp"

#include <functional>
#include <map>
#include <optional>

namespace acp::aip {

// The human side of a task: sends the request, answers prompts and keeps
// the final report. Canned replies are keyed by prompt id and rendered
// against the prompt payload (so "${params.options.0.restaurant}" picks
// the first option). An `ask` callback, when set, takes precedence.
class UserAgent : public a3ap::Peer {
 public:
  using Ask = std::function<core::Value(const core::Value& prompt)>;

  UserAgent(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys, std::string personal_agent,
            std::map<std::string, core::Value> replies = {}, Ask ask = {});

  // Sends task_request {task_id, goal}.
  void request(const Goal& goal, const std::string& task_id);

  const std::optional<core::Value>& report() const noexcept { return report_; }
  const std::vector<core::Value>& prompts() const noexcept { return prompts_; }

 protected:
  void handle(const core::Envelope& env) override;

 private:
  std::string personal_agent_;
  std::map<std::string, core::Value> replies_;
  Ask ask_;
  std::vector<core::Value> prompts_;
  std::optional<core::Value> report_;
};

}  // namespace acp::aip

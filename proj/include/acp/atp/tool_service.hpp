#pragma once

#include "acp/a3ap/ledger.hpp"
#include "acp/a3ap/peer.hpp"
#include "acp/atp/workflow.hpp"

namespace acp::atp {

// A tool manager reachable over the transport. Every request needs an
// established session with the sender; replies carry {op, ...} or
// {op, error}.
//   tool_register {tool}            -> tool_result {op: register, tool_id}
//   resource_attach {resource}      -> tool_result {op: attach, resource_id}
//   tool_lookup {tool_id | tags}    -> tool_result {op: lookup, tools: [...]}
//   tool_invoke {tool_id, args}     -> tool_result {op: invoke, tool_id, output, trace}
//   workflow_submit {workflow[, context]} -> workflow_status {run, context}
// Successful invocations bill cost_tokens_per_call to the ledger under the
// caller's session (caller pays the provider); with call metering on,
// each successful call also records one Calls unit.
class ToolService : public a3ap::Peer {
 public:
  ToolService(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys, ToolManager& manager,
              a3ap::Ledger& ledger);

  ToolManager& manager() noexcept { return manager_; }
  const std::vector<TraceEntry>& invocations() const noexcept { return invocations_; }
  // Also record one Calls unit per successful invocation (per-call pricing).
  void set_call_metering(bool on) noexcept { call_metering_ = on; }

 protected:
  void handle(const core::Envelope& env) override;
  void on_session_established(const a3ap::Session& session) override;

 private:
  const a3ap::Session& require_session(const std::string& party) const;
  void bill(const a3ap::Session& session, const std::string& payer, const ToolDescriptor& tool);
  core::Value on_register(const core::Envelope& env);
  core::Value on_attach(const core::Envelope& env);
  core::Value on_lookup(const core::Envelope& env);
  core::Value on_invoke(const core::Envelope& env);
  core::Value on_workflow(const core::Envelope& env);

  ToolManager& manager_;
  a3ap::Ledger& ledger_;
  std::vector<TraceEntry> invocations_;
  std::uint64_t runs_ = 0;
  bool call_metering_ = false;
};

}  // namespace acp::atp

#include "acp/atp/tool_service.hpp"

#include "acp/core/crypto.hpp"

namespace acp::atp {

using core::Envelope;
using core::Value;

ToolService::ToolService(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys, ToolManager& manager,
                         a3ap::Ledger& ledger)
    : Peer(fabric, std::move(credential), std::move(keys)), manager_(manager), ledger_(ledger) {}

void ToolService::on_session_established(const a3ap::Session& session) { ledger_.attach_session(session); }

const a3ap::Session& ToolService::require_session(const std::string& party) const {
  const auto* s = session_with(party);
  if (s == nullptr) throw Error(Errc::NoSession, "no session with " + party);
  return *s;
}

void ToolService::bill(const a3ap::Session& session, const std::string& payer, const ToolDescriptor& tool) {
  if (call_metering_) ledger_.record_usage(session.session_id, payer, tool.provider, 1, a3ap::UnitKind::Calls, now());
  if (tool.cost_tokens_per_call <= 0) return;
  ledger_.record_usage(session.session_id, payer, tool.provider,
                       static_cast<std::uint64_t>(tool.cost_tokens_per_call), a3ap::UnitKind::Tokens, now());
}

Value ToolService::on_register(const Envelope& env) {
  require_session(env.sender);
  auto tool = ToolDescriptor::from_value(env.payload.at("tool"));
  if (tool.provider != env.sender) {
    throw Error(Errc::SignerMismatch, "tool " + tool.tool_id + " names provider " + tool.provider +
                                          " but was sent by " + env.sender);
  }
  manager_.register_tool(tool);
  return {{"op", "register"}, {"tool_id", tool.tool_id}};
}

Value ToolService::on_attach(const Envelope& env) {
  require_session(env.sender);
  auto resource = ResourceDescriptor::from_value(env.payload.at("resource"));
  manager_.attach_resource(resource);
  return {{"op", "attach"}, {"resource_id", resource.resource_id}};
}

Value ToolService::on_lookup(const Envelope& env) {
  require_session(env.sender);
  Value tools = Value::array();
  auto entry = [](const ToolManager::Found& f) {
    return Value{{"tool", f.tool.to_value()}, {"manager", f.manager->id()}, {"hops", f.hops}};
  };
  if (env.payload.contains("tool_id")) {
    auto id = env.payload.at("tool_id").get<std::string>();
    auto f = manager_.lookup(id);
    if (!f) throw Error(Errc::UnknownTool, "no tool '" + id + "'");
    tools.push_back(entry(*f));
  } else {
    std::set<std::string> tags;
    for (const auto& t : env.payload.value("tags", Value::array())) tags.insert(t.get<std::string>());
    for (const auto& f : manager_.find_by_tags(tags)) tools.push_back(entry(f));
  }
  return {{"op", "lookup"}, {"tools", tools}};
}

Value ToolService::on_invoke(const Envelope& env) {
  const auto& session = require_session(env.sender);
  auto id = env.payload.at("tool_id").get<std::string>();
  const auto& args = env.payload.contains("args") ? env.payload.at("args") : Value::object();
  TraceEntry t;
  t.step_id = id;
  t.attempt = 1;
  t.input_hash = core::to_hex(core::sha256(core::canonical_encode(args)));
  t.start = now();
  try {
    auto output = manager_.invoke(id, args);
    t.end = now();
    t.output_hash = core::to_hex(core::sha256(core::canonical_encode(output)));
    t.outcome = "success";
    invocations_.push_back(t);
    bill(session, env.sender, manager_.lookup(id)->tool);
    return {{"op", "invoke"}, {"tool_id", id}, {"output", output}, {"trace", t.to_value()}};
  } catch (const Error& e) {
    t.end = now();
    t.outcome = std::string(to_string(e.code()));
    invocations_.push_back(t);
    throw;
  }
}

Value ToolService::on_workflow(const Envelope& env) {
  const auto& session = require_session(env.sender);
  auto def = WorkflowDefinition::from_value(env.payload.at("workflow"));
  Context context("ctx-" + std::to_string(runs_ + 1), env.payload.value("scope", def.workflow_id));
  if (env.payload.contains("context")) {
    for (const auto& [k, v] : env.payload.at("context").items()) context.write(k, v);
  }
  ExecuteOptions options;
  options.run_id = "run-" + std::to_string(++runs_);
  options.start_tick = now();
  options.on_success = [&](const ToolDescriptor& tool) { bill(session, env.sender, tool); };
  auto run = execute_workflow(def, manager_, context, options);
  return {{"run", run.to_value()}, {"context", context.to_value()}};
}

void ToolService::handle(const Envelope& env) {
  const std::string& t = env.msg_type;
  std::string op = t == "tool_register"     ? "register"
                   : t == "resource_attach" ? "attach"
                   : t == "tool_lookup"     ? "lookup"
                   : t == "tool_invoke"     ? "invoke"
                   : t == "workflow_submit" ? "workflow"
                                            : "";
  if (op.empty()) return;
  std::string reply_type = op == "workflow" ? "workflow_status" : "tool_result";
  try {
    Value result;
    if (op == "register") result = on_register(env);
    if (op == "attach") result = on_attach(env);
    if (op == "lookup") result = on_lookup(env);
    if (op == "invoke") result = on_invoke(env);
    if (op == "workflow") result = on_workflow(env);
    reply(env, reply_type, result);
  } catch (const Error& e) {
    reply(env, reply_type, {{"op", op}, {"error", e.to_value()}});
  } catch (const std::exception& e) {
    reply(env, reply_type, {{"op", op}, {"error", Error(Errc::ParseError, e.what()).to_value()}});
  }
}

}  // namespace acp::atp

#include "acp/atp/tool_manager.hpp"

#include "acp/core/error.hpp"
#include "acp/core/ids.hpp"

#include <deque>
#include <mutex>

namespace acp::atp {
namespace {

constexpr std::pair<ResourceKind, std::string_view> kKinds[] = {
    {ResourceKind::Dataset, "dataset"},
    {ResourceKind::Api, "api"},
    {ResourceKind::Store, "store"},
};

core::Value tag_list(const std::set<std::string>& tags) {
  core::Value out = core::Value::array();
  for (const auto& t : tags) out.push_back(t);
  return out;
}

}  // namespace

std::string_view to_string(ResourceKind kind) noexcept {
  for (const auto& [k, n] : kKinds)
    if (k == kind) return n;
  return "dataset";
}

core::Value ToolDescriptor::to_value() const {
  return {{"tool_id", tool_id},
          {"provider", provider},
          {"semantic_tags", tag_list(semantic_tags)},
          {"operation", operation.to_value()},
          {"side_effecting", side_effecting},
          {"cost_tokens_per_call", cost_tokens_per_call},
          {"resource_id", resource_id}};
}

ToolDescriptor ToolDescriptor::from_value(const core::Value& v) {
  try {
    ToolDescriptor t;
    t.tool_id = v.at("tool_id").get<std::string>();
    t.provider = v.at("provider").get<std::string>();
    for (const auto& tag : v.at("semantic_tags")) t.semantic_tags.insert(tag.get<std::string>());
    t.operation = core::OperationSig::from_value(v.at("operation"));
    t.side_effecting = v.value("side_effecting", false);
    t.cost_tokens_per_call = v.value("cost_tokens_per_call", std::int64_t{0});
    t.resource_id = v.value("resource_id", std::string{});
    return t;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed tool descriptor: ") + e.what());
  }
}

core::ValidationReport validate_tool(const ToolDescriptor& tool) {
  core::ValidationReport r;
  if (!core::is_valid_tag(tool.tool_id)) r.add("tool_id", "tag_grammar", "tool ids follow the tag grammar");
  if (!core::is_agent_party(tool.provider) && !core::is_service_party(tool.provider)) {
    r.add("provider", "party", "provider must be an AgentId or ServiceId");
  }
  std::size_t i = 0;
  for (const auto& t : tool.semantic_tags) {
    if (!core::is_valid_tag(t)) r.add("semantic_tags[" + std::to_string(i) + "]", "tag_grammar");
    ++i;
  }
  if (tool.operation.name.empty()) r.add("operation.name", "non_empty");
  if (tool.cost_tokens_per_call < 0) r.add("cost_tokens_per_call", "non_negative");
  if (tool.resource_id.empty()) r.add("resource_id", "non_empty");
  return r;
}

core::Value ResourceDescriptor::to_value() const {
  return {{"resource_id", resource_id},
          {"kind", std::string(to_string(kind))},
          {"connector", connector},
          {"config", config},
          {"read_only", read_only}};
}

ResourceDescriptor ResourceDescriptor::from_value(const core::Value& v) {
  try {
    ResourceDescriptor r;
    r.resource_id = v.at("resource_id").get<std::string>();
    auto kind = v.value("kind", std::string("dataset"));
    bool known = false;
    for (const auto& [k, n] : kKinds) {
      if (n == kind) {
        r.kind = k;
        known = true;
      }
    }
    if (!known) throw Error(Errc::ParseError, "unknown resource kind '" + kind + "'");
    r.connector = v.at("connector").get<std::string>();
    r.config = v.value("config", core::Value::object());
    r.read_only = v.value("read_only", true);
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed resource descriptor: ") + e.what());
  }
}

ToolManager::ToolManager(std::string id, ConnectorRegistry& connectors) : id_(std::move(id)), connectors_(connectors) {}

void ToolManager::add_child(ToolManager& child) {
  child.parent_ = this;
  children_.push_back(&child);
}

void ToolManager::attach_resource(const ResourceDescriptor& resource) {
  if (!connectors_.has(resource.connector)) {
    throw Error(Errc::UnknownConnector, "resource " + resource.resource_id + " uses unknown connector '" +
                                            resource.connector + "'");
  }
  std::unique_lock lock(mu_);
  resources_[resource.resource_id] = resource;
}

void ToolManager::register_tool(const ToolDescriptor& tool) {
  auto report = validate_tool(tool);
  if (!report.ok()) throw Error(Errc::BadSchema, "tool descriptor is invalid", {{"report", report.to_value()}});
  std::unique_lock lock(mu_);
  if (tools_.contains(tool.tool_id)) throw Error(Errc::DuplicateTool, "tool " + tool.tool_id + " already registered");
  if (!resources_.contains(tool.resource_id)) {
    throw Error(Errc::UnknownResource, "tool " + tool.tool_id + " needs resource '" + tool.resource_id + "'");
  }
  tools_.emplace(tool.tool_id, tool);
}

std::optional<ToolManager::Found> ToolManager::lookup(const std::string& tool_id) const {
  std::deque<std::pair<const ToolManager*, std::size_t>> queue{{this, 0}};
  while (!queue.empty()) {
    auto [m, hops] = queue.front();
    queue.pop_front();
    {
      std::shared_lock lock(m->mu_);
      auto it = m->tools_.find(tool_id);
      if (it != m->tools_.end()) return Found{it->second, m, hops};
    }
    for (const auto* c : m->children_) queue.emplace_back(c, hops + 1);
  }
  return std::nullopt;
}

std::vector<ToolManager::Found> ToolManager::find_by_tags(const std::set<std::string>& tags) const {
  std::vector<Found> out;
  std::deque<std::pair<const ToolManager*, std::size_t>> queue{{this, 0}};
  while (!queue.empty()) {
    auto [m, hops] = queue.front();
    queue.pop_front();
    {
      std::shared_lock lock(m->mu_);
      for (const auto& [_, t] : m->tools_) {
        bool all = std::all_of(tags.begin(), tags.end(), [&](const auto& tag) { return t.semantic_tags.contains(tag); });
        if (all) out.push_back({t, m, hops});
      }
    }
    for (const auto* c : m->children_) queue.emplace_back(c, hops + 1);
  }
  return out;
}

core::Value ToolManager::run_local(const ToolDescriptor& tool, const core::Value& args) const {
  ResourceDescriptor resource;
  {
    std::shared_lock lock(mu_);
    auto it = resources_.find(tool.resource_id);
    if (it == resources_.end()) throw Error(Errc::UnknownResource, "resource '" + tool.resource_id + "' is gone");
    resource = it->second;
  }
  auto connector = connectors_.find(resource.connector);
  try {
    return connector->call(tool.operation.name, args, resource.config);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::ToolFailure, tool.tool_id + ": " + e.what());
  }
}

core::Value ToolManager::invoke(const std::string& tool_id, const core::Value& args) const {
  auto found = lookup(tool_id);
  if (!found) throw Error(Errc::UnknownTool, "no tool '" + tool_id + "' visible from " + id_);
  const auto& tool = found->tool;
  auto in_report = core::validate_value(tool.operation.input, args);
  if (!in_report.ok()) {
    const auto& first = in_report.violations().front();
    throw Error(Errc::ArgsSchemaMismatch, "arguments for " + tool_id + " do not match its input schema",
                {{"path", first.path}, {"report", in_report.to_value()}});
  }
  auto output = found->manager->run_local(tool, args);
  auto out_report = core::validate_value(tool.operation.output, output);
  if (!out_report.ok()) {
    throw Error(Errc::OutputSchemaViolation, tool_id + " returned a value outside its output schema",
                {{"report", out_report.to_value()}});
  }
  if (meter_) meter_(tool);
  return output;
}

}  // namespace acp::atp

#pragma once

#include "acp/atp/connector.hpp"
#include "acp/core/descriptor.hpp"
#include "acp/core/report.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

namespace acp::atp {

struct ToolDescriptor {
  std::string tool_id;
  std::string provider;  // AgentId or ServiceId
  std::set<std::string> semantic_tags;
  core::OperationSig operation;
  bool side_effecting = false;
  std::int64_t cost_tokens_per_call = 0;
  std::string resource_id;  // backing resource

  core::Value to_value() const;
  // Throws Error(BadSchema) for malformed schemas, Error(ParseError) otherwise.
  static ToolDescriptor from_value(const core::Value& v);
};

core::ValidationReport validate_tool(const ToolDescriptor& tool);

enum class ResourceKind { Dataset, Api, Store };
std::string_view to_string(ResourceKind kind) noexcept;

struct ResourceDescriptor {
  std::string resource_id;
  ResourceKind kind = ResourceKind::Dataset;
  std::string connector;
  core::Value config = core::Value::object();
  bool read_only = true;

  core::Value to_value() const;
  static ResourceDescriptor from_value(const core::Value& v);
};

// Tool registry and invoker. Managers form a tree: a tool registered at a
// child is visible from every ancestor (never downward).
class ToolManager {
 public:
  ToolManager(std::string id, ConnectorRegistry& connectors);

  const std::string& id() const noexcept { return id_; }
  // Links `child` under this manager; the child must outlive the link.
  void add_child(ToolManager& child);
  const ToolManager* parent() const noexcept { return parent_; }

  // Throws Error(UnknownConnector).
  void attach_resource(const ResourceDescriptor& resource);
  // Throws Error(DuplicateTool | BadSchema | UnknownResource).
  void register_tool(const ToolDescriptor& tool);

  struct Found {
    ToolDescriptor tool;
    const ToolManager* manager = nullptr;
    std::size_t hops = 0;
  };
  // Searches this manager, then its subtree breadth-first.
  std::optional<Found> lookup(const std::string& tool_id) const;
  std::vector<Found> find_by_tags(const std::set<std::string>& tags) const;

  // Validates args, runs the connector and validates the output. The meter
  // runs once per successful call. Throws Error(UnknownTool |
  // ArgsSchemaMismatch | ToolFailure | OutputSchemaViolation).
  core::Value invoke(const std::string& tool_id, const core::Value& args) const;

  using Meter = std::function<void(const ToolDescriptor&)>;
  void set_meter(Meter meter) { meter_ = std::move(meter); }

 private:
  core::Value run_local(const ToolDescriptor& tool, const core::Value& args) const;

  std::string id_;
  ConnectorRegistry& connectors_;
  ToolManager* parent_ = nullptr;
  std::vector<ToolManager*> children_;
  mutable std::shared_mutex mu_;
  std::map<std::string, ToolDescriptor> tools_;
  std::map<std::string, ResourceDescriptor> resources_;
  Meter meter_;
};

}  // namespace acp::atp

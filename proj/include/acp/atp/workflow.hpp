#pragma once

#include "acp/atp/context.hpp"
#include "acp/atp/tool_manager.hpp"
#include "acp/core/error.hpp"
#include "acp/core/report.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace acp::atp {

// Where a step input comes from:
//   {"literal": v}
//   {"context": key[, "path": "a.b"]}
//   {"step": step_id[, "path": "records.0.name"]}
struct Binding {
  enum class Kind { Literal, Context, Step };
  Kind kind = Kind::Literal;
  core::Value literal;
  std::string source;  // context key or step id
  std::string path;

  static Binding of_literal(core::Value v);
  static Binding of_context(std::string key, std::string path = {});
  static Binding of_step(std::string step_id, std::string path = {});

  core::Value to_value() const;
  static Binding from_value(const core::Value& v);
};

struct RetryPolicy {
  int max_attempts = 1;
  std::set<Errc> retriable{Errc::ToolFailure};

  core::Value to_value() const;
  static RetryPolicy from_value(const core::Value& v);
};

struct WorkflowStep {
  std::string step_id;
  std::string tool_id;
  std::map<std::string, Binding> inputs;  // input field -> source
  std::string output_key;                  // context key receiving the output
  RetryPolicy retry;

  core::Value to_value() const;
  static WorkflowStep from_value(const core::Value& v);
};

struct WorkflowDefinition {
  std::string workflow_id;
  std::vector<WorkflowStep> steps;
  std::vector<std::pair<std::string, std::string>> edges;  // from -> to

  const WorkflowStep* step(const std::string& id) const;
  // Transitive predecessors of `id` along the edges.
  std::set<std::string> ancestors(const std::string& id) const;

  core::Value to_value() const;
  static WorkflowDefinition from_value(const core::Value& v);
};

// Structural and type checks. Paths are "steps[i].inputs.<field>" or
// "edges[i]". `context` holds the seeded keys a run will start with; when
// absent, context bindings to keys no step writes are accepted.
core::ValidationReport validate_workflow(const WorkflowDefinition& def, const ToolManager& tools,
                                         const Context* context = nullptr);

enum class StepStatus { Pending, Running, Done, Failed };
enum class RunStatus { Running, Completed, Failed };
std::string_view to_string(StepStatus s) noexcept;
std::string_view to_string(RunStatus s) noexcept;

struct StepState {
  StepStatus status = StepStatus::Pending;
  int attempts = 0;
};

struct TraceEntry {
  std::string step_id;
  int attempt = 0;
  std::string input_hash;   // sha256 of the canonical args
  std::string output_hash;  // empty unless outcome is success
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::string outcome;  // "success" or an error code name

  core::Value to_value() const;
  static TraceEntry from_value(const core::Value& v);
  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct WorkflowRun {
  std::string run_id;
  std::string workflow_id;
  RunStatus status = RunStatus::Running;
  std::map<std::string, StepState> steps;
  std::vector<TraceEntry> trace;
  std::optional<Error> error;  // StepExhausted when Failed

  core::Value to_value() const;
};

struct ExecuteOptions {
  std::string run_id = "run-1";
  std::int64_t start_tick = 0;
  // Called once per successful attempt (metering hook).
  std::function<void(const ToolDescriptor&)> on_success;
};

// Runs the steps in dependency order; among ready steps the lowest step_id
// goes first. Outputs are written to `context` under each step's output
// key. Throws Error(InvalidWorkflow) when validation fails; a step that runs
// out of attempts fails the run with error StepExhausted.
WorkflowRun execute_workflow(const WorkflowDefinition& def, const ToolManager& tools, Context& context,
                             const ExecuteOptions& options = {});

}  // namespace acp::atp

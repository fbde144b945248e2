#pragma once

#include "acp/aip/task.hpp"
#include "acp/core/value.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace acp::aip {

// Substitutes "${a.b.0}" references against `vars`. A string that is
// exactly one reference becomes the referenced value; references inside
// longer strings are spliced in as text. Throws Error(ParseError) for
// unresolved references.
core::Value render(const core::Value& tmpl, const core::Value& vars);

// {"empty": x} | {"nonempty": x} | {"equals": [a, b]} | {"not": cond};
// operands are rendered first. A missing reference counts as empty.
bool holds(const core::Value& condition, const core::Value& vars);

struct ScriptStep {
  enum class Kind { Tool, Negotiate, Result, Fail };
  Kind kind = Kind::Result;
  std::optional<core::Value> when;
  std::string tool_id;
  core::Value args = core::Value::object();
  NegotiationKind negotiate = NegotiationKind::Proposal;
  core::Value params = core::Value::object();
  std::string note;
  std::string save;
  core::Value result = core::Value::object();

  core::Value to_value() const;
  static ScriptStep from_value(const core::Value& v);
};

// Table-driven worker behaviour.
//   {"accept_invites": true, "reject_assignments": 0, "accept_counters": true,
//    "steps": [
//      {"tool": "restaurant.search", "args": {...}, "save": "found"},
//      {"when": {"empty": "${found.records}"}, "negotiate": "reject", "note": "..."},
//      {"negotiate": "info_request", "params": {...}, "note": "...", "save": "pick"},
//      {"result": {...}}],
//    "by_sub_goal": {"<name>": [steps...]}}
// Steps see {"params", "inputs", "subtask"} plus every saved value.
struct WorkerScript {
  std::string script_id;
  bool accept_invites = true;
  int reject_assignments = 0;
  bool accept_counters = true;
  std::vector<ScriptStep> steps;
  std::map<std::string, std::vector<ScriptStep>> by_sub_goal;

  const std::vector<ScriptStep>& steps_for(const std::string& sub_goal) const;
  core::Value to_value() const;
  static WorkerScript from_value(const core::Value& v);
};

}  // namespace acp::aip

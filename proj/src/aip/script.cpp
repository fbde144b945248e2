#include "acp/aip/script.hpp"

#include "acp/core/error.hpp"
#include "acp/core/schema.hpp"

namespace acp::aip {

using core::Value;

namespace {

std::optional<Value> lookup(const Value& vars, const std::string& path) {
  return path.empty() ? std::optional(vars) : core::value_at(vars, path);
}

std::string as_text(const Value& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

Value render_string(const std::string& s, const Value& vars) {
  if (s.size() > 3 && s.starts_with("${") && s.ends_with("}") && s.find("${", 2) == std::string::npos) {
    auto path = s.substr(2, s.size() - 3);
    auto v = lookup(vars, path);
    if (!v) throw Error(Errc::ParseError, "unresolved reference ${" + path + "}");
    return *v;
  }
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto open = s.find("${", pos);
    if (open == std::string::npos) break;
    auto close = s.find('}', open);
    if (close == std::string::npos) break;
    out += s.substr(pos, open - pos);
    auto path = s.substr(open + 2, close - open - 2);
    auto v = lookup(vars, path);
    if (!v) throw Error(Errc::ParseError, "unresolved reference ${" + path + "}");
    out += as_text(*v);
    pos = close + 1;
  }
  out += s.substr(pos);
  return out;
}

bool is_empty(const Value& v) {
  if (v.is_array() || v.is_object() || v.is_string()) return v.empty();
  return false;
}

Value operand(const Value& tmpl, const Value& vars, bool& missing) {
  try {
    return render(tmpl, vars);
  } catch (const Error&) {
    missing = true;
    return Value::array();
  }
}

const std::pair<std::string_view, ScriptStep::Kind> kStepKeys[] = {
    {"tool", ScriptStep::Kind::Tool},
    {"negotiate", ScriptStep::Kind::Negotiate},
    {"result", ScriptStep::Kind::Result},
    {"fail", ScriptStep::Kind::Fail},
};

std::vector<ScriptStep> steps_from(const Value& list) {
  std::vector<ScriptStep> out;
  for (const auto& s : list) out.push_back(ScriptStep::from_value(s));
  return out;
}

Value steps_to(const std::vector<ScriptStep>& steps) {
  Value out = Value::array();
  for (const auto& s : steps) out.push_back(s.to_value());
  return out;
}

}  // namespace

Value render(const Value& tmpl, const Value& vars) {
  if (tmpl.is_string()) return render_string(tmpl.get<std::string>(), vars);
  if (tmpl.is_array()) {
    Value out = Value::array();
    for (const auto& v : tmpl) out.push_back(render(v, vars));
    return out;
  }
  if (tmpl.is_object()) {
    Value out = Value::object();
    for (const auto& [k, v] : tmpl.items()) out[k] = render(v, vars);
    return out;
  }
  return tmpl;
}

bool holds(const Value& condition, const Value& vars) {
  if (!condition.is_object() || condition.size() != 1) {
    throw Error(Errc::ParseError, "a condition is a single-key map");
  }
  const auto& [op, arg] = *condition.items().begin();
  bool missing = false;
  if (op == "empty" || op == "nonempty") {
    auto v = operand(arg, vars, missing);
    bool empty = missing || is_empty(v);
    return op == "empty" ? empty : !empty;
  }
  if (op == "equals") {
    if (!arg.is_array() || arg.size() != 2) throw Error(Errc::ParseError, "equals takes two operands");
    auto a = operand(arg[0], vars, missing);
    auto b = operand(arg[1], vars, missing);
    return !missing && a == b;
  }
  if (op == "not") return !holds(arg, vars);
  throw Error(Errc::ParseError, "unknown condition '" + op + "'");
}

Value ScriptStep::to_value() const {
  Value v = Value::object();
  switch (kind) {
    case Kind::Tool:
      v["tool"] = tool_id;
      v["args"] = args;
      break;
    case Kind::Negotiate:
      v["negotiate"] = std::string(to_string(negotiate));
      v["params"] = params;
      v["note"] = note;
      break;
    case Kind::Result: v["result"] = result; break;
    case Kind::Fail: v["fail"] = note; break;
  }
  if (!save.empty()) v["save"] = save;
  if (when) v["when"] = *when;
  return v;
}

ScriptStep ScriptStep::from_value(const Value& v) {
  if (!v.is_object()) throw Error(Errc::ParseError, "script step must be a map");
  ScriptStep s;
  int kinds = 0;
  for (const auto& [key, kind] : kStepKeys) {
    if (v.contains(key)) {
      s.kind = kind;
      ++kinds;
    }
  }
  if (kinds != 1) throw Error(Errc::ParseError, "script step needs exactly one of tool, negotiate, result, fail");
  try {
    if (v.contains("when")) s.when = v.at("when");
    s.save = v.value("save", std::string{});
    switch (s.kind) {
      case Kind::Tool:
        s.tool_id = v.at("tool").get<std::string>();
        s.args = v.value("args", Value::object());
        break;
      case Kind::Negotiate:
        s.negotiate = negotiation_kind_from_string(v.at("negotiate").get<std::string>());
        if (s.negotiate == NegotiationKind::Accept || s.negotiate == NegotiationKind::Counter) {
          throw Error(Errc::ParseError, "scripts open threads with proposal, info_request or reject");
        }
        s.params = v.value("params", Value::object());
        s.note = v.value("note", std::string{});
        break;
      case Kind::Result: s.result = v.at("result"); break;
      case Kind::Fail: s.note = v.at("fail").get<std::string>(); break;
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed script step: ") + e.what());
  }
  return s;
}

const std::vector<ScriptStep>& WorkerScript::steps_for(const std::string& sub_goal) const {
  auto it = by_sub_goal.find(sub_goal);
  return it != by_sub_goal.end() ? it->second : steps;
}

Value WorkerScript::to_value() const {
  Value by = Value::object();
  for (const auto& [k, s] : by_sub_goal) by[k] = steps_to(s);
  return {{"script_id", script_id},         {"accept_invites", accept_invites},
          {"reject_assignments", reject_assignments}, {"accept_counters", accept_counters},
          {"steps", steps_to(steps)},       {"by_sub_goal", by}};
}

WorkerScript WorkerScript::from_value(const Value& v) {
  if (!v.is_object()) throw Error(Errc::ParseError, "worker script must be a map");
  WorkerScript w;
  w.script_id = v.value("script_id", std::string{});
  w.accept_invites = v.value("accept_invites", true);
  w.reject_assignments = v.value("reject_assignments", 0);
  w.accept_counters = v.value("accept_counters", true);
  w.steps = steps_from(v.value("steps", Value::array()));
  const auto by_sub_goal = v.value("by_sub_goal", Value::object());
  for (const auto& [k, s] : by_sub_goal.items()) w.by_sub_goal[k] = steps_from(s);
  return w;
}

}  // namespace acp::aip

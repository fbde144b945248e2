#include "acp/atp/workflow.hpp"

#include "acp/core/crypto.hpp"

#include <algorithm>
#include <variant>

namespace acp::atp {

using core::Schema;
using core::SchemaKind;
using core::Value;

namespace {

std::string hash_value(const Value& v) {
  auto d = core::sha256(core::canonical_encode(v));
  return core::to_hex(d);
}

struct Open {};
struct Missing {};
using Lookup = std::variant<Schema, Open, Missing>;

// Like schema_at, but tells an open map apart from an absent field.
Lookup lookup_path(const Schema& root, std::string_view path) {
  const Schema* cur = &root;
  while (!path.empty()) {
    auto dot = path.find('.');
    auto seg = path.substr(0, dot);
    path = dot == std::string_view::npos ? std::string_view{} : path.substr(dot + 1);
    bool numeric = !seg.empty() && std::all_of(seg.begin(), seg.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (cur->kind == SchemaKind::List && numeric) {
      if (cur->items.empty()) return Open{};
      cur = &cur->items.front();
    } else if (cur->kind == SchemaKind::Map) {
      if (cur->fields.empty() && cur->open) return Open{};
      const auto* f = cur->field(seg);
      if (f == nullptr) return Missing{};
      cur = &f->schema;
    } else {
      return Missing{};
    }
  }
  return *cur;
}

bool compatible(const Schema& out, const Schema& in) {
  if (out.kind != in.kind) return false;
  if (out.kind == SchemaKind::List && !out.items.empty() && !in.items.empty()) {
    return compatible(out.items.front(), in.items.front());
  }
  return true;
}

const Schema* input_field(const ToolDescriptor& tool, const std::string& name, bool& closed) {
  const auto& in = tool.operation.input;
  closed = in.kind == SchemaKind::Map && !in.fields.empty();
  const auto* f = in.field(name);
  return f == nullptr ? nullptr : &f->schema;
}

void check_source_type(core::ValidationReport& r, const std::string& at, const ToolDescriptor& source,
                       const std::string& path, const Schema* target) {
  auto found = lookup_path(source.operation.output, path);
  if (std::holds_alternative<Missing>(found)) {
    r.add(at, "unknown_field", "output of " + source.tool_id + " has no field '" + path + "'");
    return;
  }
  if (target == nullptr || std::holds_alternative<Open>(found)) return;
  const auto& s = std::get<Schema>(found);
  if (!compatible(s, *target)) {
    r.add(at, "type_mismatch",
          std::string(core::to_string(s.kind)) + " bound to " + std::string(core::to_string(target->kind)));
  }
}

// Returns the first cycle as "a -> b -> a", or empty.
std::string find_cycle(const WorkflowDefinition& def) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& s : def.steps) adj[s.step_id];
  for (const auto& [a, b] : def.edges) {
    if (adj.contains(a) && adj.contains(b)) adj[a].push_back(b);
  }
  for (auto& [_, v] : adj) std::sort(v.begin(), v.end());
  std::map<std::string, int> color;
  std::vector<std::string> stack;
  std::string cycle;
  std::function<bool(const std::string&)> dfs = [&](const std::string& n) {
    color[n] = 1;
    stack.push_back(n);
    for (const auto& m : adj[n]) {
      if (color[m] == 1) {
        auto it = std::find(stack.begin(), stack.end(), m);
        for (; it != stack.end(); ++it) cycle += *it + " -> ";
        cycle += m;
        return true;
      }
      if (color[m] == 0 && dfs(m)) return true;
    }
    stack.pop_back();
    color[n] = 2;
    return false;
  };
  for (const auto& [n, _] : adj) {
    if (color[n] == 0 && dfs(n)) break;
  }
  return cycle;
}

}  // namespace

Binding Binding::of_literal(Value v) {
  Binding b;
  b.literal = std::move(v);
  return b;
}

Binding Binding::of_context(std::string key, std::string path) {
  Binding b;
  b.kind = Kind::Context;
  b.source = std::move(key);
  b.path = std::move(path);
  return b;
}

Binding Binding::of_step(std::string step_id, std::string path) {
  Binding b;
  b.kind = Kind::Step;
  b.source = std::move(step_id);
  b.path = std::move(path);
  return b;
}

Value Binding::to_value() const {
  if (kind == Kind::Literal) return {{"literal", literal}};
  Value v = {{kind == Kind::Context ? "context" : "step", source}};
  if (!path.empty()) v["path"] = path;
  return v;
}

Binding Binding::from_value(const Value& v) {
  if (!v.is_object()) throw Error(Errc::ParseError, "binding must be a map");
  if (v.contains("literal")) return of_literal(v.at("literal"));
  auto path = v.value("path", std::string{});
  if (v.contains("context") && v.at("context").is_string()) return of_context(v.at("context").get<std::string>(), path);
  if (v.contains("step") && v.at("step").is_string()) return of_step(v.at("step").get<std::string>(), path);
  throw Error(Errc::ParseError, "binding needs one of literal, context or step");
}

Value RetryPolicy::to_value() const {
  Value codes = Value::array();
  for (auto c : retriable) codes.push_back(std::string(to_string(c)));
  return {{"max_attempts", max_attempts}, {"retriable", codes}};
}

RetryPolicy RetryPolicy::from_value(const Value& v) {
  RetryPolicy p;
  p.max_attempts = v.value("max_attempts", 1);
  if (p.max_attempts < 1) throw Error(Errc::ParseError, "max_attempts must be at least 1");
  if (v.contains("retriable")) {
    p.retriable.clear();
    for (const auto& c : v.at("retriable")) p.retriable.insert(errc_from_string(c.get<std::string>()));
  }
  return p;
}

Value WorkflowStep::to_value() const {
  Value in = Value::object();
  for (const auto& [k, b] : inputs) in[k] = b.to_value();
  return {{"step_id", step_id}, {"tool_id", tool_id}, {"inputs", in}, {"output_key", output_key},
          {"retry", retry.to_value()}};
}

WorkflowStep WorkflowStep::from_value(const Value& v) {
  WorkflowStep s;
  s.step_id = v.at("step_id").get<std::string>();
  s.tool_id = v.at("tool_id").get<std::string>();
  if (v.contains("inputs")) {
    for (const auto& [k, b] : v.at("inputs").items()) s.inputs.emplace(k, Binding::from_value(b));
  }
  s.output_key = v.value("output_key", std::string{});
  if (v.contains("retry")) s.retry = RetryPolicy::from_value(v.at("retry"));
  return s;
}

const WorkflowStep* WorkflowDefinition::step(const std::string& id) const {
  for (const auto& s : steps)
    if (s.step_id == id) return &s;
  return nullptr;
}

std::set<std::string> WorkflowDefinition::ancestors(const std::string& id) const {
  std::set<std::string> seen;
  std::vector<std::string> todo{id};
  while (!todo.empty()) {
    auto n = todo.back();
    todo.pop_back();
    for (const auto& [a, b] : edges) {
      if (b == n && seen.insert(a).second) todo.push_back(a);
    }
  }
  seen.erase(id);
  return seen;
}

Value WorkflowDefinition::to_value() const {
  Value s = Value::array();
  for (const auto& st : steps) s.push_back(st.to_value());
  Value e = Value::array();
  for (const auto& [a, b] : edges) e.push_back(Value::array({a, b}));
  return {{"workflow_id", workflow_id}, {"steps", s}, {"edges", e}};
}

WorkflowDefinition WorkflowDefinition::from_value(const Value& v) {
  try {
    WorkflowDefinition d;
    d.workflow_id = v.at("workflow_id").get<std::string>();
    for (const auto& s : v.at("steps")) d.steps.push_back(WorkflowStep::from_value(s));
    if (v.contains("edges")) {
      for (const auto& e : v.at("edges")) {
        if (e.is_array() && e.size() == 2) {
          d.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        } else {
          d.edges.emplace_back(e.at("from").get<std::string>(), e.at("to").get<std::string>());
        }
      }
    }
    return d;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed workflow: ") + e.what());
  }
}

core::ValidationReport validate_workflow(const WorkflowDefinition& def, const ToolManager& tools,
                                         const Context* context) {
  core::ValidationReport r;
  if (def.steps.empty()) r.add("steps", "non_empty", "a workflow needs at least one step");

  std::map<std::string, std::size_t> index;
  std::map<std::string, std::string> writer;  // output key -> step id
  for (std::size_t i = 0; i < def.steps.size(); ++i) {
    const auto& s = def.steps[i];
    auto at = "steps[" + std::to_string(i) + "]";
    if (s.step_id.empty()) r.add(at + ".step_id", "non_empty");
    if (!index.emplace(s.step_id, i).second) r.add(at + ".step_id", "duplicate", s.step_id);
    if (!s.output_key.empty() && !writer.emplace(s.output_key, s.step_id).second) {
      r.add(at + ".output_key", "duplicate", s.output_key + " is written by two steps");
    }
    if (s.retry.max_attempts < 1) r.add(at + ".retry.max_attempts", "positive");
  }
  for (std::size_t i = 0; i < def.edges.size(); ++i) {
    const auto& [a, b] = def.edges[i];
    auto at = "edges[" + std::to_string(i) + "]";
    if (!index.contains(a)) r.add(at, "unknown_step", a);
    if (!index.contains(b)) r.add(at, "unknown_step", b);
  }
  auto cycle = find_cycle(def);
  if (!cycle.empty()) r.add("edges", "cycle", cycle);

  std::map<std::string, std::optional<ToolDescriptor>> tool_of;
  for (const auto& s : def.steps) {
    auto f = tools.lookup(s.tool_id);
    tool_of[s.step_id] = f ? std::optional(f->tool) : std::nullopt;
  }

  for (std::size_t i = 0; i < def.steps.size(); ++i) {
    const auto& s = def.steps[i];
    auto at = "steps[" + std::to_string(i) + "]";
    const auto& tool = tool_of[s.step_id];
    if (!tool) {
      r.add(at + ".tool_id", "unknown_tool", s.tool_id);
      continue;
    }
    auto ancestors = def.ancestors(s.step_id);
    bool closed = false;
    for (const auto& [name, b] : s.inputs) {
      auto bat = at + ".inputs." + name;
      const Schema* target = input_field(*tool, name, closed);
      if (target == nullptr && closed) {
        r.add(bat, "unknown_input", s.tool_id + " has no input '" + name + "'");
        continue;
      }
      switch (b.kind) {
        case Binding::Kind::Literal:
          if (target != nullptr) r.merge(core::validate_value(*target, b.literal, bat));
          break;
        case Binding::Kind::Step: {
          if (!index.contains(b.source)) {
            r.add(bat, "unknown_step", b.source);
          } else if (!ancestors.contains(b.source)) {
            r.add(bat, "not_upstream", b.source + " does not precede " + s.step_id);
          } else if (const auto& src = tool_of[b.source]) {
            check_source_type(r, bat, *src, b.path, target);
          }
          break;
        }
        case Binding::Kind::Context: {
          auto w = writer.find(b.source);
          if (w != writer.end()) {
            if (!ancestors.contains(w->second)) {
              r.add(bat, "not_upstream", b.source + " is written by " + w->second + " which does not precede " +
                                             s.step_id);
            } else if (const auto& src = tool_of[w->second]) {
              check_source_type(r, bat, *src, b.path, target);
            }
          } else if (context != nullptr) {
            auto e = context->read(b.source);
            if (!e) {
              r.add(bat, "unknown_key", b.source);
            } else {
              auto v = b.path.empty() ? std::optional(e->value) : core::value_at(e->value, b.path);
              if (!v) {
                r.add(bat, "unknown_field", b.source + "." + b.path);
              } else if (target != nullptr) {
                r.merge(core::validate_value(*target, *v, bat));
              }
            }
          }
          break;
        }
      }
    }
    if (tool->operation.input.kind == SchemaKind::Map) {
      for (const auto& f : tool->operation.input.fields) {
        if (f.required && !s.inputs.contains(f.name)) r.add(at + ".inputs." + f.name, "missing_input");
      }
    }
  }
  return r;
}

std::string_view to_string(StepStatus s) noexcept {
  switch (s) {
    case StepStatus::Pending: return "pending";
    case StepStatus::Running: return "running";
    case StepStatus::Done: return "done";
    case StepStatus::Failed: return "failed";
  }
  return "pending";
}

std::string_view to_string(RunStatus s) noexcept {
  switch (s) {
    case RunStatus::Running: return "running";
    case RunStatus::Completed: return "completed";
    case RunStatus::Failed: return "failed";
  }
  return "running";
}

Value TraceEntry::to_value() const {
  return {{"step_id", step_id}, {"attempt", attempt}, {"input_hash", input_hash}, {"output_hash", output_hash},
          {"start", start},     {"end", end},         {"outcome", outcome}};
}

TraceEntry TraceEntry::from_value(const Value& v) {
  TraceEntry t;
  t.step_id = v.at("step_id").get<std::string>();
  t.attempt = v.at("attempt").get<int>();
  t.input_hash = v.at("input_hash").get<std::string>();
  t.output_hash = v.at("output_hash").get<std::string>();
  t.start = v.at("start").get<std::int64_t>();
  t.end = v.at("end").get<std::int64_t>();
  t.outcome = v.at("outcome").get<std::string>();
  return t;
}

Value WorkflowRun::to_value() const {
  Value st = Value::object();
  for (const auto& [id, s] : steps) st[id] = {{"status", std::string(to_string(s.status))}, {"attempts", s.attempts}};
  Value tr = Value::array();
  for (const auto& t : trace) tr.push_back(t.to_value());
  Value v = {{"run_id", run_id}, {"workflow_id", workflow_id}, {"status", std::string(to_string(status))},
             {"steps", st},      {"trace", tr}};
  if (error) v["error"] = error->to_value();
  return v;
}

WorkflowRun execute_workflow(const WorkflowDefinition& def, const ToolManager& tools, Context& context,
                             const ExecuteOptions& options) {
  auto report = validate_workflow(def, tools, &context);
  if (!report.ok()) {
    throw Error(Errc::InvalidWorkflow, "workflow " + def.workflow_id + " is invalid", {{"report", report.to_value()}});
  }

  WorkflowRun run;
  run.run_id = options.run_id;
  run.workflow_id = def.workflow_id;
  std::map<std::string, std::size_t> waiting;
  std::map<std::string, std::vector<std::string>> next;
  for (const auto& s : def.steps) {
    run.steps[s.step_id];
    waiting[s.step_id] = 0;
  }
  for (const auto& [a, b] : def.edges) {
    ++waiting[b];
    next[a].push_back(b);
  }
  std::set<std::string> ready;
  for (const auto& [id, n] : waiting)
    if (n == 0) ready.insert(id);

  std::map<std::string, Value> outputs;
  std::int64_t tick = options.start_tick;

  while (!ready.empty()) {
    auto id = *ready.begin();
    ready.erase(ready.begin());
    const auto& step = *def.step(id);
    auto& state = run.steps[id];
    state.status = StepStatus::Running;
    auto ancestors = def.ancestors(id);

    std::optional<Error> failure;
    Value args = Value::object();
    try {
      for (const auto& [name, b] : step.inputs) {
        std::optional<Value> v;
        if (b.kind == Binding::Kind::Literal) {
          v = b.literal;
        } else if (b.kind == Binding::Kind::Step) {
          const auto& out = outputs.at(b.source);
          v = b.path.empty() ? std::optional(out) : core::value_at(out, b.path);
        } else {
          auto e = context.read(b.source);
          if (e && !e->written_by.empty() && !ancestors.contains(e->written_by)) {
            throw Error(Errc::InvalidWorkflow, "context key " + b.source + " was written by " + e->written_by +
                                                   " which does not precede " + id);
          }
          if (e) v = b.path.empty() ? std::optional(e->value) : core::value_at(e->value, b.path);
        }
        if (!v) throw Error(Errc::ArgsSchemaMismatch, "binding for '" + name + "' resolved to nothing",
                            {{"path", name}});
        args[name] = std::move(*v);
      }
    } catch (const Error& e) {
      failure = e;
    }
    auto input_hash = hash_value(args);

    bool done = false;
    while (!failure && !done) {
      ++state.attempts;
      TraceEntry t{id, state.attempts, input_hash, "", tick++, 0, "success"};
      try {
        auto out = tools.invoke(step.tool_id, args);
        t.end = tick++;
        t.output_hash = hash_value(out);
        run.trace.push_back(t);
        if (!step.output_key.empty()) context.write(step.output_key, out, id);
        outputs[id] = std::move(out);
        if (options.on_success) {
          if (auto f = tools.lookup(step.tool_id)) options.on_success(f->tool);
        }
        done = true;
      } catch (const Error& e) {
        t.end = tick++;
        t.outcome = std::string(to_string(e.code()));
        run.trace.push_back(t);
        if (!step.retry.retriable.contains(e.code()) || state.attempts >= step.retry.max_attempts) failure = e;
      }
    }

    if (failure) {
      state.status = StepStatus::Failed;
      run.status = RunStatus::Failed;
      run.error = Error(Errc::StepExhausted,
                        "step " + id + " failed after " + std::to_string(state.attempts) + " attempt(s)",
                        {{"step", id}, {"attempts", state.attempts}, {"cause", failure->to_value()}});
      return run;
    }
    state.status = StepStatus::Done;
    for (const auto& n : next[id]) {
      if (--waiting[n] == 0) ready.insert(n);
    }
  }
  run.status = RunStatus::Completed;
  return run;
}

}  // namespace acp::atp

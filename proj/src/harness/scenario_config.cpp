#include "acp/harness/scenario_config.hpp"

#include "acp/adp/query.hpp"
#include "acp/aip/script.hpp"
#include "acp/aip/task.hpp"
#include "acp/atp/tool_manager.hpp"
#include "acp/core/descriptor.hpp"
#include "acp/core/error.hpp"
#include "acp/core/report.hpp"

#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace acp::harness {
namespace {

using core::Value;

Value from_node(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    Value out = Value::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = from_node(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    Value out = Value::array();
    for (const auto& v : *a) out.push_back(from_node(v));
    return out;
  }
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return i->get();
  if (const auto* f = node.as_floating_point()) return f->get();
  if (const auto* b = node.as_boolean()) return b->get();
  std::ostringstream text;
  if (const auto* d = node.as_date()) text << d->get();
  if (const auto* t = node.as_time()) text << t->get();
  if (const auto* dt = node.as_date_time()) text << dt->get();
  return text.str();
}

Error config_error(const std::string& detail) { return Error(Errc::ConfigError, detail); }

std::vector<std::string> path_of(const Value& v, const std::string& what) {
  if (!v.is_array()) throw config_error(what + " must be a list of segments");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) throw config_error(what + " must be a list of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

Value path_value(const std::vector<std::string>& path) {
  Value out = Value::array();
  for (const auto& s : path) out.push_back(s);
  return out;
}

PrincipalSpec principal_from(const Value& v, const std::string& what, const std::string& default_owner) {
  if (!v.is_object()) throw config_error(what + " must be a table");
  PrincipalSpec p;
  p.name = v.value("name", std::string{});
  if (p.name.empty()) throw config_error(what + " needs a name");
  if (v.contains("registry")) p.registry = path_of(v.at("registry"), what + ".registry");
  p.owner = v.value("owner", default_owner);
  return p;
}

Value principal_value(const PrincipalSpec& p) {
  return {{"name", p.name}, {"registry", path_value(p.registry)}, {"owner", p.owner}};
}

template <typename T>
T number(const Value& v, const char* key, T fallback) {
  if (!v.contains(key)) return fallback;
  const auto& n = v.at(key);
  if (!n.is_number_integer() || (n.is_number_integer() && n.get<std::int64_t>() < 0 && std::is_unsigned_v<T>)) {
    throw config_error(std::string(key) + " must be a non-negative integer");
  }
  return n.get<T>();
}

}  // namespace

core::AgentId PrincipalSpec::agent_id() const { return core::AgentId{registry, name}; }

Value AgentSpec::to_value() const {
  Value v = principal_value(principal);
  v["script"] = script;
  v["descriptor"] = descriptor;
  return v;
}

Value parse_toml(const std::string& text, const std::string& source) {
  try {
    auto table = toml::parse(text, source);
    return from_node(table);
  } catch (const toml::parse_error& e) {
    std::ostringstream where;
    where << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw Error(Errc::ParseError, where.str());
  }
}

Value ScenarioConfig::to_value() const {
  Value regs = Value::array();
  for (const auto& r : registries) regs.push_back(path_value(r));
  Value agents_v = Value::array();
  for (const auto& a : agents) agents_v.push_back(a.to_value());
  Value scripts_v = Value::object();
  for (const auto& [k, s] : scripts) scripts_v[k] = s;
  Value replies_v = Value::object();
  for (const auto& [k, r] : replies) replies_v[k] = r;
  Value user_v = principal_value(user);
  user_v["replies"] = replies_v;
  Value pa = principal_value(personal_agent);
  pa["discover_limit"] = discover_limit;
  return {
      {"name", name},
      {"seed", seed},
      {"max_steps", max_steps},
      {"timeout", timeout},
      {"task_id", task_id},
      {"transport", transport},
      {"registry", {{"paths", regs}}},
      {"discovery", {{"id", discovery_id}, {"synonyms", synonyms}}},
      {"billing", billing.to_value()},
      {"user", user_v},
      {"personal_agent", pa},
      {"goal", goal},
      {"tools",
       {{"id", tool_service_id},
        {"fixtures", fixtures},
        {"call_metering", call_metering},
        {"resources", Value(resources)},
        {"tools", Value(tools)}}},
      {"agents", agents_v},
      {"scripts", scripts_v},
  };
}

ScenarioConfig ScenarioConfig::from_value(const Value& v, const std::filesystem::path& base_dir) {
  if (!v.is_object()) throw config_error("scenario config must be a table");
  ScenarioConfig c;
  try {
    c.name = v.value("name", std::string("scenario"));
    c.seed = number<std::uint64_t>(v, "seed", 42);
    c.max_steps = number<std::size_t>(v, "max_steps", 5000);
    c.timeout = number<std::int64_t>(v, "timeout", 50);
    c.task_id = v.value("task_id", std::string("task-1"));
    c.transport = v.value("transport", std::string("sim"));

    const auto reg = v.value("registry", Value::object());
    for (const auto& p : reg.value("paths", Value::array())) c.registries.push_back(path_of(p, "registry.paths"));
    if (c.registries.empty()) c.registries.push_back({"root"});

    const auto disc = v.value("discovery", Value::object());
    c.discovery_id = disc.value("id", c.discovery_id);
    c.synonyms = disc.value("synonyms", Value::object());

    const auto bill = v.value("billing", Value::object());
    c.billing.price_per_token = a3ap::Amount::parse(bill.value("price_per_token", std::string("0")));
    c.billing.price_per_call = a3ap::Amount::parse(bill.value("price_per_call", std::string("0")));

    if (!v.contains("user")) throw config_error("missing [user]");
    c.user = principal_from(v.at("user"), "user", "user");
    const auto replies = v.at("user").value("replies", Value::object());
    for (const auto& [k, r] : replies.items()) c.replies[k] = r;

    const auto pa = v.value("personal_agent", Value{{"name", "assistant"}});
    c.personal_agent = principal_from(pa, "personal_agent", c.user.owner);
    c.discover_limit = number<std::size_t>(pa, "discover_limit", 10);

    if (!v.contains("goal")) throw config_error("missing [goal]");
    c.goal = v.at("goal");

    const auto tools = v.value("tools", Value::object());
    c.tool_service_id = tools.value("id", c.tool_service_id);
    c.fixtures = tools.value("fixtures", std::string{});
    c.fixtures_dir = c.fixtures.empty() ? base_dir : base_dir / c.fixtures;
    c.call_metering = tools.value("call_metering", true);
    for (const auto& r : tools.value("resources", Value::array())) c.resources.push_back(r);
    for (const auto& t : tools.value("tools", Value::array())) c.tools.push_back(t);

    for (const auto& a : v.value("agents", Value::array())) {
      AgentSpec spec;
      spec.principal = principal_from(a, "agents[]", "owner");
      spec.script = a.value("script", std::string{});
      spec.descriptor = a.value("descriptor", Value::object());
      c.agents.push_back(std::move(spec));
    }
    const auto scripts = v.value("scripts", Value::object());
    for (const auto& [k, s] : scripts.items()) c.scripts[k] = s;
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    throw config_error(e.detail());
  } catch (const std::exception& e) {
    throw config_error(std::string("malformed scenario config: ") + e.what());
  }
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw config_error("cannot read " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Value v = file.extension() == ".json" ? core::canonical_decode(buf.str()) : parse_toml(buf.str(), file.string());
  return from_value(v, file.parent_path());
}

void ScenarioConfig::validate() const {
  core::ValidationReport r;
  std::set<std::vector<std::string>> known;
  for (std::size_t i = 0; i < registries.size(); ++i) {
    const auto& p = registries[i];
    auto at = "registry.paths[" + std::to_string(i) + "]";
    if (p.empty()) {
      r.add(at, "empty_path");
      continue;
    }
    if (p.size() > 1 && !known.contains(std::vector<std::string>(p.begin(), p.end() - 1))) {
      r.add(at, "orphan", "parent registry must be listed first");
    }
    if (!known.insert(p).second) r.add(at, "duplicate");
  }
  if (known.size() != 0 && (registries.front().size() != 1)) r.add("registry.paths[0]", "root", "first path is the root");

  std::set<std::string> names;
  auto check_principal = [&](const PrincipalSpec& p, const std::string& at) {
    if (!known.contains(p.registry)) r.add(at + ".registry", "unknown_registry", core::join_path(p.registry));
    try {
      core::parse_agent_id(p.agent_id().str());
    } catch (const Error& e) {
      r.add(at + ".name", "bad_name", e.detail());
    }
    if (!names.insert(p.agent_id().str()).second) r.add(at + ".name", "duplicate", p.agent_id().str());
  };
  check_principal(user, "user");
  check_principal(personal_agent, "personal_agent");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    auto at = "agents[" + std::to_string(i) + "]";
    const auto& a = agents[i];
    check_principal(a.principal, at);
    if (!scripts.contains(a.script)) r.add(at + ".script", "unknown_script", a.script);
    try {
      auto d = a.descriptor;
      d["agent"] = a.principal.agent_id().str();
      auto desc = core::CapabilityDescriptor::from_value(d);
      auto report = core::validate_descriptor(desc);
      if (!report.ok()) r.add(at + ".descriptor", "invalid", report.violations().front().path);
    } catch (const Error& e) {
      r.add(at + ".descriptor", "invalid", e.detail());
    }
  }
  for (const auto& [id, s] : scripts) {
    try {
      aip::WorkerScript::from_value(s);
    } catch (const Error& e) {
      r.add("scripts." + id, "invalid", e.detail());
    }
  }
  try {
    aip::Goal::from_value(goal);
  } catch (const Error& e) {
    r.add("goal", "invalid", e.detail());
  }
  try {
    adp::SynonymTable::from_value(synonyms);
  } catch (const Error& e) {
    r.add("discovery.synonyms", "invalid", e.detail());
  }
  if (transport != "sim" && transport != "socket") r.add("transport", "unknown", transport);

  std::set<std::string> resource_ids;
  for (std::size_t i = 0; i < resources.size(); ++i) {
    auto at = "tools.resources[" + std::to_string(i) + "]";
    try {
      auto res = atp::ResourceDescriptor::from_value(resources[i]);
      if (!resource_ids.insert(res.resource_id).second) r.add(at, "duplicate", res.resource_id);
      if (res.connector == "fixture") {
        auto file = fixtures_dir / res.config.value("file", std::string{});
        if (!std::filesystem::is_regular_file(file)) r.add(at + ".config.file", "missing_fixture", file.string());
      }
    } catch (const Error& e) {
      r.add(at, "invalid", e.detail());
    }
  }
  for (std::size_t i = 0; i < tools.size(); ++i) {
    auto at = "tools.tools[" + std::to_string(i) + "]";
    try {
      auto t = atp::ToolDescriptor::from_value(tools[i]);
      auto report = atp::validate_tool(t);
      if (!report.ok()) r.add(at, "invalid", report.violations().front().path);
      if (!t.resource_id.empty() && !resource_ids.contains(t.resource_id)) {
        r.add(at + ".resource_id", "unknown_resource", t.resource_id);
      }
    } catch (const Error& e) {
      r.add(at, "invalid", e.detail());
    }
  }
  if (!r.ok()) {
    const auto& first = r.violations().front();
    throw Error(Errc::ConfigError,
                "invalid scenario config: " + first.path + " (" + first.rule + ")" +
                    (first.detail.empty() ? "" : ": " + first.detail),
                {{"problems", r.to_value()}});
  }
}

}  // namespace acp::harness

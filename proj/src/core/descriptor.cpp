#include "acp/core/descriptor.hpp"

#include "acp/core/error.hpp"

#include <unordered_set>

namespace acp::core {
namespace {

constexpr const char* kFacetNames[] = {"perception", "decision", "action", "interaction"};

Value tags_value(const std::set<std::string>& tags) {
  Value v = Value::array();
  for (const auto& t : tags) v.push_back(t);
  return v;
}

std::set<std::string> tags_from(const Value& v, const char* where) {
  if (!v.is_array()) throw Error(Errc::ParseError, std::string(where) + " must be a list");
  std::set<std::string> out;
  for (const auto& t : v) {
    if (!t.is_string()) throw Error(Errc::ParseError, std::string(where) + " entries must be strings");
    out.insert(t.get<std::string>());
  }
  return out;
}

ExternalFacet& facet(ExternalCapabilities& e, int i) {
  switch (i) {
    case 0: return e.perception;
    case 1: return e.decision;
    case 2: return e.action;
    default: return e.interaction;
  }
}

const ExternalFacet& facet(const ExternalCapabilities& e, int i) {
  return facet(const_cast<ExternalCapabilities&>(e), i);
}

template <typename T>
T get_or(const Value& v, const char* key, T fallback) {
  auto it = v.find(key);
  if (it == v.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::ParseError, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

bool is_valid_tag(std::string_view tag) noexcept {
  if (tag.empty()) return false;
  bool need_char = true;
  for (char c : tag) {
    if (c == '.') {
      if (need_char) return false;
      need_char = true;
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      need_char = false;
    } else {
      return false;
    }
  }
  return !need_char;
}

Value OperationSig::to_value() const {
  return {{"name", name}, {"input", input.to_value()}, {"output", output.to_value()}};
}

OperationSig OperationSig::from_value(const Value& v) {
  if (!v.is_object()) throw Error(Errc::ParseError, "operation signature must be a map");
  OperationSig op;
  op.name = get_or<std::string>(v, "name", "");
  op.input = v.contains("input") ? Schema::from_value(v.at("input")) : Schema{};
  op.output = v.contains("output") ? Schema::from_value(v.at("output")) : Schema{};
  return op;
}

Value CapabilityDescriptor::to_value() const {
  Value ops = Value::array();
  for (const auto& op : interface) ops.push_back(op.to_value());
  Value ext = Value::object();
  for (int i = 0; i < 4; ++i) {
    const auto& f = facet(external, i);
    ext[kFacetNames[i]] = {{"description", f.description}, {"tags", tags_value(f.tags)}};
  }
  return {
      {"agent", agent.str()},
      {"capability_tags", tags_value(capability_tags)},
      {"interface", ops},
      {"external", ext},
      {"internal",
       {{"task_planning", internal.task_planning},
        {"memory", {{"short", internal.short_term_memory}, {"long", internal.long_term_memory}}},
        {"self_evolution", internal.self_evolution}}},
      {"qos",
       {{"latency_ms_p50", qos.latency_ms_p50}, {"cost_per_call_tokens", qos.cost_per_call_tokens}}},
      {"version", version},
  };
}

CapabilityDescriptor CapabilityDescriptor::from_value(const Value& v) {
  if (!v.is_object()) throw Error(Errc::ParseError, "descriptor must be a map");
  CapabilityDescriptor d;
  d.agent = parse_agent_id(get_or<std::string>(v, "agent", ""));
  if (v.contains("capability_tags")) d.capability_tags = tags_from(v.at("capability_tags"), "capability_tags");
  if (v.contains("interface")) {
    const auto& ops = v.at("interface");
    if (!ops.is_array()) throw Error(Errc::ParseError, "interface must be a list");
    for (const auto& op : ops) d.interface.push_back(OperationSig::from_value(op));
  }
  if (v.contains("external")) {
    const auto& ext = v.at("external");
    for (int i = 0; i < 4; ++i) {
      auto it = ext.find(kFacetNames[i]);
      if (it == ext.end()) continue;
      auto& f = facet(d.external, i);
      f.description = get_or<std::string>(*it, "description", "");
      if (it->contains("tags")) f.tags = tags_from(it->at("tags"), kFacetNames[i]);
    }
  }
  if (v.contains("internal")) {
    const auto& in = v.at("internal");
    d.internal.task_planning = get_or<bool>(in, "task_planning", false);
    d.internal.self_evolution = get_or<bool>(in, "self_evolution", false);
    if (in.contains("memory")) {
      d.internal.short_term_memory = get_or<bool>(in.at("memory"), "short", false);
      d.internal.long_term_memory = get_or<bool>(in.at("memory"), "long", false);
    }
  }
  if (v.contains("qos")) {
    d.qos.latency_ms_p50 = get_or<std::int64_t>(v.at("qos"), "latency_ms_p50", 0);
    d.qos.cost_per_call_tokens = get_or<std::int64_t>(v.at("qos"), "cost_per_call_tokens", 0);
  }
  d.version = get_or<std::int64_t>(v, "version", 1);
  return d;
}

ValidationReport validate_descriptor(const CapabilityDescriptor& d) {
  ValidationReport report;
  if (d.capability_tags.empty()) {
    report.add("capability_tags", "non_empty", "at least one capability tag is required");
  }
  std::size_t i = 0;
  for (const auto& tag : d.capability_tags) {
    if (!is_valid_tag(tag)) {
      report.add("capability_tags[" + std::to_string(i) + "]", "tag_grammar", "bad tag '" + tag + "'");
    }
    ++i;
  }
  std::unordered_set<std::string> seen;
  for (std::size_t k = 0; k < d.interface.size(); ++k) {
    const auto& name = d.interface[k].name;
    const auto path = "interface[" + std::to_string(k) + "].name";
    if (!is_valid_segment(name) && !is_valid_tag(name)) {
      report.add(path, "op_name", "operation name must be a tag or segment");
    }
    if (!seen.insert(name).second) report.add(path, "unique_op", "duplicate operation '" + name + "'");
  }
  for (int f = 0; f < 4; ++f) {
    std::size_t t = 0;
    for (const auto& tag : facet(d.external, f).tags) {
      if (!is_valid_tag(tag)) {
        report.add("external." + std::string(kFacetNames[f]) + ".tags[" + std::to_string(t) + "]",
                   "tag_grammar", "bad tag '" + tag + "'");
      }
      ++t;
    }
  }
  if (d.qos.latency_ms_p50 < 0) report.add("qos.latency_ms_p50", "non_negative");
  if (d.qos.cost_per_call_tokens < 0) report.add("qos.cost_per_call_tokens", "non_negative");
  if (d.version < 1) report.add("version", "min_version", "version must be >= 1");
  return report;
}

}  // namespace acp::core

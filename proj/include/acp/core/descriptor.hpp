#pragma once

#include "acp/core/ids.hpp"
#include "acp/core/report.hpp"
#include "acp/core/schema.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace acp::core {

// Dotted lowercase tag: [a-z0-9]+(\.[a-z0-9]+)*
bool is_valid_tag(std::string_view tag) noexcept;

struct OperationSig {
  std::string name;
  Schema input;
  Schema output;

  Value to_value() const;
  static OperationSig from_value(const Value& v);
};

struct ExternalFacet {
  std::string description;
  std::set<std::string> tags;
};

// Perception, decision, action and interaction facets.
struct ExternalCapabilities {
  ExternalFacet perception;
  ExternalFacet decision;
  ExternalFacet action;
  ExternalFacet interaction;
};

struct InternalCapabilities {
  bool task_planning = false;
  bool short_term_memory = false;
  bool long_term_memory = false;
  bool self_evolution = false;
};

struct QoS {
  std::int64_t latency_ms_p50 = 0;
  std::int64_t cost_per_call_tokens = 0;
};

struct CapabilityDescriptor {
  AgentId agent;
  std::set<std::string> capability_tags;
  std::vector<OperationSig> interface;
  ExternalCapabilities external;
  InternalCapabilities internal;
  QoS qos;
  std::int64_t version = 1;

  Value to_value() const;
  // Structural decoding only; semantic rules live in validate_descriptor.
  // Throws Error(ParseError) for wrongly typed documents.
  static CapabilityDescriptor from_value(const Value& v);
};

// Lists every broken invariant, never just the first.
ValidationReport validate_descriptor(const CapabilityDescriptor& d);

}  // namespace acp::core

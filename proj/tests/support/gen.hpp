#pragma once
// Random generators shared by the property tests.

#include "acp/core/descriptor.hpp"
#include "acp/core/ids.hpp"

#include <random>
#include <string>
#include <vector>

namespace acp::testing {

inline std::string random_segment(std::mt19937_64& rng, std::size_t max_len = 12) {
  static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789-";
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, sizeof(kAlphabet) - 2);
  std::string s;
  auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s.push_back(kAlphabet[pick(rng)]);
  return s;
}

inline std::string random_tag(std::mt19937_64& rng) {
  static constexpr char kAlphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789";
  std::uniform_int_distribution<int> parts(1, 3);
  std::uniform_int_distribution<int> len(1, 8);
  std::uniform_int_distribution<std::size_t> pick(0, sizeof(kAlphabet) - 2);
  std::string tag;
  auto n = parts(rng);
  for (int p = 0; p < n; ++p) {
    if (p) tag.push_back('.');
    auto l = len(rng);
    for (int i = 0; i < l; ++i) tag.push_back(kAlphabet[pick(rng)]);
  }
  return tag;
}

inline core::AgentId random_agent_id(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> depth(1, 4);
  core::AgentId id;
  auto d = depth(rng);
  for (int i = 0; i < d; ++i) id.registry_path.push_back(random_segment(rng));
  id.agent_name = random_segment(rng);
  return id;
}

inline core::Schema random_schema(std::mt19937_64& rng, int depth = 0) {
  std::uniform_int_distribution<int> kind(0, depth >= 2 ? 3 : 5);
  switch (kind(rng)) {
    case 0: return core::Schema::scalar(core::SchemaKind::String);
    case 1: return core::Schema::scalar(core::SchemaKind::Int);
    case 2: return core::Schema::scalar(core::SchemaKind::Float);
    case 3: return core::Schema::scalar(core::SchemaKind::Bool);
    case 4: return core::Schema::list_of(random_schema(rng, depth + 1));
    default: {
      std::vector<core::SchemaField> fields;
      std::uniform_int_distribution<int> n(0, 3);
      auto count = n(rng);
      for (int i = 0; i < count; ++i) {
        fields.push_back({"f" + std::to_string(i), random_schema(rng, depth + 1), (rng() & 1) == 0});
      }
      return core::Schema::record(std::move(fields));
    }
  }
}

inline core::CapabilityDescriptor random_descriptor(std::mt19937_64& rng) {
  core::CapabilityDescriptor d;
  d.agent = random_agent_id(rng);
  std::uniform_int_distribution<int> ntags(1, 5);
  auto nt = ntags(rng);
  for (int i = 0; i < nt; ++i) d.capability_tags.insert(random_tag(rng));
  std::uniform_int_distribution<int> nops(0, 3);
  auto no = nops(rng);
  for (int i = 0; i < no; ++i) {
    d.interface.push_back({"op" + std::to_string(i), random_schema(rng), random_schema(rng)});
  }
  d.external.perception = {"reads " + random_segment(rng), {random_tag(rng)}};
  d.external.action.description = "acts";
  d.internal.task_planning = (rng() & 1) != 0;
  d.internal.long_term_memory = (rng() & 1) != 0;
  d.qos.latency_ms_p50 = static_cast<std::int64_t>(rng() % 1000);
  d.qos.cost_per_call_tokens = static_cast<std::int64_t>(rng() % 100);
  d.version = 1 + static_cast<std::int64_t>(rng() % 20);
  return d;
}

}  // namespace acp::testing

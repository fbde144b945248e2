#pragma once

#include "acp/adp/query.hpp"

#include <map>
#include <shared_mutex>
#include <span>

namespace acp::adp {

struct CatalogEntry {
  core::AgentId agent;
  core::CapabilityDescriptor descriptor;
  std::string source_registry;
  std::int64_t as_of_version = 0;
  bool stale = false;
};

// Discovery-side view of registered capabilities, fed by capability_event
// notices. Versions are monotonic per agent; a delete leaves a tombstone at
// its version so older upserts arriving late stay ignored.
class Catalog {
 public:
  Catalog() = default;
  Catalog(const Catalog& other);
  Catalog& operator=(const Catalog& other);

  // Applies a capability_event payload
  //   {registry, agent, kind: upsert|delete, version, descriptor?}.
  // Returns false when the event is older than what is held.
  // Throws Error(ParseError) for malformed events.
  bool apply_event(const core::Value& event);
  bool upsert(const core::CapabilityDescriptor& descriptor, const std::string& registry);
  bool remove(const core::AgentId& agent, std::int64_t version, const std::string& registry);
  void mark_stale(const std::string& registry, bool stale = true);

  std::optional<CatalogEntry> find(const core::AgentId& agent) const;
  std::vector<CatalogEntry> entries() const;  // ordered by AgentId
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, CatalogEntry> entries_;
  std::map<std::string, std::int64_t> tombstones_;
};

// Scores every non-stale entry, filters by mode and sorts by
// (score desc, AgentId asc), truncated to q.limit. An entry must match at
// least one query tag; strict mode also needs full required coverage.
std::vector<MatchResult> discover(std::span<const CatalogEntry> entries, const Query& q,
                                  const ScoringWeights& w = {});
std::vector<MatchResult> discover(const Catalog& catalog, const Query& q, const ScoringWeights& w = {});

}  // namespace acp::adp

#pragma once
// Brute-force reference for discovery ranking, written without reusing the
// library's scoring code.

#include "acp/adp/catalog.hpp"

#include <algorithm>
#include <random>
#include <tuple>

namespace acp::testing {

struct OracleHit {
  std::string agent;
  double score;
};

inline std::vector<OracleHit> discover_oracle(const std::vector<adp::CatalogEntry>& entries, const adp::Query& q) {
  std::vector<OracleHit> hits;
  for (const auto& e : entries) {
    if (e.stale) continue;
    const auto& tags = e.descriptor.capability_tags;
    double req_hits = 0, opt_hits = 0;
    for (const auto& t : q.required_tags) req_hits += tags.count(t) ? 1 : 0;
    for (const auto& t : q.optional_tags) opt_hits += tags.count(t) ? 1 : 0;
    double coverage = q.required_tags.empty() ? 1.0 : req_hits / static_cast<double>(q.required_tags.size());
    double bonus = q.optional_tags.empty() ? 1.0 : opt_hits / static_cast<double>(q.optional_tags.size());
    double score = 0.7 * coverage + 0.3 * bonus;
    if (q.max_cost_tokens && e.descriptor.qos.cost_per_call_tokens > *q.max_cost_tokens) score = 0.0;
    if (q.max_latency_ms && e.descriptor.qos.latency_ms_p50 > *q.max_latency_ms) score = 0.0;
    if (!(score > 0.0)) continue;
    if (req_hits + opt_hits == 0) continue;
    if (q.mode == adp::MatchMode::Strict && coverage != 1.0) continue;
    hits.push_back({e.agent.str(), score});
  }
  std::sort(hits.begin(), hits.end(), [](const OracleHit& a, const OracleHit& b) {
    return std::make_tuple(-a.score, a.agent) < std::make_tuple(-b.score, b.agent);
  });
  if (hits.size() > static_cast<std::size_t>(q.limit)) hits.resize(static_cast<std::size_t>(q.limit));
  return hits;
}

inline const std::vector<std::string>& tag_pool() {
  static const std::vector<std::string> pool{"restaurant.search", "restaurant.recommend", "restaurant.booking",
                                             "travel.planning",   "maps.route",           "weather",
                                             "finance.quote",     "calendar.slot"};
  return pool;
}

inline std::vector<adp::CatalogEntry> random_catalog(std::mt19937_64& rng, std::size_t max_entries = 100) {
  std::vector<adp::CatalogEntry> out;
  std::size_t n = rng() % (max_entries + 1);
  const auto& pool = tag_pool();
  for (std::size_t i = 0; i < n; ++i) {
    adp::CatalogEntry e;
    // Few distinct names so equal scores and shared prefixes are common.
    e.agent = core::AgentId{{"root", (rng() & 1) ? "eu" : "us"}, "agent-" + std::to_string(i)};
    e.descriptor.agent = e.agent;
    std::size_t nt = 1 + rng() % 4;
    for (std::size_t k = 0; k < nt; ++k) e.descriptor.capability_tags.insert(pool[rng() % pool.size()]);
    e.descriptor.qos.cost_per_call_tokens = static_cast<std::int64_t>(rng() % 60);
    e.descriptor.qos.latency_ms_p50 = static_cast<std::int64_t>(rng() % 500);
    e.descriptor.version = 1 + static_cast<std::int64_t>(rng() % 3);
    e.as_of_version = e.descriptor.version;
    e.source_registry = "svc://registry/root";
    e.stale = rng() % 10 == 0;
    out.push_back(std::move(e));
  }
  return out;
}

inline adp::Query random_query(std::mt19937_64& rng) {
  const auto& pool = tag_pool();
  adp::Query q;
  std::size_t nr = rng() % 4, no = rng() % 3;
  for (std::size_t k = 0; k < nr; ++k) q.required_tags.insert(pool[rng() % pool.size()]);
  for (std::size_t k = 0; k < no; ++k) q.optional_tags.insert(pool[rng() % pool.size()]);
  if (q.required_tags.empty() && q.optional_tags.empty()) q.required_tags.insert(pool[rng() % pool.size()]);
  if (rng() % 3 == 0) q.max_cost_tokens = static_cast<std::int64_t>(rng() % 60);
  if (rng() % 3 == 0) q.max_latency_ms = static_cast<std::int64_t>(rng() % 500);
  q.limit = 1 + static_cast<std::int64_t>(rng() % 15);
  q.mode = (rng() & 1) ? adp::MatchMode::Strict : adp::MatchMode::Loose;
  return q;
}

}  // namespace acp::testing

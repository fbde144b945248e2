#include "acp/adp/catalog.hpp"

#include "acp/core/error.hpp"

#include <algorithm>
#include <mutex>

namespace acp::adp {

Catalog::Catalog(const Catalog& other) {
  std::shared_lock lock(other.mu_);
  entries_ = other.entries_;
  tombstones_ = other.tombstones_;
}

Catalog& Catalog::operator=(const Catalog& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  entries_ = other.entries_;
  tombstones_ = other.tombstones_;
  return *this;
}

bool Catalog::apply_event(const core::Value& event) {
  try {
    const auto registry = event.at("registry").get<std::string>();
    const auto kind = event.at("kind").get<std::string>();
    const auto version = event.at("version").get<std::int64_t>();
    if (kind == "upsert") {
      auto d = core::CapabilityDescriptor::from_value(event.at("descriptor"));
      if (d.version != version || d.agent.str() != event.at("agent").get<std::string>()) {
        throw Error(Errc::ParseError, "event header disagrees with its descriptor");
      }
      return upsert(d, registry);
    }
    if (kind == "delete") return remove(core::parse_agent_id(event.at("agent").get<std::string>()), version, registry);
    throw Error(Errc::ParseError, "unknown capability event kind '" + kind + "'");
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed capability event: ") + e.what());
  }
}

bool Catalog::upsert(const core::CapabilityDescriptor& descriptor, const std::string& registry) {
  std::unique_lock lock(mu_);
  const auto key = descriptor.agent.str();
  if (auto t = tombstones_.find(key); t != tombstones_.end() && descriptor.version <= t->second) return false;
  if (auto e = entries_.find(key); e != entries_.end() && descriptor.version <= e->second.as_of_version) return false;
  tombstones_.erase(key);
  entries_[key] = CatalogEntry{descriptor.agent, descriptor, registry, descriptor.version, false};
  return true;
}

bool Catalog::remove(const core::AgentId& agent, std::int64_t version, const std::string& /*registry*/) {
  std::unique_lock lock(mu_);
  const auto key = agent.str();
  if (auto t = tombstones_.find(key); t != tombstones_.end() && version <= t->second) return false;
  if (auto e = entries_.find(key); e != entries_.end()) {
    if (version < e->second.as_of_version) return false;
    entries_.erase(e);
  }
  tombstones_[key] = version;
  return true;
}

void Catalog::mark_stale(const std::string& registry, bool stale) {
  std::unique_lock lock(mu_);
  for (auto& [_, e] : entries_) {
    if (e.source_registry == registry) e.stale = stale;
  }
}

std::optional<CatalogEntry> Catalog::find(const core::AgentId& agent) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(agent.str());
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<CatalogEntry> Catalog::entries() const {
  std::shared_lock lock(mu_);
  std::vector<CatalogEntry> out;
  out.reserve(entries_.size());
  for (const auto& [_, e] : entries_) out.push_back(e);
  return out;
}

std::size_t Catalog::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<MatchResult> discover(std::span<const CatalogEntry> entries, const Query& q, const ScoringWeights& w) {
  std::vector<MatchResult> out;
  for (const auto& e : entries) {
    if (e.stale) continue;
    auto m = evaluate(q, e.descriptor, w);
    if (m.score <= 0.0) continue;
    if (m.matched_required.empty() && m.matched_optional.empty()) continue;
    if (q.mode == MatchMode::Strict && m.coverage != 1.0) continue;
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(), [](const MatchResult& a, const MatchResult& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.agent.str() < b.agent.str();
  });
  if (out.size() > static_cast<std::size_t>(q.limit)) out.resize(static_cast<std::size_t>(q.limit));
  return out;
}

std::vector<MatchResult> discover(const Catalog& catalog, const Query& q, const ScoringWeights& w) {
  auto entries = catalog.entries();
  return discover(std::span<const CatalogEntry>(entries), q, w);
}

}  // namespace acp::adp

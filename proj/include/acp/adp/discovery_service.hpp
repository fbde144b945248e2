#pragma once

#include "acp/a3ap/peer.hpp"
#include "acp/adp/catalog.hpp"

#include <set>

namespace acp::adp {

// A discovery server. On start() it pulls a snapshot from every configured
// registry, which also subscribes it to their capability_event notices.
//   discover_request {query | text[, mode, limit]} ->
//     discover_result {query, results} or {error}
class DiscoveryService : public a3ap::Peer {
 public:
  DiscoveryService(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys,
                   std::vector<std::string> registries, SynonymTable synonyms = {}, ScoringWeights weights = {});

  void start();
  // True once every registry has answered the initial sync.
  bool synced() const noexcept { return synced_.size() == registries_.size(); }

  const Catalog& catalog() const noexcept { return catalog_; }
  const SynonymTable& synonyms() const noexcept { return synonyms_; }
  const ScoringWeights& weights() const noexcept { return weights_; }
  std::size_t events_applied() const noexcept { return events_applied_; }

 protected:
  void handle(const core::Envelope& env) override;

 private:
  bool known_registry(const std::string& party) const;

  std::vector<std::string> registries_;
  std::set<std::string> synced_;
  SynonymTable synonyms_;
  ScoringWeights weights_;
  Catalog catalog_;
  std::size_t events_applied_ = 0;
};

}  // namespace acp::adp

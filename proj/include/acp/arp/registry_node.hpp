#pragma once

#include "acp/a3ap/credential.hpp"
#include "acp/arp/anchor_log.hpp"
#include "acp/core/descriptor.hpp"
#include "acp/core/envelope.hpp"
#include "acp/core/ids.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

namespace acp::arp {

enum class RecordStatus { Active, Suspended, Deregistered };
std::string_view to_string(RecordStatus s) noexcept;
RecordStatus record_status_from_string(std::string_view s);

struct Compliance {
  bool approved = true;
  std::string reason;  // set when rejected
};

struct AgentRecord {
  a3ap::Credential credential;
  core::CapabilityDescriptor descriptor;
  RecordStatus status = RecordStatus::Active;
  std::int64_t registered_at = 0;
  std::int64_t updated_at = 0;
  std::uint64_t anchor_seq = 0;
  Compliance compliance;

  core::AgentId agent() const { return descriptor.agent; }
  core::Value to_value() const;
  static AgentRecord from_value(const core::Value& v);
};

// The four registration phases, in order.
enum class Phase { IdentityVerification, MetadataSubmission, ComplianceReview, Anchoring };
std::string_view to_string(Phase p) noexcept;
inline constexpr Phase kPhases[] = {Phase::IdentityVerification, Phase::MetadataSubmission,
                                    Phase::ComplianceReview, Phase::Anchoring};

struct PhaseEvent {
  Phase phase;
  bool ok = true;
  std::string detail;

  core::Value to_value() const;
};
using PhaseObserver = std::function<void(const PhaseEvent&)>;

struct RegistrationResult {
  core::AgentId agent;
  std::int64_t version = 0;
  std::uint64_t anchor_seq = 0;
  core::Digest anchor_head{};
  std::vector<PhaseEvent> phases;

  core::Value to_value() const;
};

// Returns a rejection reason, or nothing to approve.
using CompliancePolicy = std::function<std::optional<std::string>(const core::CapabilityDescriptor&)>;
CompliancePolicy tag_denylist(std::set<std::string> denied);

// Next hop for a resolution request.
struct ForwardToChild {
  std::string segment;
  std::string service;
};
struct ForwardToParent {
  std::string service;
};
using Route = std::variant<AgentRecord, ForwardToChild, ForwardToParent>;

// One registry server: the records whose AgentId lives under exactly this
// path, plus the anchor log of every accepted state change. Writes are
// serialized; reads may run concurrently.
class RegistryNode {
 public:
  RegistryNode(std::vector<std::string> path, const a3ap::TrustStore& trust, CompliancePolicy policy = {});

  const std::vector<std::string>& path() const noexcept { return path_; }
  std::string path_str() const { return core::join_path(path_); }

  void set_parent(std::string service) { parent_ = std::move(service); }
  const std::optional<std::string>& parent() const noexcept { return parent_; }
  // Throws Error(BadSegment) for an invalid or duplicate segment.
  void add_child(const std::string& segment, std::string service);
  const std::map<std::string, std::string>& children() const noexcept { return children_; }

  // Phases run in order and stop at the first failure. The observer sees
  // each phase as it completes (or fails); failures throw with
  // data.phases listing the phases attempted.
  // Throws Error(WrongNode | IdentityRejected | DescriptorInvalid |
  // DuplicateAgent | StaleVersion | ComplianceRejected).
  RegistrationResult register_agent(const core::Envelope& request, std::int64_t now,
                                    const PhaseObserver& observer = {});
  RegistrationResult register_agent(const a3ap::Credential& credential, const core::CapabilityDescriptor& descriptor,
                                    std::int64_t now, const PhaseObserver& observer = {});

  // Throws Error(NotRegistered | SignerMismatch | StaleVersion | DescriptorInvalid).
  RegistrationResult update_capabilities(const std::string& signer, const core::CapabilityDescriptor& descriptor,
                                         std::int64_t now);
  // Throws Error(NotRegistered | SignerMismatch).
  RegistrationResult deregister(const std::string& signer, const core::AgentId& agent, std::int64_t now);

  // Throws Error(NotFound | UnknownChild).
  Route route(const core::AgentId& id) const;
  // Active local record; throws Error(NotFound).
  AgentRecord resolve_local(const core::AgentId& id) const;

  std::optional<AgentRecord> find(const core::AgentId& id) const;
  std::vector<AgentRecord> records() const;
  AnchorLog anchor() const;

  core::Value snapshot() const;
  void save(const std::string& file) const;
  // Restores records and anchor log from a snapshot.
  void restore(const core::Value& snapshot);
  void load(const std::string& file);

 private:
  core::Digest anchor_change(std::string_view op, AgentRecord& record);

  std::vector<std::string> path_;
  const a3ap::TrustStore& trust_;
  CompliancePolicy policy_;
  std::optional<std::string> parent_;
  std::map<std::string, std::string> children_;

  mutable std::shared_mutex mu_;
  std::map<std::string, AgentRecord> records_;  // by AgentId string
  AnchorLog anchor_;
};

// In-process registry tree used for resolution without messaging.
class RegistryTree {
 public:
  explicit RegistryTree(const a3ap::TrustStore& trust) : trust_(trust) {}

  // Adds a node; its parent path must already exist (except the root).
  RegistryNode& add_node(const std::vector<std::string>& path);
  RegistryNode* node(const std::vector<std::string>& path);
  std::size_t depth() const noexcept { return depth_; }

  struct Resolution {
    AgentRecord record;
    std::size_t hops = 0;
  };
  // Follows route() from the start node. Throws Error(NotFound | UnknownChild
  // | UnknownRegistry).
  Resolution resolve(const std::vector<std::string>& start, const core::AgentId& id) const;

  static std::string service_for(const std::vector<std::string>& path);

 private:
  const a3ap::TrustStore& trust_;
  std::map<std::string, std::unique_ptr<RegistryNode>> nodes_;  // by service id
  std::size_t depth_ = 0;
};

}  // namespace acp::arp

#include "acp/arp/registry_node.hpp"

#include "acp/a3ap/signing.hpp"
#include "acp/core/error.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

namespace acp::arp {
namespace {

constexpr std::pair<RecordStatus, std::string_view> kStatusNames[] = {
    {RecordStatus::Active, "active"},
    {RecordStatus::Suspended, "suspended"},
    {RecordStatus::Deregistered, "deregistered"},
};

constexpr std::pair<Phase, std::string_view> kPhaseNames[] = {
    {Phase::IdentityVerification, "identity_verification"},
    {Phase::MetadataSubmission, "metadata_submission"},
    {Phase::ComplianceReview, "compliance_review"},
    {Phase::Anchoring, "anchoring"},
};

// Collects phase events and forwards them to the caller's observer.
class PhaseTrace {
 public:
  explicit PhaseTrace(const PhaseObserver& observer) : observer_(observer) {}

  void pass(Phase p) { emit({p, true, {}}); }

  [[noreturn]] void fail(Phase p, Errc code, const std::string& detail, core::Value data = core::Value::object()) {
    emit({p, false, detail});
    data["phases"] = to_value();
    throw Error(code, detail, std::move(data));
  }

  core::Value to_value() const {
    core::Value out = core::Value::array();
    for (const auto& e : events_) out.push_back(e.to_value());
    return out;
  }

  std::vector<PhaseEvent> events() const { return events_; }

 private:
  void emit(PhaseEvent e) {
    events_.push_back(e);
    if (observer_) observer_(e);
  }

  const PhaseObserver& observer_;
  std::vector<PhaseEvent> events_;
};

}  // namespace

std::string_view to_string(RecordStatus s) noexcept {
  for (const auto& [k, n] : kStatusNames)
    if (k == s) return n;
  return "active";
}

RecordStatus record_status_from_string(std::string_view s) {
  for (const auto& [k, n] : kStatusNames)
    if (n == s) return k;
  throw Error(Errc::ParseError, "unknown record status '" + std::string(s) + "'");
}

std::string_view to_string(Phase p) noexcept {
  for (const auto& [k, n] : kPhaseNames)
    if (k == p) return n;
  return "identity_verification";
}

core::Value PhaseEvent::to_value() const {
  core::Value v{{"phase", std::string(to_string(phase))}, {"ok", ok}};
  if (!detail.empty()) v["detail"] = detail;
  return v;
}

core::Value RegistrationResult::to_value() const {
  core::Value phases_v = core::Value::array();
  for (const auto& p : phases) phases_v.push_back(p.to_value());
  return {{"agent", agent.str()},
          {"version", version},
          {"anchor_seq", anchor_seq},
          {"anchor_head", core::to_hex(anchor_head)},
          {"phases", phases_v}};
}

core::Value AgentRecord::to_value() const {
  core::Value comp{{"approved", compliance.approved}};
  if (!compliance.reason.empty()) comp["reason"] = compliance.reason;
  return {{"credential", credential.to_value()},
          {"descriptor", descriptor.to_value()},
          {"status", std::string(to_string(status))},
          {"registered_at", registered_at},
          {"updated_at", updated_at},
          {"anchor_seq", anchor_seq},
          {"compliance", comp}};
}

AgentRecord AgentRecord::from_value(const core::Value& v) {
  try {
    AgentRecord r;
    r.credential = a3ap::Credential::from_value(v.at("credential"));
    r.descriptor = core::CapabilityDescriptor::from_value(v.at("descriptor"));
    r.status = record_status_from_string(v.at("status").get<std::string>());
    r.registered_at = v.at("registered_at").get<std::int64_t>();
    r.updated_at = v.at("updated_at").get<std::int64_t>();
    r.anchor_seq = v.at("anchor_seq").get<std::uint64_t>();
    const auto& c = v.at("compliance");
    r.compliance.approved = c.at("approved").get<bool>();
    if (c.contains("reason")) r.compliance.reason = c.at("reason").get<std::string>();
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed agent record: ") + e.what());
  }
}

CompliancePolicy tag_denylist(std::set<std::string> denied) {
  return [denied = std::move(denied)](const core::CapabilityDescriptor& d) -> std::optional<std::string> {
    for (const auto& t : d.capability_tags) {
      if (denied.contains(t)) return "tag '" + t + "' is not permitted";
    }
    return std::nullopt;
  };
}

RegistryNode::RegistryNode(std::vector<std::string> path, const a3ap::TrustStore& trust, CompliancePolicy policy)
    : path_(std::move(path)), trust_(trust), policy_(std::move(policy)) {
  if (path_.empty()) throw Error(Errc::EmptyPath, "registry path must be non-empty");
  for (std::size_t i = 0; i < path_.size(); ++i) {
    if (!core::is_valid_segment(path_[i])) {
      throw Error(Errc::BadSegment, "invalid registry segment '" + path_[i] + "'", {{"index", i}});
    }
  }
}

void RegistryNode::add_child(const std::string& segment, std::string service) {
  if (!core::is_valid_segment(segment)) throw Error(Errc::BadSegment, "invalid child segment '" + segment + "'");
  if (children_.contains(segment)) throw Error(Errc::BadSegment, "duplicate child segment '" + segment + "'");
  children_.emplace(segment, std::move(service));
}

core::Digest RegistryNode::anchor_change(std::string_view op, AgentRecord& record) {
  record.anchor_seq = anchor_.size() + 1;
  auto hash = core::sha256(core::canonical_encode({{"op", std::string(op)}, {"record", record.to_value()}}));
  return anchor_.append(hash).head;
}

RegistrationResult RegistryNode::register_agent(const core::Envelope& request, std::int64_t now,
                                                const PhaseObserver& observer) {
  a3ap::Credential cred;
  try {
    cred = a3ap::Credential::from_value(request.payload.at("credential"));
  } catch (const std::exception& e) {
    PhaseTrace trace(observer);
    trace.fail(Phase::IdentityVerification, Errc::IdentityRejected, std::string("unreadable credential: ") + e.what());
  }
  if (request.sender != cred.agent || !a3ap::verify_envelope(request, cred.public_key)) {
    PhaseTrace trace(observer);
    trace.fail(Phase::IdentityVerification, Errc::IdentityRejected,
               "request is not signed by the credential subject");
  }
  core::CapabilityDescriptor desc;
  try {
    desc = core::CapabilityDescriptor::from_value(request.payload.at("descriptor"));
  } catch (const std::exception& e) {
    // Identity is checked first so a malformed descriptor still reports
    // the phases in order.
    PhaseTrace trace(observer);
    if (!a3ap::verify_credential(cred, trust_)) {
      trace.fail(Phase::IdentityVerification, Errc::IdentityRejected, "credential does not verify");
    }
    trace.pass(Phase::IdentityVerification);
    core::ValidationReport report;
    report.add("descriptor", "parse", e.what());
    trace.fail(Phase::MetadataSubmission, Errc::DescriptorInvalid, "descriptor is malformed",
               {{"report", report.to_value()}});
  }
  return register_agent(cred, desc, now, observer);
}

RegistrationResult RegistryNode::register_agent(const a3ap::Credential& credential,
                                                const core::CapabilityDescriptor& descriptor, std::int64_t now,
                                                const PhaseObserver& observer) {
  std::unique_lock lock(mu_);
  core::AgentId subject;
  bool subject_ok = true;
  try {
    subject = core::parse_agent_id(credential.agent);
  } catch (const Error&) {
    subject_ok = false;
  }
  if (subject_ok && subject.registry_path != path_) {
    throw Error(Errc::WrongNode, credential.agent + " does not belong to registry " + path_str(),
                {{"node", path_str()}, {"agent", credential.agent}});
  }

  PhaseTrace trace(observer);
  if (!subject_ok || !a3ap::verify_credential(credential, trust_)) {
    trace.fail(Phase::IdentityVerification, Errc::IdentityRejected,
               "credential for " + credential.agent + " does not verify under a trusted authority");
  }
  trace.pass(Phase::IdentityVerification);

  auto report = core::validate_descriptor(descriptor);
  if (descriptor.agent != subject) report.add("agent", "subject_mismatch", "descriptor names a different agent");
  if (!report.ok()) {
    trace.fail(Phase::MetadataSubmission, Errc::DescriptorInvalid, "descriptor failed validation",
               {{"report", report.to_value()}});
  }
  auto existing = records_.find(subject.str());
  if (existing != records_.end()) {
    if (existing->second.status != RecordStatus::Deregistered) {
      trace.fail(Phase::MetadataSubmission, Errc::DuplicateAgent, subject.str() + " is already registered");
    }
    if (descriptor.version <= existing->second.descriptor.version) {
      trace.fail(Phase::MetadataSubmission, Errc::StaleVersion,
                 "re-registration needs a version above " + std::to_string(existing->second.descriptor.version));
    }
  }
  trace.pass(Phase::MetadataSubmission);

  if (policy_) {
    if (auto reason = policy_(descriptor)) {
      trace.fail(Phase::ComplianceReview, Errc::ComplianceRejected, *reason, {{"reason", *reason}});
    }
  }
  trace.pass(Phase::ComplianceReview);

  AgentRecord record;
  record.credential = credential;
  record.descriptor = descriptor;
  record.status = RecordStatus::Active;
  record.registered_at = now;
  record.updated_at = now;
  auto head = anchor_change("register", record);
  records_[subject.str()] = record;
  trace.pass(Phase::Anchoring);

  return {subject, descriptor.version, record.anchor_seq, head, trace.events()};
}

RegistrationResult RegistryNode::update_capabilities(const std::string& signer,
                                                     const core::CapabilityDescriptor& descriptor, std::int64_t now) {
  std::unique_lock lock(mu_);
  auto it = records_.find(descriptor.agent.str());
  if (it == records_.end() || it->second.status != RecordStatus::Active) {
    throw Error(Errc::NotRegistered, descriptor.agent.str() + " has no active record here");
  }
  auto& record = it->second;
  if (signer != record.credential.agent) {
    throw Error(Errc::SignerMismatch, signer + " cannot update " + record.credential.agent);
  }
  if (descriptor.version <= record.descriptor.version) {
    throw Error(Errc::StaleVersion, "version " + std::to_string(descriptor.version) + " is not above " +
                                        std::to_string(record.descriptor.version));
  }
  auto report = core::validate_descriptor(descriptor);
  if (!report.ok()) throw Error(Errc::DescriptorInvalid, "descriptor failed validation", {{"report", report.to_value()}});
  if (policy_) {
    if (auto reason = policy_(descriptor)) throw Error(Errc::ComplianceRejected, *reason, {{"reason", *reason}});
  }
  auto updated = record;
  updated.descriptor = descriptor;
  updated.updated_at = std::max(now, updated.registered_at);
  auto head = anchor_change("update", updated);
  record = updated;
  return {descriptor.agent, descriptor.version, record.anchor_seq, head, {}};
}

RegistrationResult RegistryNode::deregister(const std::string& signer, const core::AgentId& agent, std::int64_t now) {
  std::unique_lock lock(mu_);
  auto it = records_.find(agent.str());
  if (it == records_.end() || it->second.status == RecordStatus::Deregistered) {
    throw Error(Errc::NotRegistered, agent.str() + " is not registered here");
  }
  auto& record = it->second;
  if (signer != record.credential.agent) {
    throw Error(Errc::SignerMismatch, signer + " cannot deregister " + record.credential.agent);
  }
  auto updated = record;
  updated.status = RecordStatus::Deregistered;
  updated.updated_at = std::max(now, updated.registered_at);
  auto head = anchor_change("deregister", updated);
  record = updated;
  return {agent, record.descriptor.version, record.anchor_seq, head, {}};
}

AgentRecord RegistryNode::resolve_local(const core::AgentId& id) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(id.str());
  if (it == records_.end() || it->second.status != RecordStatus::Active) {
    throw Error(Errc::NotFound, id.str() + " is not registered", {{"agent", id.str()}});
  }
  return it->second;
}

Route RegistryNode::route(const core::AgentId& id) const {
  const auto& target = id.registry_path;
  if (target == path_) return resolve_local(id);
  bool below = target.size() > path_.size() && std::equal(path_.begin(), path_.end(), target.begin());
  if (below) {
    const auto& seg = target[path_.size()];
    auto it = children_.find(seg);
    if (it == children_.end()) {
      throw Error(Errc::UnknownChild, "registry " + path_str() + " has no child '" + seg + "'",
                  {{"agent", id.str()}, {"segment", seg}});
    }
    return ForwardToChild{seg, it->second};
  }
  if (!parent_) throw Error(Errc::NotFound, id.str() + " is outside this registry tree", {{"agent", id.str()}});
  return ForwardToParent{*parent_};
}

std::optional<AgentRecord> RegistryNode::find(const core::AgentId& id) const {
  std::shared_lock lock(mu_);
  auto it = records_.find(id.str());
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<AgentRecord> RegistryNode::records() const {
  std::shared_lock lock(mu_);
  std::vector<AgentRecord> out;
  for (const auto& [_, r] : records_) out.push_back(r);
  return out;
}

AnchorLog RegistryNode::anchor() const {
  std::shared_lock lock(mu_);
  return anchor_;
}

core::Value RegistryNode::snapshot() const {
  std::shared_lock lock(mu_);
  core::Value recs = core::Value::array();
  for (const auto& [_, r] : records_) recs.push_back(r.to_value());
  core::Value kids = core::Value::object();
  for (const auto& [seg, svc] : children_) kids[seg] = svc;
  core::Value v{{"path", path_str()}, {"records", recs}, {"anchor", anchor_.to_value()}, {"children", kids}};
  if (parent_) v["parent"] = *parent_;
  return v;
}

void RegistryNode::save(const std::string& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(Errc::ConfigError, "cannot write snapshot '" + file + "'");
  out << core::canonical_encode(snapshot());
}

void RegistryNode::restore(const core::Value& snap) {
  if (!snap.is_object() || snap.value("path", std::string()) != path_str()) {
    throw Error(Errc::ParseError, "snapshot does not belong to registry " + path_str());
  }
  std::map<std::string, AgentRecord> records;
  for (const auto& r : snap.at("records")) {
    auto rec = AgentRecord::from_value(r);
    records[rec.agent().str()] = rec;
  }
  auto log = AnchorLog::from_value(snap.at("anchor"));
  if (!verify_anchor(log)) throw Error(Errc::ParseError, "snapshot anchor log does not verify");
  std::unique_lock lock(mu_);
  records_ = std::move(records);
  anchor_ = std::move(log);
  if (snap.contains("parent")) parent_ = snap.at("parent").get<std::string>();
  if (snap.contains("children")) {
    children_.clear();
    for (const auto& [seg, svc] : snap.at("children").items()) children_[seg] = svc.get<std::string>();
  }
}

void RegistryNode::load(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::ConfigError, "cannot open snapshot '" + file + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  restore(core::canonical_decode(ss.str()));
}

std::string RegistryTree::service_for(const std::vector<std::string>& path) {
  return core::ServiceId{"registry", path}.str();
}

RegistryNode& RegistryTree::add_node(const std::vector<std::string>& path) {
  auto svc = service_for(path);
  if (nodes_.contains(svc)) throw Error(Errc::BadSegment, "registry " + svc + " already exists");
  auto node = std::make_unique<RegistryNode>(path, trust_);
  if (path.size() > 1) {
    std::vector<std::string> parent_path(path.begin(), path.end() - 1);
    auto* parent = this->node(parent_path);
    if (!parent) throw Error(Errc::UnknownRegistry, "parent of " + svc + " does not exist");
    parent->add_child(path.back(), svc);
    node->set_parent(service_for(parent_path));
  }
  depth_ = std::max(depth_, path.size() - 1);
  auto& ref = *node;
  nodes_.emplace(svc, std::move(node));
  return ref;
}

RegistryNode* RegistryTree::node(const std::vector<std::string>& path) {
  auto it = nodes_.find(service_for(path));
  return it == nodes_.end() ? nullptr : it->second.get();
}

RegistryTree::Resolution RegistryTree::resolve(const std::vector<std::string>& start, const core::AgentId& id) const {
  auto current = service_for(start);
  std::size_t hops = 0;
  for (;;) {
    auto it = nodes_.find(current);
    if (it == nodes_.end()) throw Error(Errc::UnknownRegistry, "no registry " + current);
    auto route = it->second->route(id);
    if (auto* rec = std::get_if<AgentRecord>(&route)) return {*rec, hops};
    if (auto* child = std::get_if<ForwardToChild>(&route)) {
      current = child->service;
    } else {
      current = std::get<ForwardToParent>(route).service;
    }
    if (++hops > 4 * nodes_.size() + 4) throw Error(Errc::NotFound, "resolution of " + id.str() + " does not converge");
  }
}

}  // namespace acp::arp

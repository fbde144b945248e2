#include "acp/atp/context.hpp"

namespace acp::atp {

Context::Context(const Context& other) {
  std::lock_guard lock(other.mu_);
  context_id_ = other.context_id_;
  scope_ = other.scope_;
  entries_ = other.entries_;
  history_ = other.history_;
}

Context& Context::operator=(const Context& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  context_id_ = other.context_id_;
  scope_ = other.scope_;
  entries_ = other.entries_;
  history_ = other.history_;
  return *this;
}

std::uint64_t Context::write(const std::string& key, core::Value value, const std::string& written_by) {
  std::lock_guard lock(mu_);
  auto& e = entries_[key];
  e.value = std::move(value);
  e.written_by = written_by;
  ++e.version;
  history_.push_back({key, e.version, written_by});
  return e.version;
}

std::optional<ContextEntry> Context::read(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::map<std::string, ContextEntry> Context::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::vector<Context::Write> Context::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

core::Value Context::to_value() const {
  std::lock_guard lock(mu_);
  core::Value entries = core::Value::object();
  for (const auto& [k, e] : entries_) {
    entries[k] = {{"value", e.value}, {"written_by", e.written_by}, {"version", e.version}};
  }
  return {{"context_id", context_id_}, {"scope", scope_}, {"entries", entries}};
}

}  // namespace acp::atp

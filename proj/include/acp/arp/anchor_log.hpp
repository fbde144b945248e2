#pragma once

#include "acp/core/crypto.hpp"
#include "acp/core/value.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace acp::arp {

struct AnchorEntry {
  std::uint64_t seq = 0;
  core::Digest record_hash{};
  core::Digest prev_head{};
  core::Digest head{};  // SHA-256(prev_head || record_hash)

  core::Value to_value() const;
  static AnchorEntry from_value(const core::Value& v);
  friend bool operator==(const AnchorEntry&, const AnchorEntry&) = default;
};

// SHA-256 of the empty string.
const core::Digest& genesis_head();

// Append-only hash chain over registry state changes.
class AnchorLog {
 public:
  const AnchorEntry& append(const core::Digest& record_hash);

  const std::vector<AnchorEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  core::Digest head() const { return entries_.empty() ? genesis_head() : entries_.back().head; }

  core::Value to_value() const;
  // No integrity check here; use verify_anchor.
  static AnchorLog from_value(const core::Value& v);

 private:
  std::vector<AnchorEntry> entries_;
};

// Recomputes the chain from genesis; true iff seqs are dense from 1 and every
// prev_head/head matches.
bool verify_anchor(std::span<const AnchorEntry> entries) noexcept;
inline bool verify_anchor(const AnchorLog& log) noexcept { return verify_anchor(log.entries()); }

}  // namespace acp::arp

#pragma once

#include "acp/a3ap/handshake.hpp"
#include "acp/core/value.hpp"

#include <cstdint>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace acp::a3ap {

// Fixed-point decimal with 6 fractional digits, stored as integer micros.
class Amount {
 public:
  constexpr Amount() = default;
  static constexpr Amount from_micros(std::int64_t micros) {
    Amount a;
    a.micros_ = micros;
    return a;
  }
  // "0.001", "12", "0.010000"; more than 6 fractional digits is rejected.
  static Amount parse(std::string_view text);

  constexpr std::int64_t micros() const noexcept { return micros_; }
  std::string str() const;  // always 6 fractional digits

  friend constexpr Amount operator+(Amount a, Amount b) { return from_micros(a.micros_ + b.micros_); }
  Amount& operator+=(Amount other) {
    micros_ += other.micros_;
    return *this;
  }
  friend constexpr auto operator<=>(Amount, Amount) = default;

 private:
  std::int64_t micros_ = 0;
};

enum class UnitKind { Tokens, Calls };
std::string_view to_string(UnitKind kind) noexcept;
UnitKind unit_kind_from_string(std::string_view s);

struct LedgerEntry {
  std::uint64_t entry_id = 0;
  std::string session_id;
  std::string payer;
  std::string payee;
  std::uint64_t units = 0;
  UnitKind unit_kind = UnitKind::Tokens;
  std::int64_t at = 0;

  core::Value to_value() const;
  static LedgerEntry from_value(const core::Value& v);
};

struct BillingPolicy {
  Amount price_per_token;
  Amount price_per_call;

  core::Value to_value() const;
  static BillingPolicy from_value(const core::Value& v);
};

// Append-only usage ledger. Appends are serialized; the append order defines
// entry ids (dense from 1).
class Ledger {
 public:
  Ledger() = default;
  Ledger(const Ledger& other);
  Ledger& operator=(const Ledger& other);

  void attach_session(const Session& session);
  bool has_session(const std::string& session_id) const;

  // Throws Error(NoSession | ZeroUnits).
  LedgerEntry record_usage(const std::string& session_id, const std::string& payer, const std::string& payee,
                           std::uint64_t units, UnitKind unit_kind, std::int64_t at);

  std::vector<LedgerEntry> entries() const;
  std::uint64_t total(const std::string& payer, const std::string& payee, UnitKind kind) const;
  std::set<std::string> payers() const;

  core::Value to_value() const;
  static Ledger from_value(const core::Value& v);
  void save(const std::string& path) const;
  static Ledger load(const std::string& path);

 private:
  mutable std::mutex mu_;
  std::set<std::string> sessions_;
  std::vector<LedgerEntry> entries_;
};

// Charge of one entry under a policy (units * unit price).
Amount charge(const LedgerEntry& entry, const BillingPolicy& policy);

// Sum of the payer's token entries * price_per_token plus call entries *
// price_per_call. Exact; an empty ledger invoices 0.
Amount invoice(const Ledger& ledger, const BillingPolicy& policy, const std::string& payer);
Amount invoice(std::span<const LedgerEntry> entries, const BillingPolicy& policy, const std::string& payer);

}  // namespace acp::a3ap

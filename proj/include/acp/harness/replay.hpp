#pragma once

#include "acp/a3ap/ledger.hpp"
#include "acp/core/report.hpp"
#include "acp/harness/scenario.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace acp::harness {

// Outcome of re-validating a transcript. Violation paths name the offending
// delivery as "seq=<n>" where one exists. Rules: hash, signature,
// unknown_sender, aip_order, transition, registration, anchor, phase_order,
// invoice.
struct Verdict {
  core::ValidationReport report;
  std::map<std::string, a3ap::Amount> invoice;  // recomputed from the messages

  bool clean() const noexcept { return report.ok(); }
  core::Value to_value() const;
};

// Per-payer charges implied by the message record alone: every successful
// tool invocation (direct or inside a workflow) costs the tool's tokens at
// the configured token price, plus the call price when call metering is on.
std::map<std::string, a3ap::Amount> invoice_from_messages(const Transcript& transcript);

Verdict replay(const Transcript& transcript);
// Throws Error(ParseError) when the file does not parse.
Verdict replay_file(const std::filesystem::path& file);

}  // namespace acp::harness

#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace acp {

// Every failure named by the protocol suite. Codes are stable and appear on
// the wire (error payloads carry to_string(code)).
enum class Errc {
  // core
  UnsupportedNode,
  NonStringKey,
  ParseError,
  BadScheme,
  EmptyPath,
  BadSegment,
  InvalidEnvelope,
  // transport
  AddrInUse,
  Unroutable,
  FrameTooLarge,
  ConnectionFailed,
  NotSimBackend,
  // a3ap
  BadName,
  AlreadySigned,
  BadCredential,
  BadProof,
  BadSignature,
  Timeout,
  NoSession,
  ZeroUnits,
  // arp
  IdentityRejected,
  DescriptorInvalid,
  ComplianceRejected,
  WrongNode,
  DuplicateAgent,
  NotRegistered,
  StaleVersion,
  SignerMismatch,
  NotFound,
  UnknownChild,
  // adp
  UnknownRegistry,
  EmptyQuery,
  // aip
  EmptyGoal,
  DiscoveryEmpty,
  AllDeclined,
  AssignRejected,
  ClosedThread,
  UnknownSubtask,
  ResultForUnknownSubtask,
  DuplicateResult,
  InvalidTransition,
  UnknownTask,
  SubtaskFailed,
  // atp
  DuplicateTool,
  BadSchema,
  UnknownTool,
  UnknownResource,
  UnknownConnector,
  ArgsSchemaMismatch,
  ToolFailure,
  OutputSchemaViolation,
  InvalidWorkflow,
  StepExhausted,
  // harness
  ConfigError,
  ScenarioFailed,
};

std::string_view to_string(Errc code) noexcept;
Errc errc_from_string(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail, nlohmann::json data = nlohmann::json::object());

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  // Structured context (offending index, validation report, partial transcript...).
  const nlohmann::json& data() const noexcept { return data_; }

  // {"code": ..., "detail": ..., "data": ...} as carried in error payloads.
  nlohmann::json to_value() const;
  static Error from_value(const nlohmann::json& v);

 private:
  Errc code_;
  std::string detail_;
  nlohmann::json data_;
};

// Response payloads carry either a result or {"error": Error::to_value()}.
// Rethrows the carried error, if any.
void raise_if_error(const nlohmann::json& payload);

}  // namespace acp

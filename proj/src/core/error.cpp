#include "acp/core/error.hpp"

#include <utility>

namespace acp {
namespace {

constexpr std::pair<Errc, std::string_view> kNames[] = {
    {Errc::UnsupportedNode, "UnsupportedNode"},
    {Errc::NonStringKey, "NonStringKey"},
    {Errc::ParseError, "ParseError"},
    {Errc::BadScheme, "BadScheme"},
    {Errc::EmptyPath, "EmptyPath"},
    {Errc::BadSegment, "BadSegment"},
    {Errc::InvalidEnvelope, "InvalidEnvelope"},
    {Errc::AddrInUse, "AddrInUse"},
    {Errc::Unroutable, "Unroutable"},
    {Errc::FrameTooLarge, "FrameTooLarge"},
    {Errc::ConnectionFailed, "ConnectionFailed"},
    {Errc::NotSimBackend, "NotSimBackend"},
    {Errc::BadName, "BadName"},
    {Errc::AlreadySigned, "AlreadySigned"},
    {Errc::BadCredential, "BadCredential"},
    {Errc::BadProof, "BadProof"},
    {Errc::BadSignature, "BadSignature"},
    {Errc::Timeout, "Timeout"},
    {Errc::NoSession, "NoSession"},
    {Errc::ZeroUnits, "ZeroUnits"},
    {Errc::IdentityRejected, "IdentityRejected"},
    {Errc::DescriptorInvalid, "DescriptorInvalid"},
    {Errc::ComplianceRejected, "ComplianceRejected"},
    {Errc::WrongNode, "WrongNode"},
    {Errc::DuplicateAgent, "DuplicateAgent"},
    {Errc::NotRegistered, "NotRegistered"},
    {Errc::StaleVersion, "StaleVersion"},
    {Errc::SignerMismatch, "SignerMismatch"},
    {Errc::NotFound, "NotFound"},
    {Errc::UnknownChild, "UnknownChild"},
    {Errc::UnknownRegistry, "UnknownRegistry"},
    {Errc::EmptyQuery, "EmptyQuery"},
    {Errc::EmptyGoal, "EmptyGoal"},
    {Errc::DiscoveryEmpty, "DiscoveryEmpty"},
    {Errc::AllDeclined, "AllDeclined"},
    {Errc::AssignRejected, "AssignRejected"},
    {Errc::ClosedThread, "ClosedThread"},
    {Errc::UnknownSubtask, "UnknownSubtask"},
    {Errc::ResultForUnknownSubtask, "ResultForUnknownSubtask"},
    {Errc::DuplicateResult, "DuplicateResult"},
    {Errc::InvalidTransition, "InvalidTransition"},
    {Errc::UnknownTask, "UnknownTask"},
    {Errc::SubtaskFailed, "SubtaskFailed"},
    {Errc::DuplicateTool, "DuplicateTool"},
    {Errc::BadSchema, "BadSchema"},
    {Errc::UnknownTool, "UnknownTool"},
    {Errc::UnknownResource, "UnknownResource"},
    {Errc::UnknownConnector, "UnknownConnector"},
    {Errc::ArgsSchemaMismatch, "ArgsSchemaMismatch"},
    {Errc::ToolFailure, "ToolFailure"},
    {Errc::OutputSchemaViolation, "OutputSchemaViolation"},
    {Errc::InvalidWorkflow, "InvalidWorkflow"},
    {Errc::StepExhausted, "StepExhausted"},
    {Errc::ConfigError, "ConfigError"},
    {Errc::ScenarioFailed, "ScenarioFailed"},
};

}  // namespace

std::string_view to_string(Errc code) noexcept {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

Errc errc_from_string(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  throw Error(Errc::ParseError, "unknown error code '" + std::string(name) + "'");
}

Error::Error(Errc code, std::string detail, nlohmann::json data)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(std::move(detail)),
      data_(std::move(data)) {}

nlohmann::json Error::to_value() const {
  nlohmann::json v = {{"code", std::string(to_string(code_))}, {"detail", detail_}};
  if (!data_.is_null() && !data_.empty()) v["data"] = data_;
  return v;
}

Error Error::from_value(const nlohmann::json& v) {
  auto code = errc_from_string(v.at("code").get<std::string>());
  return Error(code, v.value("detail", std::string{}),
               v.contains("data") ? v.at("data") : nlohmann::json::object());
}

void raise_if_error(const nlohmann::json& payload) {
  if (payload.is_object() && payload.contains("error")) throw Error::from_value(payload.at("error"));
}

}  // namespace acp

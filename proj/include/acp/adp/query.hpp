#pragma once

#include "acp/core/descriptor.hpp"
#include "acp/core/ids.hpp"
#include "acp/core/value.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace acp::adp {

enum class MatchMode { Strict, Loose };

struct Query {
  std::set<std::string> required_tags;
  std::set<std::string> optional_tags;
  std::optional<std::int64_t> max_cost_tokens;
  std::optional<std::int64_t> max_latency_ms;
  std::int64_t limit = 10;
  std::optional<std::string> raw_text;
  MatchMode mode = MatchMode::Strict;

  core::Value to_value() const;
  // Throws Error(ParseError | EmptyQuery).
  static Query from_value(const core::Value& v);
};

// Phrase (one word or two words joined by a space) -> tags.
class SynonymTable {
 public:
  SynonymTable() = default;
  explicit SynonymTable(std::map<std::string, std::vector<std::string>> entries) : entries_(std::move(entries)) {}

  void add(const std::string& phrase, std::vector<std::string> tags) { entries_[phrase] = std::move(tags); }
  const std::vector<std::string>* find(const std::string& phrase) const;
  const std::map<std::string, std::vector<std::string>>& entries() const noexcept { return entries_; }

  // {"phrase": ["tag", ...] | "tag", ...}
  static SynonymTable from_value(const core::Value& v);
  static SynonymTable load(const std::string& path);

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

// Lowercased alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

// Text form: each token and each adjacent token pair is looked up in the
// table; every mapped tag becomes required. Throws Error(EmptyQuery).
Query parse_query(std::string_view text, const SynonymTable& table);
// Structured form: validated pass-through. Throws Error(ParseError | EmptyQuery).
Query parse_query(const core::Value& structured);
// {"text": "..."} or a structured query; "mode"/"limit" may accompany text.
Query parse_query_payload(const core::Value& payload, const SynonymTable& table);

struct ScoringWeights {
  double coverage = 0.7;
  double bonus = 0.3;
};

struct MatchResult {
  core::AgentId agent;
  double score = 0.0;
  double coverage = 0.0;
  std::set<std::string> matched_required;
  std::set<std::string> matched_optional;
  std::int64_t descriptor_version = 0;

  core::Value to_value() const;
  static MatchResult from_value(const core::Value& v);
};

// Full evaluation of one descriptor against a query.
MatchResult evaluate(const Query& q, const core::CapabilityDescriptor& d, const ScoringWeights& w = {});
double match_score(const Query& q, const core::CapabilityDescriptor& d, const ScoringWeights& w = {});

}  // namespace acp::adp

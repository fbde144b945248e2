#include "acp/adp/query.hpp"

#include "acp/core/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace acp::adp {
namespace {

core::Value tag_list(const std::set<std::string>& tags) {
  core::Value out = core::Value::array();
  for (const auto& t : tags) out.push_back(t);
  return out;
}

std::set<std::string> read_tags(const core::Value& v, const char* field) {
  std::set<std::string> out;
  if (!v.contains(field)) return out;
  const auto& list = v.at(field);
  if (!list.is_array()) throw Error(Errc::ParseError, std::string(field) + " must be a list of tags");
  for (const auto& t : list) {
    if (!t.is_string() || !core::is_valid_tag(t.get<std::string>())) {
      throw Error(Errc::ParseError, std::string("invalid tag in ") + field + ": " + t.dump());
    }
    out.insert(t.get<std::string>());
  }
  return out;
}

std::optional<std::int64_t> read_bound(const core::Value& v, const char* field) {
  if (!v.contains(field)) return std::nullopt;
  if (!v.at(field).is_number_integer() || v.at(field).get<std::int64_t>() < 0) {
    throw Error(Errc::ParseError, std::string(field) + " must be a non-negative integer");
  }
  return v.at(field).get<std::int64_t>();
}

void check(const Query& q) {
  if (q.required_tags.empty() && q.optional_tags.empty()) throw Error(Errc::EmptyQuery, "query has no tags");
  if (q.limit < 1) throw Error(Errc::ParseError, "limit must be at least 1");
}

std::size_t count_in(const std::set<std::string>& wanted, const std::set<std::string>& have,
                     std::set<std::string>& matched) {
  for (const auto& t : wanted) {
    if (have.contains(t)) matched.insert(t);
  }
  return matched.size();
}

}  // namespace

core::Value Query::to_value() const {
  core::Value v{{"required", tag_list(required_tags)},
                {"optional", tag_list(optional_tags)},
                {"limit", limit},
                {"mode", mode == MatchMode::Strict ? "strict" : "loose"}};
  if (max_cost_tokens) v["max_cost_tokens"] = *max_cost_tokens;
  if (max_latency_ms) v["max_latency_ms"] = *max_latency_ms;
  if (raw_text) v["raw_text"] = *raw_text;
  return v;
}

Query Query::from_value(const core::Value& v) {
  if (!v.is_object()) throw Error(Errc::ParseError, "query must be a map");
  Query q;
  q.required_tags = read_tags(v, "required");
  q.optional_tags = read_tags(v, "optional");
  q.max_cost_tokens = read_bound(v, "max_cost_tokens");
  q.max_latency_ms = read_bound(v, "max_latency_ms");
  if (v.contains("limit")) {
    if (!v.at("limit").is_number_integer()) throw Error(Errc::ParseError, "limit must be an integer");
    q.limit = v.at("limit").get<std::int64_t>();
  }
  if (v.contains("raw_text")) q.raw_text = v.at("raw_text").get<std::string>();
  if (v.contains("mode")) {
    auto m = v.at("mode").get<std::string>();
    if (m == "strict") {
      q.mode = MatchMode::Strict;
    } else if (m == "loose") {
      q.mode = MatchMode::Loose;
    } else {
      throw Error(Errc::ParseError, "mode must be strict or loose");
    }
  }
  check(q);
  return q;
}

const std::vector<std::string>* SynonymTable::find(const std::string& phrase) const {
  auto it = entries_.find(phrase);
  return it == entries_.end() ? nullptr : &it->second;
}

SynonymTable SynonymTable::from_value(const core::Value& v) {
  if (!v.is_object()) throw Error(Errc::ConfigError, "synonym table must be a map");
  SynonymTable table;
  for (const auto& [phrase, tags] : v.items()) {
    std::vector<std::string> list;
    if (tags.is_string()) {
      list.push_back(tags.get<std::string>());
    } else if (tags.is_array()) {
      for (const auto& t : tags) list.push_back(t.get<std::string>());
    } else {
      throw Error(Errc::ConfigError, "synonyms for '" + phrase + "' must be a tag or list of tags");
    }
    for (const auto& t : list) {
      if (!core::is_valid_tag(t)) throw Error(Errc::ConfigError, "invalid tag '" + t + "' in synonym table");
    }
    table.add(phrase, std::move(list));
  }
  return table;
}

SynonymTable SynonymTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open synonym table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_value(core::Value::parse(ss.str()));
  } catch (const core::Value::exception& e) {
    throw Error(Errc::ConfigError, std::string("synonym table: ") + e.what());
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) && u < 0x80) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Query parse_query(std::string_view text, const SynonymTable& table) {
  Query q;
  q.raw_text = std::string(text);
  auto tokens = tokenize(text);
  auto add = [&](const std::string& phrase) {
    if (const auto* tags = table.find(phrase)) q.required_tags.insert(tags->begin(), tags->end());
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add(tokens[i]);
    if (i + 1 < tokens.size()) add(tokens[i] + " " + tokens[i + 1]);
  }
  if (q.required_tags.empty()) throw Error(Errc::EmptyQuery, "no capability tag derivable from '" + std::string(text) + "'");
  return q;
}

Query parse_query(const core::Value& structured) { return Query::from_value(structured); }

Query parse_query_payload(const core::Value& payload, const SynonymTable& table) {
  if (payload.is_object() && payload.contains("text")) {
    auto q = parse_query(payload.at("text").get<std::string>(), table);
    auto extras = payload;
    extras.erase("text");
    extras["required"] = core::Value::array();
    for (const auto& t : q.required_tags) extras["required"].push_back(t);
    extras["raw_text"] = *q.raw_text;
    return Query::from_value(extras);
  }
  return parse_query(payload);
}

core::Value MatchResult::to_value() const {
  return {{"agent", agent.str()},
          {"score", score},
          {"coverage", coverage},
          {"matched_required", tag_list(matched_required)},
          {"matched_optional", tag_list(matched_optional)},
          {"descriptor_version", descriptor_version}};
}

MatchResult MatchResult::from_value(const core::Value& v) {
  try {
    MatchResult m;
    m.agent = core::parse_agent_id(v.at("agent").get<std::string>());
    m.score = v.at("score").get<double>();
    m.coverage = v.at("coverage").get<double>();
    for (const auto& t : v.at("matched_required")) m.matched_required.insert(t.get<std::string>());
    for (const auto& t : v.at("matched_optional")) m.matched_optional.insert(t.get<std::string>());
    m.descriptor_version = v.at("descriptor_version").get<std::int64_t>();
    return m;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed match result: ") + e.what());
  }
}

MatchResult evaluate(const Query& q, const core::CapabilityDescriptor& d, const ScoringWeights& w) {
  MatchResult m;
  m.agent = d.agent;
  m.descriptor_version = d.version;
  auto req = count_in(q.required_tags, d.capability_tags, m.matched_required);
  auto opt = count_in(q.optional_tags, d.capability_tags, m.matched_optional);
  m.coverage = q.required_tags.empty() ? 1.0 : static_cast<double>(req) / static_cast<double>(q.required_tags.size());
  double bonus = q.optional_tags.empty() ? 1.0 : static_cast<double>(opt) / static_cast<double>(q.optional_tags.size());
  bool qos_ok = (!q.max_cost_tokens || d.qos.cost_per_call_tokens <= *q.max_cost_tokens) &&
                (!q.max_latency_ms || d.qos.latency_ms_p50 <= *q.max_latency_ms);
  m.score = qos_ok ? std::clamp(w.coverage * m.coverage + w.bonus * bonus, 0.0, 1.0) : 0.0;
  return m;
}

double match_score(const Query& q, const core::CapabilityDescriptor& d, const ScoringWeights& w) {
  return evaluate(q, d, w).score;
}

}  // namespace acp::adp

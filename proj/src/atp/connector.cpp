#include "acp/atp/connector.hpp"

#include "acp/core/error.hpp"

#include <httplib.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace acp::atp {
namespace {

Error tool_failure(const std::string& detail) { return Error(Errc::ToolFailure, detail); }

bool field_matches(const core::Value& field, const core::Value& wanted) {
  if (field.is_array()) return std::find(field.begin(), field.end(), wanted) != field.end();
  if (field.is_number() && wanted.is_number()) return field.get<double>() == wanted.get<double>();
  return field == wanted;
}

bool record_matches(const core::Value& record, const core::Value& args) {
  for (const auto& [key, wanted] : args.items()) {
    if (record.contains(key)) {
      if (!field_matches(record.at(key), wanted)) return false;
      continue;
    }
    for (const char* prefix : {"min_", "max_"}) {
      if (key.rfind(prefix, 0) != 0) continue;
      auto field = key.substr(4);
      if (!record.contains(field)) continue;
      const auto& v = record.at(field);
      if (!v.is_number() || !wanted.is_number()) return false;
      bool is_min = prefix[1] == 'i';
      if (is_min ? v.get<double>() < wanted.get<double>() : v.get<double>() > wanted.get<double>()) return false;
    }
  }
  return true;
}

}  // namespace

FixtureConnector::Fixture FixtureConnector::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw tool_failure("cannot open fixture '" + file.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Fixture f;
  try {
    auto doc = core::Value::parse(ss.str());
    f.schema = core::Schema::from_value(doc.at("schema"));
    f.records = doc.at("records");
  } catch (const Error& e) {
    throw tool_failure("fixture '" + file.string() + "': " + e.detail());
  } catch (const std::exception& e) {
    throw tool_failure("fixture '" + file.string() + "': " + e.what());
  }
  if (!f.records.is_array()) throw tool_failure("fixture records must be a list");
  for (std::size_t i = 0; i < f.records.size(); ++i) {
    auto report = core::validate_value(f.schema, f.records[i], "records[" + std::to_string(i) + "]");
    if (!report.ok()) {
      throw Error(Errc::ToolFailure, "fixture record violates its schema", {{"report", report.to_value()}});
    }
  }
  return f;
}

core::Value FixtureConnector::call(const std::string&, const core::Value& args, const core::Value& config) {
  if (!config.contains("file")) throw tool_failure("fixture connector needs a 'file' config");
  auto path = std::filesystem::path(config.at("file").get<std::string>());
  if (path.is_relative()) path = base_dir_ / path;
  const Fixture* fixture;
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(path.string());
    if (it == cache_.end()) it = cache_.emplace(path.string(), load(path)).first;
    fixture = &it->second;
  }
  core::Value out = core::Value::array();
  for (const auto& r : fixture->records) {
    if (record_matches(r, args)) out.push_back(r);
  }
  if (config.contains("sort_by")) {
    const auto key = config.at("sort_by").get<std::string>();
    const bool desc = config.value("descending", false);
    std::stable_sort(out.begin(), out.end(), [&](const core::Value& a, const core::Value& b) {
      const auto& x = a.contains(key) ? a.at(key) : core::Value();
      const auto& y = b.contains(key) ? b.at(key) : core::Value();
      return desc ? y < x : x < y;
    });
  }
  if (config.contains("limit")) {
    auto limit = config.at("limit").get<std::size_t>();
    if (out.size() > limit) out.erase(out.begin() + static_cast<std::ptrdiff_t>(limit), out.end());
  }
  auto count = out.size();
  return {{"records", std::move(out)}, {"count", count}};
}

core::Value KvStoreConnector::call(const std::string& operation, const core::Value& args, const core::Value&) {
  std::lock_guard lock(mu_);
  if (operation == "put") {
    auto key = args.at("key").get<std::string>();
    auto& slot = data_[key];
    slot.first = args.at("value");
    ++slot.second;
    return {{"key", key}, {"version", slot.second}};
  }
  if (operation == "get") {
    auto key = args.at("key").get<std::string>();
    auto it = data_.find(key);
    if (it == data_.end()) throw tool_failure("no value under '" + key + "'");
    return {{"key", key}, {"value", it->second.first}, {"version", it->second.second}};
  }
  if (operation == "reserve") {
    char id[16];
    std::snprintf(id, sizeof id, "R-%04llu", static_cast<unsigned long long>(next_id_++));
    core::Value rec = args;
    rec["reservation_id"] = id;
    data_[id] = {rec, 1};
    return rec;
  }
  throw tool_failure("kv_store has no operation '" + operation + "'");
}

std::size_t KvStoreConnector::size() const {
  std::lock_guard lock(mu_);
  return data_.size();
}

core::Value HttpApiConnector::call(const std::string&, const core::Value& args, const core::Value& config) {
  const auto base = config.value("base_url", std::string{});
  const auto path = config.value("path", std::string("/"));
  const auto method = config.value("method", std::string("POST"));
  if (base.empty()) throw tool_failure("http_api connector needs a 'base_url' config");
  httplib::Client client(base);
  client.set_connection_timeout(5);
  client.set_read_timeout(10);
  httplib::Result res;
  if (method == "GET") {
    httplib::Params params;
    for (const auto& [k, v] : args.items()) params.emplace(k, v.is_string() ? v.get<std::string>() : v.dump());
    res = client.Get(path, params, httplib::Headers{});
  } else {
    res = client.Post(path, core::canonical_encode(args), "application/json");
  }
  if (!res) throw tool_failure("http request to " + base + path + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw tool_failure("http " + std::to_string(res->status) + " from " + base + path);
  }
  try {
    return core::Value::parse(res->body);
  } catch (const std::exception& e) {
    throw tool_failure(std::string("http response is not JSON: ") + e.what());
  }
}

std::shared_ptr<Connector> ConnectorRegistry::find(const std::string& name) const {
  auto it = connectors_.find(name);
  if (it == connectors_.end()) throw Error(Errc::UnknownConnector, "no connector '" + name + "'");
  return it->second;
}

ConnectorRegistry ConnectorRegistry::with_builtins(const std::filesystem::path& base_dir) {
  ConnectorRegistry r;
  r.add("fixture", std::make_shared<FixtureConnector>(base_dir));
  r.add("kv_store", std::make_shared<KvStoreConnector>());
  r.add("http_api", std::make_shared<HttpApiConnector>());
  return r;
}

}  // namespace acp::atp

#pragma once

#include "acp/core/schema.hpp"
#include "acp/core/value.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace acp::atp {

// Executes tool operations against a backing resource. `config` is the
// resource's connector config; implementations throw Error(ToolFailure).
class Connector {
 public:
  virtual ~Connector() = default;
  virtual core::Value call(const std::string& operation, const core::Value& args, const core::Value& config) = 0;
};

// Local data file {"schema": <schema>, "records": [...]} (canonical JSON).
// Arguments filter records: a key naming a record field must equal it (or
// be contained in it, for list fields); "min_<field>" / "max_<field>" bound
// numeric fields; other keys are ignored. Config: file, sort_by,
// descending, limit. Result: {"records": [...], "count": n}.
class FixtureConnector : public Connector {
 public:
  explicit FixtureConnector(std::filesystem::path base_dir = {}) : base_dir_(std::move(base_dir)) {}
  core::Value call(const std::string& operation, const core::Value& args, const core::Value& config) override;

  struct Fixture {
    core::Schema schema;
    core::Value records;
  };
  // Throws Error(ToolFailure) for unreadable files or records that violate
  // the declared schema.
  static Fixture load(const std::filesystem::path& file);

 private:
  std::filesystem::path base_dir_;
  std::mutex mu_;
  std::map<std::string, Fixture> cache_;
};

// In-process key/value store. Operations: put {key, value} -> {key,
// version}; get {key} -> {key, value, version}; reserve {...} stores the
// arguments under a generated id and returns them with "reservation_id".
class KvStoreConnector : public Connector {
 public:
  core::Value call(const std::string& operation, const core::Value& args, const core::Value& config) override;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::pair<core::Value, std::uint64_t>> data_;
  std::uint64_t next_id_ = 1;
};

// JSON over HTTP (live mode). Config: base_url ("http://host:port"), path,
// method (GET|POST). POST sends the args as the body; GET sends them as
// query parameters. The response body must be JSON.
class HttpApiConnector : public Connector {
 public:
  core::Value call(const std::string& operation, const core::Value& args, const core::Value& config) override;
};

class ConnectorRegistry {
 public:
  void add(const std::string& name, std::shared_ptr<Connector> connector) { connectors_[name] = std::move(connector); }
  std::shared_ptr<Connector> find(const std::string& name) const;
  bool has(const std::string& name) const { return connectors_.contains(name); }

  // fixture (files relative to base_dir), kv_store and http_api.
  static ConnectorRegistry with_builtins(const std::filesystem::path& base_dir = {});

 private:
  std::map<std::string, std::shared_ptr<Connector>> connectors_;
};

}  // namespace acp::atp

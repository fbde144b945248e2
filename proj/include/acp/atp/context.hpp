#pragma once

#include "acp/core/value.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace acp::atp {

struct ContextEntry {
  core::Value value;
  std::string written_by;  // step id; empty for seeded values
  std::uint64_t version = 0;
};

// Key/value state shared by the steps of one task. Versions per key
// strictly increase; every write is kept in the history.
class Context {
 public:
  Context(std::string context_id = {}, std::string scope = {})
      : context_id_(std::move(context_id)), scope_(std::move(scope)) {}
  Context(const Context& other);
  Context& operator=(const Context& other);

  const std::string& context_id() const noexcept { return context_id_; }
  const std::string& scope() const noexcept { return scope_; }

  std::uint64_t write(const std::string& key, core::Value value, const std::string& written_by = {});
  std::optional<ContextEntry> read(const std::string& key) const;
  std::map<std::string, ContextEntry> entries() const;

  struct Write {
    std::string key;
    std::uint64_t version;
    std::string written_by;
  };
  std::vector<Write> history() const;

  core::Value to_value() const;

 private:
  std::string context_id_;
  std::string scope_;
  mutable std::mutex mu_;
  std::map<std::string, ContextEntry> entries_;
  std::vector<Write> history_;
};

}  // namespace acp::atp

#pragma once

#include "acp/core/value.hpp"

#include <string>
#include <vector>

namespace acp::core {

struct Violation {
  std::string path;
  std::string rule;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

// ok() is derived from the violation list so the two can never disagree.
class ValidationReport {
 public:
  bool ok() const noexcept { return violations_.empty(); }
  const std::vector<Violation>& violations() const noexcept { return violations_; }

  void add(std::string path, std::string rule, std::string detail = {});
  void merge(const ValidationReport& other);
  bool has_path(std::string_view path) const noexcept;

  Value to_value() const;
  static ValidationReport from_value(const Value& v);

 private:
  std::vector<Violation> violations_;
};

}  // namespace acp::core

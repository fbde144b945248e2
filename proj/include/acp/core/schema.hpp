#pragma once

#include "acp/core/report.hpp"
#include "acp/core/value.hpp"

#include <optional>
#include <string>
#include <vector>

namespace acp::core {

enum class SchemaKind { String, Int, Float, Bool, List, Map };

std::string_view to_string(SchemaKind kind) noexcept;

struct SchemaField;

// Named-field tree over the value kinds. A Map without declared fields is
// open (any keys); a Map with fields rejects undeclared keys. A List carries
// at most one item schema (none = any items).
struct Schema {
  SchemaKind kind = SchemaKind::Map;
  std::vector<SchemaField> fields;
  std::vector<Schema> items;
  bool open = true;

  static Schema scalar(SchemaKind kind);
  static Schema list_of(Schema item);
  static Schema record(std::vector<SchemaField> fields);

  const SchemaField* field(std::string_view name) const noexcept;

  // {"type": "map", "fields": {"x": {"type": "int", "optional": true}}}
  Value to_value() const;
  // Throws Error(BadSchema) on unknown types or malformed trees.
  static Schema from_value(const Value& v);
};

struct SchemaField {
  std::string name;
  Schema schema;
  bool required = true;
};

// Reports every mismatch with a dotted/indexed path rooted at `root`.
ValidationReport validate_value(const Schema& schema, const Value& value,
                                const std::string& root = "");

// Resolves "a.b.c" through nested map schemas (numeric segments step into
// list items); nullopt when absent or open.
std::optional<Schema> schema_at(const Schema& schema, std::string_view dotted_path);

// Resolves "a.b.0.c" through a value; nullopt when absent.
std::optional<Value> value_at(const Value& value, std::string_view dotted_path);

}  // namespace acp::core

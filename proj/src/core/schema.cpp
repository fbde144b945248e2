#include "acp/core/schema.hpp"

#include "acp/core/error.hpp"

#include <algorithm>
#include <charconv>

namespace acp::core {

void ValidationReport::add(std::string path, std::string rule, std::string detail) {
  violations_.push_back({std::move(path), std::move(rule), std::move(detail)});
}

void ValidationReport::merge(const ValidationReport& other) {
  violations_.insert(violations_.end(), other.violations_.begin(), other.violations_.end());
}

bool ValidationReport::has_path(std::string_view path) const noexcept {
  return std::any_of(violations_.begin(), violations_.end(),
                     [&](const Violation& v) { return v.path == path; });
}

Value ValidationReport::to_value() const {
  Value list = Value::array();
  for (const auto& v : violations_) {
    list.push_back({{"path", v.path}, {"rule", v.rule}, {"detail", v.detail}});
  }
  return {{"ok", ok()}, {"violations", list}};
}

ValidationReport ValidationReport::from_value(const Value& v) {
  ValidationReport r;
  for (const auto& item : v.at("violations")) {
    r.add(item.at("path").get<std::string>(), item.at("rule").get<std::string>(),
          item.value("detail", std::string{}));
  }
  return r;
}

std::string_view to_string(SchemaKind kind) noexcept {
  switch (kind) {
    case SchemaKind::String: return "string";
    case SchemaKind::Int: return "int";
    case SchemaKind::Float: return "float";
    case SchemaKind::Bool: return "bool";
    case SchemaKind::List: return "list";
    case SchemaKind::Map: return "map";
  }
  return "?";
}

namespace {

SchemaKind kind_from_string(const std::string& s) {
  if (s == "string") return SchemaKind::String;
  if (s == "int") return SchemaKind::Int;
  if (s == "float") return SchemaKind::Float;
  if (s == "bool") return SchemaKind::Bool;
  if (s == "list") return SchemaKind::List;
  if (s == "map") return SchemaKind::Map;
  throw Error(Errc::BadSchema, "unknown schema type '" + s + "'");
}

std::string join(const std::string& root, std::string_view name) {
  if (root.empty()) return std::string(name);
  return root + "." + std::string(name);
}

void check(const Schema& schema, const Value& value, const std::string& path,
           ValidationReport& report) {
  auto mismatch = [&](std::string_view got) {
    report.add(path.empty() ? "$" : path, "type",
               "expected " + std::string(to_string(schema.kind)) + ", got " + std::string(got));
  };
  switch (schema.kind) {
    case SchemaKind::String:
      if (!value.is_string()) mismatch(value.type_name());
      return;
    case SchemaKind::Int:
      if (!value.is_number_integer()) mismatch(value.type_name());
      return;
    case SchemaKind::Float:
      if (!value.is_number()) mismatch(value.type_name());
      return;
    case SchemaKind::Bool:
      if (!value.is_boolean()) mismatch(value.type_name());
      return;
    case SchemaKind::List:
      if (!value.is_array()) {
        mismatch(value.type_name());
        return;
      }
      if (!schema.items.empty()) {
        for (std::size_t i = 0; i < value.size(); ++i) {
          check(schema.items.front(), value[i], path + "[" + std::to_string(i) + "]", report);
        }
      }
      return;
    case SchemaKind::Map:
      if (!value.is_object()) {
        mismatch(value.type_name());
        return;
      }
      for (const auto& f : schema.fields) {
        auto it = value.find(f.name);
        if (it == value.end()) {
          if (f.required) report.add(join(path, f.name), "required", "missing field");
          continue;
        }
        check(f.schema, *it, join(path, f.name), report);
      }
      if (!schema.open) {
        for (const auto& [key, _] : value.items()) {
          if (!schema.field(key)) report.add(join(path, key), "unknown_field", "undeclared field");
        }
      }
      return;
  }
}

}  // namespace

Schema Schema::scalar(SchemaKind kind) {
  Schema s;
  s.kind = kind;
  return s;
}

Schema Schema::list_of(Schema item) {
  Schema s;
  s.kind = SchemaKind::List;
  s.items.push_back(std::move(item));
  return s;
}

Schema Schema::record(std::vector<SchemaField> fields) {
  Schema s;
  s.kind = SchemaKind::Map;
  s.fields = std::move(fields);
  s.open = false;
  return s;
}

const SchemaField* Schema::field(std::string_view name) const noexcept {
  for (const auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

Value Schema::to_value() const {
  Value v = {{"type", std::string(to_string(kind))}};
  if (kind == SchemaKind::List && !items.empty()) v["items"] = items.front().to_value();
  if (kind == SchemaKind::Map && !open) {
    Value fs = Value::object();
    for (const auto& f : fields) {
      Value fv = f.schema.to_value();
      if (!f.required) fv["optional"] = true;
      fs[f.name] = std::move(fv);
    }
    v["fields"] = std::move(fs);
  }
  return v;
}

Schema Schema::from_value(const Value& v) {
  if (!v.is_object() || !v.contains("type") || !v.at("type").is_string()) {
    throw Error(Errc::BadSchema, "schema node must be a map with a string 'type'");
  }
  Schema s;
  s.kind = kind_from_string(v.at("type").get<std::string>());
  if (s.kind == SchemaKind::List && v.contains("items")) {
    s.items.push_back(from_value(v.at("items")));
  }
  if (s.kind == SchemaKind::Map && v.contains("fields")) {
    const auto& fs = v.at("fields");
    if (!fs.is_object()) throw Error(Errc::BadSchema, "'fields' must be a map");
    s.open = false;
    for (const auto& [name, fv] : fs.items()) {
      if (name.empty()) throw Error(Errc::BadSchema, "empty field name");
      SchemaField f;
      f.name = name;
      f.schema = from_value(fv);
      if (fv.contains("optional")) {
        if (!fv.at("optional").is_boolean()) throw Error(Errc::BadSchema, "'optional' must be bool");
        f.required = !fv.at("optional").get<bool>();
      }
      s.fields.push_back(std::move(f));
    }
  }
  return s;
}

ValidationReport validate_value(const Schema& schema, const Value& value, const std::string& root) {
  ValidationReport report;
  check(schema, value, root, report);
  return report;
}

std::optional<Schema> schema_at(const Schema& schema, std::string_view dotted_path) {
  const Schema* cur = &schema;
  std::size_t start = 0;
  while (start <= dotted_path.size()) {
    auto pos = dotted_path.find('.', start);
    auto part = dotted_path.substr(start, pos == dotted_path.npos ? dotted_path.npos : pos - start);
    if (part.empty()) break;
    if (cur->kind == SchemaKind::List) {
      bool index = std::all_of(part.begin(), part.end(), [](char c) { return c >= '0' && c <= '9'; });
      if (!index || cur->items.empty()) return std::nullopt;
      cur = &cur->items.front();
    } else {
      if (cur->kind != SchemaKind::Map || cur->open) return std::nullopt;
      const auto* f = cur->field(part);
      if (!f) return std::nullopt;
      cur = &f->schema;
    }
    if (pos == dotted_path.npos) break;
    start = pos + 1;
  }
  return *cur;
}

std::optional<Value> value_at(const Value& value, std::string_view dotted_path) {
  const Value* cur = &value;
  std::size_t start = 0;
  while (start <= dotted_path.size()) {
    auto pos = dotted_path.find('.', start);
    auto part = dotted_path.substr(start, pos == dotted_path.npos ? dotted_path.npos : pos - start);
    if (part.empty()) break;
    if (cur->is_object()) {
      auto it = cur->find(std::string(part));
      if (it == cur->end()) return std::nullopt;
      cur = &*it;
    } else if (cur->is_array()) {
      std::size_t idx = 0;
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), idx);
      if (ec != std::errc{} || p != part.data() + part.size() || idx >= cur->size()) {
        return std::nullopt;
      }
      cur = &(*cur)[idx];
    } else {
      return std::nullopt;
    }
    if (pos == dotted_path.npos) break;
    start = pos + 1;
  }
  return std::optional<Value>(std::in_place, *cur);
}

}  // namespace acp::core

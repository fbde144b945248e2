#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace acp::core {

// Schema-typed value: string | int | float | bool | list | map (string keys).
// nlohmann::json is the in-memory representation; null, binary and
// non-finite floats are not part of the value model and are rejected by
// canonical_encode.
using Value = nlohmann::json;

// Deterministic textual encoding (JSON subset):
//   - map keys in ascending byte order, no insignificant whitespace
//   - integers in plain decimal
//   - floats in shortest round-trip form, always carrying '.' or an exponent
//     so they decode back to floats
//   - strings escaped minimally (\" \\ \b \f \n \r \t, other controls as \u00xx)
// Throws Error(UnsupportedNode) for null/binary/NaN/inf or invalid UTF-8.
std::string canonical_encode(const Value& value);

// Parses canonical (or any JSON) text into a Value. Throws Error(ParseError).
// The result is checked against the value model: null yields UnsupportedNode.
Value canonical_decode(std::string_view text);

// True when the value contains only supported node kinds.
bool is_schema_value(const Value& value) noexcept;

}  // namespace acp::core

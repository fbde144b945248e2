#include "acp/core/value.hpp"

#include "acp/core/error.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace acp::core {
namespace {

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return false;
    }
    i += len;
  }
  return true;
}

void encode_string(std::string_view s, std::string& out) {
  if (!valid_utf8(s)) throw Error(Errc::UnsupportedNode, "string is not valid UTF-8");
  static constexpr char kHex[] = "0123456789abcdef";
  out.push_back('"');
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          out += "\\u00";
          out.push_back(kHex[c >> 4]);
          out.push_back(kHex[c & 0xF]);
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('"');
}

void encode_float(double d, std::string& out) {
  if (!std::isfinite(d)) throw Error(Errc::UnsupportedNode, "non-finite float");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
  if (ec != std::errc{}) throw Error(Errc::UnsupportedNode, "float formatting failed");
  std::string_view text(buf, static_cast<std::size_t>(end - buf));
  out += text;
  if (text.find_first_of(".e") == std::string_view::npos) out += ".0";
}

void encode(const Value& v, std::string& out) {
  switch (v.type()) {
    case Value::value_t::object: {
      out.push_back('{');
      bool first = true;
      // std::map<std::string> iterates in char_traits<char> order, i.e. unsigned bytes.
      for (const auto& [key, child] : v.items()) {
        if (!first) out.push_back(',');
        first = false;
        encode_string(key, out);
        out.push_back(':');
        encode(child, out);
      }
      out.push_back('}');
      break;
    }
    case Value::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& child : v) {
        if (!first) out.push_back(',');
        first = false;
        encode(child, out);
      }
      out.push_back(']');
      break;
    }
    case Value::value_t::string:
      encode_string(v.get_ref<const std::string&>(), out);
      break;
    case Value::value_t::boolean:
      out += v.get<bool>() ? "true" : "false";
      break;
    case Value::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case Value::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case Value::value_t::number_float:
      encode_float(v.get<double>(), out);
      break;
    case Value::value_t::null:
      throw Error(Errc::UnsupportedNode, "null is not a schema node");
    case Value::value_t::binary:
      throw Error(Errc::UnsupportedNode, "binary is not a schema node");
    case Value::value_t::discarded:
      throw Error(Errc::UnsupportedNode, "discarded value");
  }
}

}  // namespace

std::string canonical_encode(const Value& value) {
  std::string out;
  encode(value, out);
  return out;
}

Value canonical_decode(std::string_view text) {
  Value v = Value::parse(text, nullptr, /*allow_exceptions=*/false);
  if (v.is_discarded()) throw Error(Errc::ParseError, "malformed JSON text");
  if (!is_schema_value(v)) throw Error(Errc::UnsupportedNode, "decoded value contains null");
  return v;
}

bool is_schema_value(const Value& v) noexcept {
  switch (v.type()) {
    case Value::value_t::object:
    case Value::value_t::array:
      for (const auto& child : v) {
        if (!is_schema_value(child)) return false;
      }
      return true;
    case Value::value_t::number_float:
      return std::isfinite(v.get<double>());
    case Value::value_t::string:
    case Value::value_t::boolean:
    case Value::value_t::number_integer:
    case Value::value_t::number_unsigned:
      return true;
    default:
      return false;
  }
}

}  // namespace acp::core

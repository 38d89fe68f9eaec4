#pragma once

#include <string>

#include "hazscreen/error.hpp"
#include "json.hpp"

namespace hazscreen::io {

using Json = nlohmann::ordered_json;

inline Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, source + ": " + e.what());
  }
}

/// Required member of an object, with the field path in the error.
inline const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::ParseError, where + ": missing field '" + key + "'");
  return *it;
}

template <typename T>
T get_as(const Json& value, const std::string& where) {
  try {
    return value.get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorCode::ParseError, where + ": wrong type");
  }
}

inline void check_schema_version(const Json& doc, int expected, const std::string& source) {
  const int v = get_as<int>(member(doc, "schema_version", source), source + ".schema_version");
  if (v != expected) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                source + ": schema_version " + std::to_string(v) + ", expected " + std::to_string(expected));
  }
}

/// Two-space indented JSON with a trailing newline.
inline std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

}  // namespace hazscreen::io

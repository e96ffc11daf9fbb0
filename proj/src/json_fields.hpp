#pragma once

// Typed field access for hand-written JSON schemas. Every failure is a
// SchemaError carrying the dotted path of the offending field.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "llmprior/errors.hpp"

namespace llmprior::detail {

using nlohmann::json;

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object at '" + (path.empty() ? "<root>" : path) + "'");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(join_path(path, key), "missing field '" + join_path(path, key) + "'");
  return *it;
}

inline std::string require_string(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw SchemaError(join_path(path, key), "field '" + join_path(path, key) + "' must be a string");
  return v.get<std::string>();
}

inline double require_number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw SchemaError(join_path(path, key), "field '" + join_path(path, key) + "' must be a number");
  return v.get<double>();
}

inline bool require_bool(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_boolean()) throw SchemaError(join_path(path, key), "field '" + join_path(path, key) + "' must be a boolean");
  return v.get<bool>();
}

inline std::string optional_string(const json& obj, const std::string& key, const std::string& path,
                                   const std::string& fallback = {}) {
  if (!obj.contains(key)) return fallback;
  return require_string(obj, key, path);
}

/// Parses JSON text, mapping syntax errors to ParseError with line/column.
inline json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line/column
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(what + ": malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col) +
                         " (" + e.what() + ")",
                     text, line, col);
  }
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace llmprior::detail

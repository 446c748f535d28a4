#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfuq::toml {

/// Thrown on malformed config input; message carries line/field context.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A scalar or flat array value. Numbers are stored as doubles; integer
/// contexts convert on read.
struct Value {
  enum class Kind { Bool, Number, String, NumberArray, StringArray };
  Kind kind = Kind::Number;
  bool boolean = false;
  double number = 0.0;
  std::string string;
  std::vector<double> numbers;
  std::vector<std::string> strings;
};

using Table = std::map<std::string, Value>;

/// section name -> key/value table; keys before any [section] live in "".
using Document = std::map<std::string, Table>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

inline bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace detail

/// Parse a single value: true/false, number, "string", or a flat
/// [v1, v2, ...] array of numbers or strings.
inline Value parse_value(const std::string& raw, const std::string& where) {
  const std::string text = detail::trim(raw);
  Value v;
  if (text.empty()) throw ParseError(where + ": empty value");
  if (text == "true" || text == "false") {
    v.kind = Value::Kind::Bool;
    v.boolean = text == "true";
    return v;
  }
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"')
      throw ParseError(where + ": unterminated string");
    v.kind = Value::Kind::String;
    v.string = text.substr(1, text.size() - 2);
    return v;
  }
  if (text.front() == '[') {
    if (text.back() != ']') throw ParseError(where + ": unterminated array");
    std::string body = text.substr(1, text.size() - 2);
    std::vector<std::string> items;
    std::string cur;
    bool in_str = false;
    for (char c : body) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        items.push_back(detail::trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!detail::trim(cur).empty()) items.push_back(detail::trim(cur));
    const bool strings = !items.empty() && items.front().front() == '"';
    v.kind = strings ? Value::Kind::StringArray : Value::Kind::NumberArray;
    for (const auto& item : items) {
      if (strings) {
        if (item.size() < 2 || item.front() != '"' || item.back() != '"')
          throw ParseError(where + ": bad string array element '" + item + "'");
        v.strings.push_back(item.substr(1, item.size() - 2));
      } else {
        double num;
        if (!detail::parse_number(item, num))
          throw ParseError(where + ": bad number '" + item + "'");
        v.numbers.push_back(num);
      }
    }
    return v;
  }
  double num;
  if (!detail::parse_number(text, num))
    throw ParseError(where + ": cannot parse value '" + text + "'");
  v.kind = Value::Kind::Number;
  v.number = num;
  return v;
}

inline Document parse(std::istream& in) {
  Document doc;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = detail::trim(detail::strip_comment(line));
    if (text.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError(where + ": unterminated section");
      section = detail::trim(text.substr(1, text.size() - 2));
      if (section.empty()) throw ParseError(where + ": empty section name");
      doc[section];
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ParseError(where + ": expected 'key = value'");
    const std::string key = detail::trim(text.substr(0, eq));
    if (key.empty()) throw ParseError(where + ": empty key");
    doc[section][key] = parse_value(text.substr(eq + 1), where);
  }
  return doc;
}

inline Document parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  return parse(in);
}

/// Apply a "section.key=value" override (the --set flag).
inline void apply_override(Document& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ParseError("override '" + assignment + "': expected key=value");
  const std::string path = detail::trim(assignment.substr(0, eq));
  const auto dot = path.rfind('.');
  const std::string section = dot == std::string::npos ? "" : path.substr(0, dot);
  const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
  if (key.empty()) throw ParseError("override '" + assignment + "': empty key");
  doc[section][key] =
      parse_value(assignment.substr(eq + 1), "override '" + path + "'");
}

// typed lookups ------------------------------------------------------------

inline const Value* find(const Document& doc, const std::string& section,
                         const std::string& key) {
  const auto sec = doc.find(section);
  if (sec == doc.end()) return nullptr;
  const auto it = sec->second.find(key);
  return it == sec->second.end() ? nullptr : &it->second;
}

inline double get_number(const Document& doc, const std::string& section,
                         const std::string& key, double fallback) {
  const Value* v = find(doc, section, key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::Number)
    throw ParseError("field " + section + "." + key + ": expected a number");
  return v->number;
}

inline std::string get_string(const Document& doc, const std::string& section,
                              const std::string& key,
                              const std::string& fallback) {
  const Value* v = find(doc, section, key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::String)
    throw ParseError("field " + section + "." + key + ": expected a string");
  return v->string;
}

inline bool get_bool(const Document& doc, const std::string& section,
                     const std::string& key, bool fallback) {
  const Value* v = find(doc, section, key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::Bool)
    throw ParseError("field " + section + "." + key + ": expected a bool");
  return v->boolean;
}

inline std::vector<double> get_numbers(const Document& doc,
                                       const std::string& section,
                                       const std::string& key,
                                       std::vector<double> fallback) {
  const Value* v = find(doc, section, key);
  if (!v) return fallback;
  if (v->kind == Value::Kind::Number) return {v->number};
  if (v->kind != Value::Kind::NumberArray)
    throw ParseError("field " + section + "." + key +
                     ": expected a number array");
  return v->numbers;
}

}  // namespace nfuq::toml

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace tourexp::toml {

/// Minimal TOML subset used by the run configs: top-level and [section]
/// scalar keys, [[array-of-table]] sections, flat arrays of scalars, and
/// arrays of arrays of numbers. Strings are double-quoted; comments with #.
struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<std::string, std::int64_t, double, bool, Array> data;

  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }
  const std::string& as_string() const;
  std::int64_t as_int() const;
  double as_double() const;  // accepts integer values too
  bool as_bool() const;
  const Array& as_array() const;
};

struct Table {
  std::map<std::string, Value> values;
  std::map<std::string, Table> sections;
  std::map<std::string, std::vector<Table>> table_arrays;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  const Value& at(const std::string& key) const;
  const Table* section(const std::string& name) const;
  const std::vector<Table>* tables(const std::string& name) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
};

Table parse(const std::string& text);
Table parse_file(const std::filesystem::path& path);

}  // namespace tourexp::toml

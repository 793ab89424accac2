#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rlem::toml {

class Value;
using Table = std::map<std::string, Value>;
using Array = std::vector<Value>;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// TOML value. The parser supports the subset the shipped data files use:
/// bare keys, [table] / [[array-of-table]] headers, basic and multi-line
/// strings, integers, floats, booleans, and (possibly nested, possibly
/// multi-line) arrays. Inline tables and dates are not supported.
class Value {
 public:
  Value() : data_(std::string{}) {}
  explicit Value(std::string s) : data_(std::move(s)) {}
  explicit Value(std::int64_t i) : data_(i) {}
  explicit Value(double d) : data_(d) {}
  explicit Value(bool b) : data_(b) {}
  explicit Value(Array a) : data_(std::move(a)) {}
  explicit Value(Table t) : data_(std::move(t)) {}

  bool is_string() const { return std::holds_alternative<std::string>(data_); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(data_); }
  bool is_float() const { return std::holds_alternative<double>(data_); }
  bool is_bool() const { return std::holds_alternative<bool>(data_); }
  bool is_array() const { return std::holds_alternative<Array>(data_); }
  bool is_table() const { return std::holds_alternative<Table>(data_); }

  const std::string& as_string() const { return get<std::string>("string"); }
  std::int64_t as_integer() const { return get<std::int64_t>("integer"); }
  bool as_bool() const { return get<bool>("boolean"); }
  double as_float() const {
    if (is_integer()) return static_cast<double>(as_integer());
    return get<double>("float");
  }
  const Array& as_array() const { return get<Array>("array"); }
  const Table& as_table() const { return get<Table>("table"); }
  Table& as_table() { return std::get<Table>(data_); }

  bool contains(const std::string& key) const {
    return is_table() && as_table().count(key) > 0;
  }

  const Value& at(const std::string& key) const {
    if (!is_table()) throw ParseError("not a table while looking up '" + key + "'");
    auto it = as_table().find(key);
    if (it == as_table().end()) throw ParseError("missing key '" + key + "'");
    return it->second;
  }

  // Typed lookups with defaults, for optional config keys.
  std::string get_string(const std::string& key, std::string fallback = {}) const {
    return contains(key) ? at(key).as_string() : std::move(fallback);
  }
  double get_float(const std::string& key, double fallback) const {
    return contains(key) ? at(key).as_float() : fallback;
  }
  std::int64_t get_integer(const std::string& key, std::int64_t fallback) const {
    return contains(key) ? at(key).as_integer() : fallback;
  }
  bool get_bool(const std::string& key, bool fallback) const {
    return contains(key) ? at(key).as_bool() : fallback;
  }

 private:
  template <typename T>
  const T& get(const char* name) const {
    if (!std::holds_alternative<T>(data_))
      throw ParseError(std::string("value is not a ") + name);
    return std::get<T>(data_);
  }

  std::variant<std::string, std::int64_t, double, bool, Array, Table> data_;
};

/// Parses TOML text into a root table value. Throws ParseError with a line
/// number on malformed input.
Value parse(const std::string& text);

/// Reads and parses a TOML file; the file path is included in error messages.
Value parse_file(const std::filesystem::path& path);

}  // namespace rlem::toml

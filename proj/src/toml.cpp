#include "tourexp/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "tourexp/errors.hpp"

namespace tourexp::toml {

const std::string& Value::as_string() const {
  if (!is_string()) throw ParseError("toml: expected a string value");
  return std::get<std::string>(data);
}

std::int64_t Value::as_int() const {
  if (!std::holds_alternative<std::int64_t>(data))
    throw ParseError("toml: expected an integer value");
  return std::get<std::int64_t>(data);
}

double Value::as_double() const {
  if (std::holds_alternative<double>(data)) return std::get<double>(data);
  if (std::holds_alternative<std::int64_t>(data))
    return static_cast<double>(std::get<std::int64_t>(data));
  throw ParseError("toml: expected a number");
}

bool Value::as_bool() const {
  if (!std::holds_alternative<bool>(data)) throw ParseError("toml: expected a boolean");
  return std::get<bool>(data);
}

const Array& Value::as_array() const {
  if (!is_array()) throw ParseError("toml: expected an array");
  return std::get<Array>(data);
}

const Value& Table::at(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ParseError("toml: missing key '" + key + "'");
  return it->second;
}

const Table* Table::section(const std::string& name) const {
  auto it = sections.find(name);
  return it == sections.end() ? nullptr : &it->second;
}

const std::vector<Table>* Table::tables(const std::string& name) const {
  auto it = table_arrays.find(name);
  return it == table_arrays.end() ? nullptr : &it->second;
}

std::string Table::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? at(key).as_string() : fallback;
}
std::int64_t Table::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? at(key).as_int() : fallback;
}
double Table::get_double(const std::string& key, double fallback) const {
  return has(key) ? at(key).as_double() : fallback;
}
bool Table::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? at(key).as_bool() : fallback;
}

namespace {

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  long line = 1;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  void skip_ws_inline() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) take();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("toml line " + std::to_string(line) + ": " + msg);
  }
};

Value parse_value(Cursor& c);

Value parse_scalar(Cursor& c) {
  c.skip_ws_inline();
  if (c.eof()) c.fail("expected a value");
  if (c.peek() == '"') {
    c.take();
    std::string s;
    while (!c.eof() && c.peek() != '"') {
      char ch = c.take();
      if (ch == '\\' && !c.eof()) {
        char esc = c.take();
        switch (esc) {
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          case '"': s += '"'; break;
          case '\\': s += '\\'; break;
          default: c.fail(std::string("unsupported escape \\") + esc);
        }
      } else {
        s += ch;
      }
    }
    if (c.eof()) c.fail("unterminated string");
    c.take();
    return Value{s};
  }
  std::string token;
  while (!c.eof() && c.peek() != ',' && c.peek() != ']' && c.peek() != '\n' &&
         c.peek() != '#' && c.peek() != ' ' && c.peek() != '\t' && c.peek() != '\r')
    token += c.take();
  if (token == "true") return Value{true};
  if (token == "false") return Value{false};
  if (token.empty()) c.fail("expected a value");
  const bool is_float = token.find_first_of(".eE") != std::string::npos &&
                        token.find_first_not_of("+-0123456789") != std::string::npos;
  try {
    std::size_t used = 0;
    if (!is_float) {
      std::int64_t v = std::stoll(token, &used);
      if (used == token.size()) return Value{v};
    }
    used = 0;
    double d = std::stod(token, &used);
    if (used != token.size()) c.fail("malformed number '" + token + "'");
    return Value{d};
  } catch (const std::exception&) {
    c.fail("malformed value '" + token + "'");
  }
}

Value parse_value(Cursor& c) {
  c.skip_ws_inline();
  if (!c.eof() && c.peek() == '[') {
    c.take();
    Array items;
    for (;;) {
      c.skip_ws_inline();
      while (!c.eof() && (c.peek() == '\n' || c.peek() == '\r')) {
        c.take();
        c.skip_ws_inline();
      }
      if (c.eof()) c.fail("unterminated array");
      if (c.peek() == ']') {
        c.take();
        break;
      }
      items.push_back(parse_value(c));
      c.skip_ws_inline();
      while (!c.eof() && (c.peek() == '\n' || c.peek() == '\r')) {
        c.take();
        c.skip_ws_inline();
      }
      if (!c.eof() && c.peek() == ',') {
        c.take();
        continue;
      }
      if (!c.eof() && c.peek() == ']') {
        c.take();
        break;
      }
      c.fail("expected ',' or ']' in array");
    }
    return Value{items};
  }
  return parse_scalar(c);
}

std::string parse_key(Cursor& c) {
  c.skip_ws_inline();
  std::string key;
  while (!c.eof() && (std::isalnum(static_cast<unsigned char>(c.peek())) || c.peek() == '_' ||
                      c.peek() == '-' || c.peek() == '.'))
    key += c.take();
  if (key.empty()) c.fail("expected a key");
  return key;
}

}  // namespace

Table parse(const std::string& text) {
  Table root;
  Cursor c{text};
  Table* current = &root;

  while (!c.eof()) {
    c.skip_ws_inline();
    if (c.eof()) break;
    char ch = c.peek();
    if (ch == '\n' || ch == '\r') {
      c.take();
      continue;
    }
    if (ch == '#') {
      while (!c.eof() && c.peek() != '\n') c.take();
      continue;
    }
    if (ch == '[') {
      c.take();
      bool is_array = !c.eof() && c.peek() == '[';
      if (is_array) c.take();
      const std::string name = parse_key(c);
      c.skip_ws_inline();
      if (c.eof() || c.take() != ']') c.fail("expected ']' after section name");
      if (is_array && (c.eof() || c.take() != ']'))
        c.fail("expected ']]' after array section name");

      // Dotted names navigate nested sections.
      std::vector<std::string> parts;
      std::size_t start = 0;
      for (std::size_t dot = name.find('.'); dot != std::string::npos;
           start = dot + 1, dot = name.find('.', start))
        parts.push_back(name.substr(start, dot - start));
      parts.push_back(name.substr(start));

      Table* where = &root;
      for (std::size_t i = 0; i + 1 < parts.size(); ++i) where = &where->sections[parts[i]];
      if (is_array) {
        where->table_arrays[parts.back()].emplace_back();
        current = &where->table_arrays[parts.back()].back();
      } else {
        current = &where->sections[parts.back()];
      }
      continue;
    }
    const std::string key = parse_key(c);
    c.skip_ws_inline();
    if (c.eof() || c.take() != '=') c.fail("expected '=' after key '" + key + "'");
    Value value = parse_value(c);
    c.skip_ws_inline();
    if (!c.eof() && c.peek() == '#')
      while (!c.eof() && c.peek() != '\n') c.take();
    if (!c.eof() && c.peek() != '\n' && c.peek() != '\r')
      c.fail("trailing characters after value for key '" + key + "'");
    if (!current->values.emplace(key, std::move(value)).second)
      c.fail("duplicate key '" + key + "'");
  }
  return root;
}

Table parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace tourexp::toml

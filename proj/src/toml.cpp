#include "rlem/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace rlem::toml {
namespace {

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char next() {
    char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line) + ": " + msg);
  }
};

void skip_ws(Cursor& c, bool cross_lines) {
  while (!c.eof()) {
    char ch = c.peek();
    if (ch == ' ' || ch == '\t') {
      c.next();
    } else if (ch == '#') {
      while (!c.eof() && c.peek() != '\n') c.next();
    } else if (cross_lines && (ch == '\n' || ch == '\r')) {
      c.next();
    } else {
      break;
    }
  }
}

void expect_eol(Cursor& c) {
  skip_ws(c, false);
  if (c.eof()) return;
  if (c.peek() == '\r') c.next();
  if (c.eof()) return;
  if (c.peek() != '\n') c.fail("unexpected trailing characters");
  c.next();
}

std::string parse_basic_string(Cursor& c) {
  // Opening quote consumed by caller? No: consume here.
  if (c.next() != '"') c.fail("expected '\"'");
  // Multi-line """...""" form.
  if (!c.eof() && c.peek() == '"' && c.pos + 1 < c.text.size() &&
      c.text[c.pos + 1] == '"') {
    c.next();
    c.next();
    if (!c.eof() && c.peek() == '\n') c.next();  // trim first newline
    std::string out;
    while (true) {
      if (c.eof()) c.fail("unterminated multi-line string");
      if (c.peek() == '"' && c.pos + 2 < c.text.size() + 1 &&
          c.text.compare(c.pos, 3, "\"\"\"") == 0) {
        c.next();
        c.next();
        c.next();
        return out;
      }
      out.push_back(c.next());
    }
  }
  std::string out;
  while (true) {
    if (c.eof()) c.fail("unterminated string");
    char ch = c.next();
    if (ch == '"') return out;
    if (ch == '\n') c.fail("newline in basic string");
    if (ch == '\\') {
      if (c.eof()) c.fail("dangling escape");
      char esc = c.next();
      switch (esc) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        default: c.fail(std::string("unsupported escape '\\") + esc + "'");
      }
    } else {
      out.push_back(ch);
    }
  }
}

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
  if (c.next() != '[') c.fail("expected '['");
  Array items;
  while (true) {
    skip_ws(c, true);
    if (c.eof()) c.fail("unterminated array");
    if (c.peek() == ']') {
      c.next();
      return Value(std::move(items));
    }
    items.push_back(parse_value(c));
    skip_ws(c, true);
    if (c.eof()) c.fail("unterminated array");
    if (c.peek() == ',') {
      c.next();
    } else if (c.peek() != ']') {
      c.fail("expected ',' or ']' in array");
    }
  }
}

Value parse_scalar(Cursor& c) {
  std::string tok;
  while (!c.eof()) {
    char ch = c.peek();
    if (ch == ',' || ch == ']' || ch == '#' || ch == '\n' || ch == '\r' ||
        ch == ' ' || ch == '\t')
      break;
    tok.push_back(c.next());
  }
  if (tok.empty()) c.fail("expected a value");
  if (tok == "true") return Value(true);
  if (tok == "false") return Value(false);
  bool looks_float = tok.find_first_of(".eE") != std::string::npos;
  if (!looks_float) {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), i);
    if (ec == std::errc() && p == tok.data() + tok.size()) return Value(i);
  }
  try {
    std::size_t used = 0;
    double d = std::stod(tok, &used);
    if (used == tok.size()) return Value(d);
  } catch (const std::exception&) {
  }
  c.fail("cannot parse value '" + tok + "'");
}

Value parse_value(Cursor& c) {
  skip_ws(c, false);
  if (c.eof()) c.fail("expected a value");
  char ch = c.peek();
  if (ch == '"') return Value(parse_basic_string(c));
  if (ch == '[') return parse_array(c);
  return parse_scalar(c);
}

std::string parse_key(Cursor& c) {
  skip_ws(c, false);
  std::string key;
  while (!c.eof()) {
    char ch = c.peek();
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-') {
      key.push_back(c.next());
    } else {
      break;
    }
  }
  if (key.empty()) c.fail("expected a key");
  return key;
}

// Splits a dotted header name like a.b into path segments.
std::vector<std::string> parse_header_path(Cursor& c) {
  std::vector<std::string> path;
  path.push_back(parse_key(c));
  skip_ws(c, false);
  while (!c.eof() && c.peek() == '.') {
    c.next();
    path.push_back(parse_key(c));
    skip_ws(c, false);
  }
  return path;
}

Table* descend(Table* root, const std::vector<std::string>& path,
               std::size_t depth, Cursor& c) {
  Table* t = root;
  for (std::size_t i = 0; i < depth; ++i) {
    auto it = t->find(path[i]);
    if (it == t->end()) it = t->emplace(path[i], Value(Table{})).first;
    Value& slot = it->second;
    if (slot.is_array()) {
      // Dotted access through an array of tables targets its last element.
      auto& arr = const_cast<Array&>(slot.as_array());
      if (arr.empty() || !arr.back().is_table())
        c.fail("key '" + path[i] + "' is not a table");
      t = &arr.back().as_table();
      continue;
    }
    if (!slot.is_table()) c.fail("key '" + path[i] + "' is not a table");
    t = &slot.as_table();
  }
  return t;
}

}  // namespace

Value parse(const std::string& text) {
  Cursor c{text};
  Value root{Table{}};
  Table* current = &root.as_table();

  while (true) {
    skip_ws(c, true);
    if (c.eof()) break;
    char ch = c.peek();
    if (ch == '[') {
      c.next();
      bool table_array = !c.eof() && c.peek() == '[';
      if (table_array) c.next();
      auto path = parse_header_path(c);
      if (c.eof() || c.next() != ']') c.fail("expected ']' in table header");
      if (table_array && (c.eof() || c.next() != ']'))
        c.fail("expected ']]' in array-of-tables header");
      expect_eol(c);

      Table* parent = descend(&root.as_table(), path, path.size() - 1, c);
      auto it = parent->find(path.back());
      if (table_array) {
        if (it == parent->end())
          it = parent->emplace(path.back(), Value(Array{})).first;
        if (!it->second.is_array())
          c.fail("'" + path.back() + "' is not an array of tables");
        auto& arr = const_cast<Array&>(it->second.as_array());
        arr.push_back(Value(Table{}));
        current = &arr.back().as_table();
      } else {
        if (it == parent->end())
          it = parent->emplace(path.back(), Value(Table{})).first;
        if (!it->second.is_table())
          c.fail("'" + path.back() + "' is not a table");
        current = &it->second.as_table();
      }
      continue;
    }
    // key = value
    std::string key = parse_key(c);
    skip_ws(c, false);
    if (c.eof() || c.next() != '=') c.fail("expected '=' after key '" + key + "'");
    Value v = parse_value(c);
    expect_eol(c);
    if (current->count(key)) c.fail("duplicate key '" + key + "'");
    (*current)[key] = std::move(v);
  }
  return root;
}

Value parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace rlem::toml

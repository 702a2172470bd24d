#include "transducer/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "transducer/error.hpp"

namespace transducer::toml {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line), msg);
}

// Removes a trailing comment that is not inside a string.
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == '"' && (k == 0 || s[k - 1] != '\\')) in_string = !in_string;
    if (s[k] == '#' && !in_string) return s.substr(0, k);
  }
  return s;
}

bool parse_number(const std::string& raw, double& out) {
  std::string s;
  for (char c : raw) {
    if (c != '_') s.push_back(c);
  }
  if (s.empty()) return false;
  if (s == "inf" || s == "+inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

Value parse_value(const std::string& raw, int line) {
  if (raw.empty()) fail(line, "missing value");
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t k = 1; k + 1 < raw.size(); ++k) {
      char c = raw[k];
      if (c == '\\' && k + 2 < raw.size()) {
        const char n = raw[++k];
        c = n == 'n' ? '\n' : n == 't' ? '\t' : n;
      }
      out.push_back(c);
    }
    return out;
  }
  if (raw.front() == '[') {
    if (raw.back() != ']') fail(line, "unterminated array");
    std::vector<double> values;
    std::stringstream ss(raw.substr(1, raw.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      double v = 0.0;
      if (!parse_number(item, v)) fail(line, "array items must be numbers: '" + item + "'");
      values.push_back(v);
    }
    return values;
  }
  double v = 0.0;
  if (!parse_number(raw, v)) fail(line, "cannot parse value '" + raw + "'");
  return v;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
      return false;
    }
  }
  return true;
}

}  // namespace

Document parse(const std::string& text) {
  Document doc;
  std::string section;
  std::set<std::string> seen;
  doc.sections[section];
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_key(section)) fail(line, "invalid section name '" + section + "'");
      if (!seen.insert(section).second) {
        fail(line, "duplicate section [" + section + "]");
      }
      doc.sections[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) fail(line, "invalid key '" + key + "'");
    auto& table = doc.sections[section];
    if (table.count(key)) fail(line, "duplicate key '" + key + "'");
    table[key] = Entry{parse_value(trim(s.substr(eq + 1)), line), line};
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path, "cannot open file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

}  // namespace transducer::toml

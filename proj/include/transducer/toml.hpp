#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace transducer::toml {

// The subset used by device files: [section] headers (dotted names allowed),
// key = value with numbers, booleans, double-quoted strings and single-line
// numeric arrays, and # comments.
using Value = std::variant<double, bool, std::string, std::vector<double>>;

struct Entry {
  Value value;
  int line = 0;
};

using Table = std::map<std::string, Entry>;

struct Document {
  std::map<std::string, Table> sections;  // "" holds keys before any header
};

// Throws ConfigError carrying "line N" on malformed input or duplicate keys.
Document parse(const std::string& text);
Document parse_file(const std::string& path);

}  // namespace transducer::toml

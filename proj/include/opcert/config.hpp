#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "opcert/common.hpp"

namespace opcert {

struct ConfigParseError : std::runtime_error {
  ConfigParseError(const std::string& msg, int line)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
  int line;
};

// Sectioned key/value config text:
//   [section]
//   key = "string" | number | true | false | [v1, v2, ...]
// with '#' comments.
struct ConfigValue {
  std::variant<double, bool, std::string, std::vector<ConfigValue>> v;

  double as_number() const;
  bool as_bool() const;
  const std::string& as_string() const;
  const std::vector<ConfigValue>& as_array() const;
};

class Config {
 public:
  static Config parse(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  const ConfigValue& get(const std::string& section, const std::string& key) const;

  double number_or(const std::string& section, const std::string& key, double fallback) const;
  std::string string_or(const std::string& section, const std::string& key,
                        const std::string& fallback) const;
  std::vector<std::string> string_list(const std::string& section, const std::string& key) const;
  std::vector<double> number_list(const std::string& section, const std::string& key) const;

  const std::string& raw_text() const { return raw_; }

 private:
  std::map<std::string, std::map<std::string, ConfigValue>> sections_;
  std::string raw_;
};

}  // namespace opcert

#include "opcert/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace opcert {

double ConfigValue::as_number() const {
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw PreconditionError("config value is not a number");
}

bool ConfigValue::as_bool() const {
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  throw PreconditionError("config value is not a boolean");
}

const std::string& ConfigValue::as_string() const {
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  throw PreconditionError("config value is not a string");
}

const std::vector<ConfigValue>& ConfigValue::as_array() const {
  if (const auto* a = std::get_if<std::vector<ConfigValue>>(&v)) return *a;
  throw PreconditionError("config value is not an array");
}

namespace {

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

ConfigValue parse_scalar(const std::string& tok, int line) {
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
    return ConfigValue{tok.substr(1, tok.size() - 2)};
  if (tok == "true") return ConfigValue{true};
  if (tok == "false") return ConfigValue{false};
  try {
    size_t used = 0;
    const double d = std::stod(tok, &used);
    if (used == tok.size()) return ConfigValue{d};
  } catch (...) {
  }
  throw ConfigParseError("cannot parse value '" + tok + "'", line);
}

ConfigValue parse_value(const std::string& tok, int line) {
  if (!tok.empty() && tok.front() == '[') {
    if (tok.back() != ']') throw ConfigParseError("unterminated array", line);
    std::vector<ConfigValue> items;
    std::string body = tok.substr(1, tok.size() - 2);
    std::string cur;
    bool in_str = false;
    for (char c : body) {
      if (c == '"') in_str = !in_str;
      if (c == ',' && !in_str) {
        const std::string t = trim(cur);
        if (!t.empty()) items.push_back(parse_scalar(t, line));
        cur.clear();
      } else {
        cur += c;
      }
    }
    const std::string t = trim(cur);
    if (!t.empty()) items.push_back(parse_scalar(t, line));
    return ConfigValue{std::move(items)};
  }
  return parse_scalar(tok, line);
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  cfg.raw_ = text;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments outside strings
    bool in_str = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_str = !in_str;
      if (line[i] == '#' && !in_str) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigParseError("unterminated section header", lineno);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigParseError("empty section name", lineno);
      cfg.sections_[section];
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigParseError("expected 'key = value'", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigParseError("empty key", lineno);
    if (section.empty()) throw ConfigParseError("key outside any [section]", lineno);
    cfg.sections_[section][key] = parse_value(val, lineno);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigParseError("cannot open config file '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

const ConfigValue& Config::get(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) throw PreconditionError("missing config section [" + section + "]");
  auto k = s->second.find(key);
  if (k == s->second.end())
    throw PreconditionError("missing config key '" + key + "' in [" + section + "]");
  return k->second;
}

double Config::number_or(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? get(section, key).as_number() : fallback;
}

std::string Config::string_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const {
  return has(section, key) ? get(section, key).as_string() : fallback;
}

std::vector<std::string> Config::string_list(const std::string& section, const std::string& key) const {
  std::vector<std::string> out;
  for (const ConfigValue& v : get(section, key).as_array()) out.push_back(v.as_string());
  return out;
}

std::vector<double> Config::number_list(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  for (const ConfigValue& v : get(section, key).as_array()) out.push_back(v.as_number());
  return out;
}

}  // namespace opcert

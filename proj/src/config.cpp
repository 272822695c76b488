#include "persim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace persim {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (...) {
    throw InvariantError("config: key '" + key + "' has non-numeric value '" +
                         v + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvariantError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

Config Config::parse_text(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvariantError("config: line " + std::to_string(lineno) +
                           " is not 'key = value': '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw InvariantError("config: empty key on line " +
                           std::to_string(lineno));
    cfg.kv_[key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const {
  return kv_.count(key) != 0;
}

const std::string& Config::raw(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end())
    throw InvariantError("config: missing required key '" + key + "'");
  read_.insert(key);
  return it->second;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

std::string Config::get_string(const std::string& key,
                               const std::string& def) const {
  if (!has(key)) return def;
  return raw(key);
}

double Config::get_double(const std::string& key) const {
  return to_double(key, raw(key));
}

double Config::get_double(const std::string& key, double def) const {
  if (!has(key)) return def;
  return to_double(key, raw(key));
}

int Config::get_int(const std::string& key, int def) const {
  if (!has(key)) return def;
  const double v = to_double(key, raw(key));
  if (v != std::floor(v))
    throw InvariantError("config: key '" + key + "' must be an integer");
  return static_cast<int>(v);
}

uint64_t Config::get_u64(const std::string& key, uint64_t def) const {
  if (!has(key)) return def;
  try {
    return std::stoull(raw(key));
  } catch (...) {
    throw InvariantError("config: key '" + key + "' must be an unsigned integer");
  }
}

bool Config::get_bool(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string v = raw(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvariantError("config: key '" + key + "' must be a boolean");
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split(raw(key), ','))
    if (!item.empty()) out.push_back(to_double(key, item));
  return out;
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& def) const {
  if (!has(key)) return def;
  return get_list(key);
}

std::vector<double> Config::get_profile(const std::string& key,
                                        const SpectralDomain& dom,
                                        double def_value) const {
  if (!has(key)) return std::vector<double>(dom.size(), def_value);
  const std::string v = raw(key);
  const auto parts = split(v, ':');
  std::vector<double> out(dom.size());
  if (parts.size() == 1) {
    const double c = to_double(key, parts[0]);
    std::fill(out.begin(), out.end(), c);
    return out;
  }
  if (parts[0] == "sinusoid" && parts.size() == 4) {
    const double off = to_double(key, parts[1]);
    const double amp = to_double(key, parts[2]);
    const double freq = to_double(key, parts[3]);
    for (int i = 0; i < dom.size(); ++i)
      out[i] = off + amp * std::sin(freq * dom.coord(i, 0));
    return out;
  }
  if (parts[0] == "bump" && parts.size() == 4) {
    const double center = to_double(key, parts[1]);
    const double width = to_double(key, parts[2]);
    const double height = to_double(key, parts[3]);
    for (int i = 0; i < dom.size(); ++i) {
      const double d = dom.coord(i, 0) - center;
      out[i] = 1e-9 + height * std::exp(-d * d / (2 * width * width));
    }
    return out;
  }
  throw InvariantError("config: key '" + key + "' has unknown profile '" + v +
                       "'");
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : kv_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

std::vector<std::string> Config::unread() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : kv_)
    if (!read_.count(k)) out.push_back(k);
  return out;
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

}  // namespace persim

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "persim/spectral_domain.hpp"

namespace persim {

/// Flat key-value configuration: one `section.key = value` per line, `#`
/// comments. Keys are tracked on access so unknown keys can be reported.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  uint64_t get_u64(const std::string& key, uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<double> get_list(const std::string& key,
                               const std::vector<double>& def) const;

  /// Profile values: a plain number (constant) or `sinusoid:<off>:<amp>:<freq>`
  /// evaluated as off + amp·sin(freq·x) along the first axis, or
  /// `bump:<center>:<width>:<height>` (gaussian bump plus tiny floor).
  std::vector<double> get_profile(const std::string& key,
                                  const SpectralDomain& dom,
                                  double def_value) const;

  /// Deterministic canonical text (sorted keys) used for run-id hashing.
  std::string canonical() const;
  /// Keys present in the file but never read.
  std::vector<std::string> unread() const;
  void set(const std::string& key, const std::string& value);

 private:
  const std::string& raw(const std::string& key) const;
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> read_;
};

}  // namespace persim

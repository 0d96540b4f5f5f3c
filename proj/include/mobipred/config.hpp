#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mobipred {

// Line-oriented "key = value" configuration. '#' starts a comment, blank
// lines are ignored, later keys override earlier ones.
class Config {
 public:
  Config() = default;
  static Config load(const std::filesystem::path& file);
  static Config parse(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, std::string value);

  std::string get_string(const std::string& key, const std::string& def) const;
  std::int64_t get_int(const std::string& key, std::int64_t def) const;
  double get_double(const std::string& key, double def) const;
  bool get_bool(const std::string& key, bool def) const;
  // Comma-separated list of integers.
  std::vector<std::int64_t> get_int_list(const std::string& key,
                                         const std::vector<std::int64_t>& def) const;
  std::vector<std::string> get_string_list(const std::string& key,
                                           const std::vector<std::string>& def) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace mobipred

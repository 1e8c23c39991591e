#pragma once

#include <map>
#include <string>
#include <string_view>

namespace pgspec {

// Plain-text `key = value` settings; '#' starts a comment, blank lines are ignored.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;
  // Throws ParseError for lines without '=' or with an empty key.
  static KeyValueConfig parse(std::string_view text);

  bool contains(const std::string& key) const { return values_.contains(key); }
  // Returns `fallback` when absent; throws ParseError when the value is not numeric.
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::size_t> lines_;
};

}  // namespace pgspec

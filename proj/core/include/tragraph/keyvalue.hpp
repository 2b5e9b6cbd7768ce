#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tragraph {

// Line-oriented `key = value` text. Blank lines and `#` comments are ignored.
struct KeyValueEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

class KeyValueText {
 public:
  static KeyValueText parse(const std::string& text);
  static KeyValueText load(const std::filesystem::path& path);

  const std::vector<KeyValueEntry>& entries() const { return entries_; }
  bool contains(const std::string& key) const;
  const std::string& get(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<KeyValueEntry> entries_;
};

// Typed conversions that report the entry's key and line on failure.
double to_double(const KeyValueEntry& entry);
long long to_int(const KeyValueEntry& entry);
bool to_bool(const KeyValueEntry& entry);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string content_hash(const std::string& bytes);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tragraph

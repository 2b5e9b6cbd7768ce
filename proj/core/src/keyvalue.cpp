#include "tragraph/keyvalue.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tragraph/error.hpp"

namespace tragraph {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

KeyValueText KeyValueText::parse(const std::string& text) {
  KeyValueText kv;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value', got '" + line + "'", number);
    KeyValueEntry entry{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), number};
    if (entry.key.empty()) throw ParseError("empty key", number);
    if (kv.contains(entry.key)) throw ParseError("duplicate key '" + entry.key + "'", number);
    kv.entries_.push_back(std::move(entry));
  }
  return kv;
}

KeyValueText KeyValueText::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

bool KeyValueText::contains(const std::string& key) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.key == key; });
}

const std::string& KeyValueText::get(const std::string& key) const {
  for (const auto& e : entries_)
    if (e.key == key) return e.value;
  throw ArgumentError("missing key '" + key + "'");
}

void KeyValueText::set(const std::string& key, const std::string& value) {
  for (auto& e : entries_) {
    if (e.key == key) {
      e.value = value;
      return;
    }
  }
  entries_.push_back({key, value, 0});
}

std::string KeyValueText::serialize() const {
  std::string out;
  for (const auto& e : entries_) out += e.key + " = " + e.value + "\n";
  return out;
}

void KeyValueText::save(const std::filesystem::path& path) const { write_text_file(path, serialize()); }

double to_double(const KeyValueEntry& entry) {
  try {
    std::size_t used = 0;
    const double v = std::stod(entry.value, &used);
    if (used == entry.value.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ParseError("key '" + entry.key + "': expected a number, got '" + entry.value + "'", entry.line);
}

long long to_int(const KeyValueEntry& entry) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(entry.value, &used);
    if (used == entry.value.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ParseError("key '" + entry.key + "': expected an integer, got '" + entry.value + "'", entry.line);
}

bool to_bool(const KeyValueEntry& entry) {
  if (entry.value == "true" || entry.value == "1" || entry.value == "on") return true;
  if (entry.value == "false" || entry.value == "0" || entry.value == "off") return false;
  throw ParseError("key '" + entry.key + "': expected a boolean, got '" + entry.value + "'", entry.line);
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace tragraph

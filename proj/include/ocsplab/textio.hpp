#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ocsplab/bytes.hpp"

namespace ocsplab {

/// Ordered `key=value` record. Lines starting with '#' and blank lines are
/// skipped on parse; keys may repeat.
class KvRecord {
 public:
  static KvRecord parse(std::string_view text);

  void add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }
  std::optional<std::string> get(std::string_view key) const;
  /// Throws MalformedRecord when the key is absent.
  std::string require(std::string_view key) const;
  std::vector<std::string> all(std::string_view key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string render() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
Bytes read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, ByteView data);

}  // namespace ocsplab

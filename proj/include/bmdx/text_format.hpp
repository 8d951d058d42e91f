// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bmdx {

/// Flat `key<sep>value` document (headers use ':', configs use '=').
/// Blank lines and lines starting with '#' are ignored; duplicate keys are rejected.
class KeyValueText {
 public:
  static KeyValueText parse(std::string_view text, char separator);
  static KeyValueText load(const std::filesystem::path& path, char separator);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;

  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key, std::size_t expected_count) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<long long> get_ints(const std::string& key, std::size_t expected_count) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

 private:
  std::map<std::string, std::string> entries_;
};

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Parses a full token as a double; throws ParseError naming `key` otherwise.
double parse_double(std::string_view token, const std::string& key);
long long parse_int(std::string_view token, const std::string& key);

std::vector<std::string> split_whitespace(std::string_view text);
std::vector<std::string> split_csv_line(std::string_view line);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

/// Header + rows of a simple comma-separated table (no quoting).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  static CsvTable parse(std::string_view text);
  static CsvTable load(const std::filesystem::path& path);
  std::string to_string() const;
};

}  // namespace bmdx

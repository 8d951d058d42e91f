// Copyright 2026 The bmdx Authors
// SPDX-License-Identifier: Apache-2.0
#include "bmdx/text_format.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "bmdx/error.hpp"

namespace bmdx {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueText KeyValueText::parse(std::string_view text, char separator) {
  KeyValueText out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto sep = line.find(separator);
    if (sep == std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no), "expected 'key " + std::string(1, separator) + " value'");
    }
    std::string key(trim(line.substr(0, sep)));
    std::string value(trim(line.substr(sep + 1)));
    if (key.empty()) throw ParseError("line " + std::to_string(line_no), "empty key");
    if (!out.entries_.emplace(key, std::move(value)).second) throw ParseError(key, "duplicate key");
  }
  return out;
}

KeyValueText KeyValueText::load(const std::filesystem::path& path, char separator) {
  return parse(read_file(path), separator);
}

const std::string& KeyValueText::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ParseError(key, "missing key");
  return it->second;
}

std::optional<std::string> KeyValueText::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double KeyValueText::get_double(const std::string& key) const { return parse_double(get(key), key); }

long long KeyValueText::get_int(const std::string& key) const { return parse_int(get(key), key); }

std::vector<double> KeyValueText::get_doubles(const std::string& key, std::size_t expected_count) const {
  auto values = get_double_list(key);
  if (values.size() != expected_count) {
    throw ParseError(key, "expected " + std::to_string(expected_count) + " numbers, got " +
                              std::to_string(values.size()));
  }
  return values;
}

std::vector<double> KeyValueText::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& token : split_whitespace(get(key))) out.push_back(parse_double(token, key));
  return out;
}

std::vector<long long> KeyValueText::get_ints(const std::string& key, std::size_t expected_count) const {
  std::vector<long long> out;
  for (const auto& token : split_whitespace(get(key))) out.push_back(parse_int(token, key));
  if (out.size() != expected_count) {
    throw ParseError(key, "expected " + std::to_string(expected_count) + " integers, got " +
                              std::to_string(out.size()));
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::string& key) {
  token = trim(token);
  if (token == "inf" || token == "+inf") return HUGE_VAL;
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ParseError(key, "not a number: '" + std::string(token) + "'");
  }
  return value;
}

long long parse_int(std::string_view token, const std::string& key) {
  token = trim(token);
  long long value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ParseError(key, "not an integer: '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kValidation, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::kValidation, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kValidation, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw ParseError(name, "missing CSV column");
}

CsvTable CsvTable::parse(std::string_view text) {
  CsvTable table;
  bool have_header = false;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (line.empty() || line.front() == '#') continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError("row " + std::to_string(table.rows.size() + 1),
                       "expected " + std::to_string(table.header.size()) + " cells");
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ParseError("header", "empty CSV");
  return table;
}

CsvTable CsvTable::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string CsvTable::to_string() const {
  std::string out;
  const auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ',';
      out += cells[c];
    }
    out += '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out;
}

}  // namespace bmdx

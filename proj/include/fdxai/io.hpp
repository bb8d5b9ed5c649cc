#pragma once

// Text formats shared by every module: shortest round-trip decimal numbers,
// numeric CSV tables with a header row, and JSON files.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "fdxai/error.hpp"

namespace fdxai {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  if (ec != std::errc{}) throw IoError("cannot format number");
  return {buffer, end};
}

inline double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r' || text.back() == '\t'))
    text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw IoError("not a number: '" + std::string(text) + "'");
  return value;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

/// Numeric table with named columns.
struct Table {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // rows x header.size()
};

inline void write_table(std::ostream& out, const std::vector<std::string>& header,
                        const Eigen::Ref<const Eigen::MatrixXd>& values) {
  if (static_cast<Eigen::Index>(header.size()) != values.cols())
    throw InvalidArgument("table header width does not match column count");
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  std::string line;
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j) line += ',';
      line += format_double(values(i, j));
    }
    line += '\n';
    out << line;
  }
}

inline void ensure_parent_directory(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

inline void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                        const Eigen::Ref<const Eigen::MatrixXd>& values) {
  ensure_parent_directory(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_table(out, header, values);
  if (!out) throw IoError("write failed: " + path.string());
}

inline Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing file: " + path.string());
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty table: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (auto field : split_fields(line)) table.header.emplace_back(field);
  std::vector<double> cells;
  std::size_t rows = 0;
  const std::size_t width = table.header.size();
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != width)
      throw IoError(path.string() + ": row " + std::to_string(rows + 1) + " has " +
                    std::to_string(fields.size()) + " fields, expected " + std::to_string(width));
    for (auto field : fields) cells.push_back(parse_double(field));
    ++rows;
  }
  table.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < width; ++j)
      table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i * width + j];
  return table;
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  ensure_parent_directory(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_json(const std::filesystem::path& path, const Json& json) {
  write_text(path, json.dump(2) + "\n");
}

inline Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

/// Vector of doubles as a JSON array of shortest round-trip numbers. nlohmann
/// already serializes doubles with round-trip precision.
inline Json to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Json array = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) array.push_back(v(i));
  return array;
}

inline Eigen::VectorXd vector_from_json(const Json& array) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(array.size()));
  for (std::size_t i = 0; i < array.size(); ++i) v(static_cast<Eigen::Index>(i)) = array[i].get<double>();
  return v;
}

inline std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

}  // namespace fdxai

#include "mdslab/table.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mdslab/error.hpp"

namespace mdslab {

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

double parse_real(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text.empty()) throw Error(ErrorKind::ParseError, "empty numeric field");
  std::string buf(text);
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE)
    throw Error(ErrorKind::ParseError, "not a real number: '" + buf + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string format_table(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += table.header[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw Error(ErrorKind::DimensionMismatch,
                  fmt::format("row has {} fields, header has {}", row.size(), table.header.size()));
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_real(row[c]);
    }
    out += '\n';
  }
  return out;
}

Table parse_table(std::string_view text) {
  Table table;
  bool first = true;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split(line, ',');
    if (first) {
      for (auto f : fields) table.header.emplace_back(f);
      first = false;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_real(f));
    if (row.size() != table.header.size())
      throw Error(ErrorKind::ParseError, "ragged table row");
    table.rows.push_back(std::move(row));
  }
  return table;
}

void emit_table(const Table& table, const std::filesystem::path& path) {
  write_text_file(path, format_table(table));
}

void write_text_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mdslab

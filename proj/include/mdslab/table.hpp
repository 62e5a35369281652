#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mdslab {

/// Rectangular numeric table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// 17 significant digits, enough for an exact binary64 round trip.
std::string format_real(double value);
double parse_real(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);

/// CSV bytes of a table: header line, one line per row, LF endings.
std::string format_table(const Table& table);
Table parse_table(std::string_view text);

/// Writes format_table(table). Throws IoFailure.
void emit_table(const Table& table, const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace mdslab

#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spchar {

class CsvError : public std::runtime_error {
public:
  CsvError(std::size_t line, const std::string& detail)
      : std::runtime_error("csv line " + std::to_string(line) + ": " + detail), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// RFC 4180 style fields; quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t lineno = 0);
std::string csv_escape(std::string_view field);
std::string join_csv(const std::vector<std::string>& fields);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;

  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;
};

/// Lines starting with '#' and blank lines are skipped; every row must have
/// the header's width.
CsvTable read_csv(std::istream& in);

/// Shortest decimal that round-trips a double.
std::string format_double(double v);

double parse_double_field(const std::string& s, std::size_t lineno, std::string_view column);
std::uint64_t parse_u64_field(const std::string& s, std::size_t lineno, std::string_view column);

}  // namespace spchar

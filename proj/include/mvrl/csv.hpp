#pragma once

#include <string>
#include <vector>

namespace mvrl::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads a comma-separated file with a mandatory header row. Blank lines are
// skipped; every data row must match the header width.
Table read_table(const std::string& path);

// Parses a double with file/line context in the error message.
double parse_double(const std::string& cell, const std::string& context);

void write_lines(const std::string& path, const std::vector<std::string>& lines);

}  // namespace mvrl::csv

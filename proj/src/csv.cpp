#include "mvrl/csv.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mvrl/common.hpp"

namespace mvrl::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim ASCII whitespace on both ends
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Table read_table(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCategory::io, "cannot open '" + path + "' for reading");
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto cells = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    require(cells.size() == table.header.size(), ErrorCategory::validation,
            path + ":" + std::to_string(line_no) + ": expected " +
                std::to_string(table.header.size()) + " columns, found " +
                std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  require(!table.header.empty(), ErrorCategory::validation, path + ": missing header row");
  return table;
}

double parse_double(const std::string& cell, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  require(end != cell.c_str() && *end == '\0' && !cell.empty(), ErrorCategory::validation,
          context + ": not a number: '" + cell + "'");
  return v;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCategory::io, "cannot open '" + path + "' for writing");
  for (const std::string& l : lines) out << l << '\n';
  require(out.good(), ErrorCategory::io, "write failed for '" + path + "'");
}

}  // namespace mvrl::csv

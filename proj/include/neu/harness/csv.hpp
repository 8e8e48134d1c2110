#pragma once

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "neu/types.hpp"

namespace neu::harness {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::string> labels;  // first column, kept verbatim
  Matrix values;                    // remaining columns
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_cell(const std::string& s, std::size_t line, std::size_t col) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw DomainError("csv: non-numeric cell '" + s + "' at line " + std::to_string(line) + ", column " +
                      std::to_string(col + 1));
  return v;
}

/// Header row, then one row per record. With `label_column` the first column
/// is kept as text (dates); all other cells must be finite numbers.
inline CsvTable parse_csv(std::istream& in, bool label_column) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw DomainError("csv: empty input");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  t.header = split_csv_line(line);
  const std::size_t skip = label_column ? 1 : 0;
  if (t.header.size() <= skip) throw DomainError("csv: no value columns");
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != t.header.size())
      throw DomainError("csv: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(t.header.size()));
    if (label_column) t.labels.push_back(cells[0]);
    std::vector<double> row;
    for (std::size_t c = skip; c < cells.size(); ++c) row.push_back(parse_cell(cells[c], line_no, c));
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.header.size() - skip));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) t.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return t;
}

inline CsvTable read_csv(const std::string& path, bool label_column) {
  std::ifstream in(path);
  if (!in) throw DomainError("csv: cannot open '" + path + "'");
  return parse_csv(in, label_column);
}

inline std::string matrix_csv(const std::vector<std::string>& header, const Matrix& m) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
  os << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
    os << '\n';
  }
  return os.str();
}

}  // namespace neu::harness

#include "dcs/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dcs {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Series read_csv(std::istream& is, const std::vector<std::string>& columns, const std::string& source) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput(source + ": empty file, expected a header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split(line);

  std::vector<std::size_t> pick;
  Series out;
  if (columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) pick.push_back(i);
    out.columns = header;
  } else {
    for (const auto& name : columns) {
      std::size_t k = 0;
      while (k < header.size() && header[k] != name) ++k;
      if (k == header.size()) throw InvalidInput(source + ": no column named '" + name + "'");
      pick.push_back(k);
    }
    out.columns = columns;
  }
  if (pick.empty()) throw InvalidInput(source + ": no columns selected");

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw InvalidInput(source + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                         " fields, header has " + std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(pick.size());
    for (auto k : pick) {
      const std::string& cell = cells[k];
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      const std::string where = source + ": row " + std::to_string(line_no) + ", column '" + header[k] + "'";
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw InvalidInput(where + ": non-numeric value '" + cell + "'");
      }
      if (!std::isfinite(value)) throw InvalidInput(where + ": missing or non-finite value");
      row.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput(source + ": no data rows");
  out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(pick.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < pick.size(); ++c) {
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return out;
}

Series load_csv(const std::string& path, const std::vector<std::string>& columns) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  return read_csv(in, columns, path);
}

void write_matrix_csv(std::ostream& os, const Matrix& m, const std::vector<std::string>& header) {
  if (static_cast<Eigen::Index>(header.size()) != m.cols()) throw InvalidInput("header width does not match matrix");
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  os.precision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << m(r, c);
    os << '\n';
  }
}

}  // namespace dcs

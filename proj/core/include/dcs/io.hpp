#pragma once

#include "dcs/linalg.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dcs {

struct Series {
  Matrix values;                     // T x N in file row order
  std::vector<std::string> columns;  // selected column names
};

/**
 * Reads a comma-separated file with a header row. `columns` selects by
 * header name (all columns when empty). Missing files, ragged rows,
 * non-numeric cells and NaN are errors naming the row and column.
 */
[[nodiscard]] Series load_csv(const std::string& path, const std::vector<std::string>& columns = {});
[[nodiscard]] Series read_csv(std::istream& is, const std::vector<std::string>& columns = {},
                              const std::string& source = "<stream>");

/// Header row plus one row per matrix row, 17 significant digits.
void write_matrix_csv(std::ostream& os, const Matrix& m, const std::vector<std::string>& header);

}  // namespace dcs

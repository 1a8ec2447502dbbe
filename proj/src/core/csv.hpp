#pragma once

#include <istream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace isovol {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

std::string trim(const std::string& s);

// Parses a number; empty, "NA", "NaN" and "null" give NaN. Throws MalformedCsv
// on anything else that is not a complete number.
double parse_cell(const std::string& cell);

struct NumericTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // rows x header.size()
};

// Header row plus numeric rows. Blank lines and lines starting with '#' are
// skipped.
NumericTable read_numeric_csv(std::istream& in);
NumericTable read_numeric_csv_file(const std::string& path);

}  // namespace isovol

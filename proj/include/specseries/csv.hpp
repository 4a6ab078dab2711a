#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "specseries/likelihood.hpp"

namespace specseries {

/// Numeric table with named columns.
struct CsvTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
};

/// Parses a headed numeric CSV; diagnostics name the offending row and column.
CsvTable read_csv(const std::string& path);

/// Writes with full round-trip decimal precision.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const Eigen::Ref<const Eigen::MatrixXd>& values);

/// Data columns x_0..x_{d-1} of a table (theta_ columns, if any, are ignored).
Eigen::MatrixXd x_columns(const CsvTable& table);

/// Splits a table into theta_ label columns and x_ data columns.
JointSample joint_from_table(const CsvTable& table);

/// Column names theta_0.. followed by x_0.. for the given dimensions.
std::vector<std::string> sample_columns(int theta_dim, int x_dim);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

} // namespace specseries

#include "specseries/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace specseries {

std::string format_double(double value) {
    char buf[40];
    // %.17g always round-trips; try the shorter %.15g first.
    std::snprintf(buf, sizeof(buf), "%.15g", value);
    if (std::strtod(buf, nullptr) != value) {
        std::snprintf(buf, sizeof(buf), "%.17g", value);
    }
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

} // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open CSV file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty CSV file: " + path);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    CsvTable table;
    table.columns = split_line(line);
    const std::size_t n_cols = table.columns.size();
    if (n_cols == 0) {
        throw DataError("CSV header has no columns: " + path);
    }

    std::vector<double> data;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> cells = split_line(line);
        ++n_rows;
        if (cells.size() != n_cols) {
            throw DataError(path + ": row " + std::to_string(n_rows) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(n_cols));
        }
        for (std::size_t c = 0; c < n_cols; ++c) {
            const std::string& cell = cells[c];
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                throw DataError(path + ": non-numeric cell at row " + std::to_string(n_rows) +
                                ", column '" + table.columns[c] + "'");
            }
            data.push_back(v);
        }
    }
    if (n_rows == 0) {
        throw DataError("CSV file has a header but no data rows: " + path);
    }
    table.values.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                data[r * n_cols + c];
        }
    }
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const Eigen::Ref<const Eigen::MatrixXd>& values) {
    if (static_cast<Eigen::Index>(columns.size()) != values.cols()) {
        throw InputError("write_csv: column name count does not match data");
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open CSV file for writing: " + path);
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out << (c == 0 ? "" : ",") << columns[c];
    }
    out << '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            out << (c == 0 ? "" : ",") << format_double(values(r, c));
        }
        out << '\n';
    }
    if (!out) {
        throw DataError("failed writing CSV file: " + path);
    }
}

namespace {

bool starts_with(const std::string& s, const char* prefix) {
    return s.rfind(prefix, 0) == 0;
}

} // namespace

Eigen::MatrixXd x_columns(const CsvTable& table) {
    std::vector<Eigen::Index> idx;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (starts_with(table.columns[c], "x_")) {
            idx.push_back(static_cast<Eigen::Index>(c));
        } else if (!starts_with(table.columns[c], "theta_")) {
            throw DataError("unexpected CSV column '" + table.columns[c] +
                            "' (expected x_* or theta_*)");
        }
    }
    if (idx.empty()) {
        throw DataError("CSV has no x_* data columns");
    }
    Eigen::MatrixXd out(table.values.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
        out.col(static_cast<Eigen::Index>(c)) = table.values.col(idx[c]);
    }
    return out;
}

JointSample joint_from_table(const CsvTable& table) {
    std::vector<Eigen::Index> theta_idx;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (starts_with(table.columns[c], "theta_")) {
            theta_idx.push_back(static_cast<Eigen::Index>(c));
        }
    }
    if (theta_idx.empty()) {
        throw DataError("CSV has no theta_* label columns (required for joint samples)");
    }
    JointSample joint;
    joint.x = x_columns(table);
    joint.theta.resize(table.values.rows(), static_cast<Eigen::Index>(theta_idx.size()));
    for (std::size_t c = 0; c < theta_idx.size(); ++c) {
        joint.theta.col(static_cast<Eigen::Index>(c)) = table.values.col(theta_idx[c]);
    }
    return joint;
}

std::vector<std::string> sample_columns(int theta_dim, int x_dim) {
    std::vector<std::string> cols;
    for (int c = 0; c < theta_dim; ++c) {
        cols.push_back("theta_" + std::to_string(c));
    }
    for (int c = 0; c < x_dim; ++c) {
        cols.push_back("x_" + std::to_string(c));
    }
    return cols;
}

} // namespace specseries

#pragma once

#include <Eigen/Dense>
#include <random>

namespace specseries::test {

// Seeded dense matrix with standard normal entries.
inline Eigen::MatrixXd randn(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            out(r, c) = n01(rng);
        }
    }
    return out;
}

} // namespace specseries::test

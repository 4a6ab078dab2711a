#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "specseries/errors.hpp"

namespace specseries {

inline constexpr std::array<double, 3> kDefaultSplits = {0.6, 0.2, 0.2};

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> val;
    std::vector<int> test;
};

/// Seeded shuffle split; fractions must sum to 1 within 1e-9.
SplitIndices split_indices(int n, const std::array<double, 3>& fractions, std::uint64_t seed);

Eigen::MatrixXd take_rows(const Eigen::Ref<const Eigen::MatrixXd>& mat,
                          const std::vector<int>& rows);

/// Per-column z-scoring transform; an empty transform is the identity.
struct ColumnTransform {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd sd;

    /// Column statistics of the given sample; zero-variance columns get sd 1.
    static ColumnTransform fit(const Eigen::Ref<const Eigen::MatrixXd>& samples);

    bool identity() const { return mean.size() == 0; }
    Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& mat) const;
};

} // namespace specseries

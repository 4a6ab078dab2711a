#include "specseries/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace specseries {

SplitIndices split_indices(int n, const std::array<double, 3>& fractions, std::uint64_t seed) {
    if (n < 1) {
        throw InputError("split_indices: n must be positive");
    }
    double sum = 0.0;
    for (const double f : fractions) {
        if (f < 0.0) {
            throw InputError("split fractions must be nonnegative");
        }
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw InputError("split fractions must sum to 1");
    }

    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);

    const int n_train = static_cast<int>(std::floor(fractions[0] * n));
    const int n_val = static_cast<int>(std::floor(fractions[1] * n));
    SplitIndices out;
    out.train.assign(idx.begin(), idx.begin() + n_train);
    out.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
    out.test.assign(idx.begin() + n_train + n_val, idx.end());
    return out;
}

Eigen::MatrixXd take_rows(const Eigen::Ref<const Eigen::MatrixXd>& mat,
                          const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), mat.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = mat.row(rows[i]);
    }
    return out;
}

ColumnTransform ColumnTransform::fit(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
    if (samples.rows() < 1) {
        throw InputError("ColumnTransform: empty sample");
    }
    ColumnTransform t;
    t.mean = samples.colwise().mean();
    Eigen::RowVectorXd var =
        (samples.rowwise() - t.mean).array().square().colwise().mean();
    t.sd = var.array().sqrt();
    for (Eigen::Index c = 0; c < t.sd.size(); ++c) {
        if (!(t.sd(c) > 0.0)) {
            t.sd(c) = 1.0;
        }
    }
    return t;
}

Eigen::MatrixXd ColumnTransform::apply(const Eigen::Ref<const Eigen::MatrixXd>& mat) const {
    if (identity()) {
        return mat;
    }
    if (mat.cols() != mean.size()) {
        throw InputError("ColumnTransform: column count mismatch");
    }
    return (mat.rowwise() - mean).array().rowwise() / sd.array();
}

} // namespace specseries

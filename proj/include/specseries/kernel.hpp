#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "specseries/errors.hpp"

namespace specseries {

enum class KernelFamily { Gaussian };

/**
 * Positive-definite kernel spec. The Gaussian family evaluates
 *
 *   K(z, y) = exp(-||z - y||^2 / (4 eps))
 *
 * with plain Euclidean distance in the ambient space; eps is a
 * squared-distance scale.
 */
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double bandwidth_eps = 1.0;

    void validate() const;
};

/// Checks a sample matrix: n >= 1, d >= 1, all entries finite.
void validate_sample_set(const Eigen::Ref<const Eigen::MatrixXd>& samples);

/// Scalar kernel evaluation; result in (0, 1].
double eval_kernel(const KernelSpec& spec,
                   const Eigen::Ref<const Eigen::RowVectorXd>& z,
                   const Eigen::Ref<const Eigen::RowVectorXd>& y);

/**
 * n x n matrix of pairwise kernel values on the rows of `samples`.
 * The upper triangle is computed and mirrored, so the result is
 * bit-exactly symmetric; the diagonal is exactly 1.
 */
Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                            const Eigen::Ref<const Eigen::MatrixXd>& samples);

/// Squared Euclidean distances between rows of a and rows of b, clamped at 0.
Eigen::MatrixXd pairwise_sq_dists(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                  const Eigen::Ref<const Eigen::MatrixXd>& b);

/// Kernel values from precomputed squared distances.
Eigen::MatrixXd kernel_from_sq_dists(const KernelSpec& spec,
                                     const Eigen::MatrixXd& sq_dists);

/**
 * Data-driven bandwidth grid: the {0.05, 0.10, 0.25, 0.50, 0.75} quantiles of
 * squared pairwise distances on a subsample of min(n, 1000) points, divided
 * by 4 to match the eps parameterization. Returns distinct positive values in
 * ascending order.
 */
std::vector<double> default_eps_grid(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                                     std::uint64_t seed = 0);

} // namespace specseries

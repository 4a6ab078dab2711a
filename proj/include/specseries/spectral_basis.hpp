#pragma once

#include <Eigen/Dense>

#include "specseries/kernel.hpp"

namespace specseries {

/// Components with eigenvalue below this fraction of the largest are dropped.
/// The Nystrom extension divides by the eigenvalue, so components this deep
/// in the spectrum are dominated by estimation variance; retaining them lets
/// held-out loss estimates be gamed by unstable, spiky extensions.
inline constexpr double kEigvalFloorRel = 1e-5;
/// Consecutive eigenvalue gaps below this fraction of the largest flag near-degeneracy.
inline constexpr double kGapWarnRel = 1e-8;

/**
 * Empirical eigenbasis of the kernel operator with respect to the sampling
 * distribution of the training points, obtained from the eigendecomposition
 * of their Gram matrix.
 *
 * The stored eigenvectors have unit Euclidean norm, strictly positive and
 * descending eigenvalues, and a fixed sign (the entry of largest magnitude
 * in each column is positive, magnitude ties broken by lowest index).
 *
 * Out-of-sample values come from the Nystrom extension: component j at a
 * point x is
 *
 *   psi_j(x) = (sqrt(n) / l_j) * sum_k eigvec_j[k] * K(x, train_k),
 *
 * which at a training point reduces to sqrt(n) * eigvec_j[k], and makes the
 * components empirically orthonormal in L2 of the training distribution.
 */
class SpectralBasis {
public:
    SpectralBasis() = default;

    /// Reassembles a basis from stored parts (deserialization); validates shapes
    /// and the positive-descending eigenvalue invariant.
    static SpectralBasis from_parts(Eigen::MatrixXd train_points, Eigen::MatrixXd eigvecs,
                                    Eigen::VectorXd eigvals, const KernelSpec& kernel,
                                    bool gap_warning);

    const Eigen::MatrixXd& train_points() const { return train_points_; }
    const Eigen::MatrixXd& eigvecs() const { return eigvecs_; }
    const Eigen::VectorXd& eigvals() const { return eigvals_; }
    const KernelSpec& kernel() const { return kernel_; }
    int j_kept() const { return static_cast<int>(eigvals_.size()); }
    int dim() const { return static_cast<int>(train_points_.cols()); }
    int n_train() const { return static_cast<int>(train_points_.rows()); }

    /// True when some consecutive eigenvalue gap fell below the warning tolerance.
    bool gap_warning() const { return gap_warning_; }

    /// Nystrom extension of all retained components at one point.
    Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

    /// Row i holds evaluate(xs.row(i)); computed as a single kernel block.
    Eigen::MatrixXd evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& xs) const;

private:
    friend SpectralBasis fit_basis_from_sq_dists(const Eigen::Ref<const Eigen::MatrixXd>&,
                                                 const Eigen::MatrixXd&, const KernelSpec&, int);

    Eigen::MatrixXd train_points_; // n x d
    Eigen::MatrixXd eigvecs_;      // n x J_kept, orthonormal columns
    Eigen::VectorXd eigvals_;      // J_kept, descending, all above the floor
    KernelSpec kernel_;
    bool gap_warning_ = false;
};

/**
 * Fits the basis by symmetric eigendecomposition of the Gram matrix of
 * `samples_g`, retaining min(j_max, #eigenvalues above the floor) top
 * components.
 *
 * Throws InputError when n < 2 or j_max < 1, and NumericalError when every
 * eigenvalue sits below the floor (degenerate kernel).
 */
SpectralBasis fit_basis(const Eigen::Ref<const Eigen::MatrixXd>& samples_g,
                        const KernelSpec& kernel, int j_max);

/// fit_basis with the squared-distance matrix precomputed (reused across a bandwidth grid).
SpectralBasis fit_basis_from_sq_dists(const Eigen::Ref<const Eigen::MatrixXd>& samples_g,
                                      const Eigen::MatrixXd& sq_dists,
                                      const KernelSpec& kernel, int j_max);

} // namespace specseries

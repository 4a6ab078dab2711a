#include "specseries/spectral_basis.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace specseries {

namespace {

// Top-k eigenpairs of a symmetric matrix (destroyed), descending order.
// dsyevr computes the requested index range exactly; with k == n this is a
// full dense decomposition.
void top_eigenpairs(Eigen::MatrixXd mat, int k, Eigen::VectorXd& vals, Eigen::MatrixXd& vecs) {
    const auto n = static_cast<lapack_int>(mat.rows());
    Eigen::VectorXd w(n);
    Eigen::MatrixXd z(n, k);
    std::vector<lapack_int> isuppz(static_cast<std::size_t>(2 * std::max(1, k)));
    lapack_int found = 0;
    const lapack_int il = n - k + 1;
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, mat.data(), n,
                                           0.0, 0.0, il, n, 0.0, &found, w.data(), z.data(), n,
                                           isuppz.data());
    if (info != 0 || found != k) {
        throw NumericalError("symmetric eigendecomposition failed");
    }
    // dsyevr returns ascending order; flip to descending.
    vals.resize(k);
    vecs.resize(n, k);
    for (int j = 0; j < k; ++j) {
        vals(j) = w(k - 1 - j);
        vecs.col(j) = z.col(k - 1 - j);
    }
}

// Largest-magnitude entry positive, magnitude ties broken by lowest index.
void fix_column_signs(Eigen::MatrixXd& vecs) {
    for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
        Eigen::Index arg = 0;
        double best = std::abs(vecs(0, j));
        for (Eigen::Index i = 1; i < vecs.rows(); ++i) {
            const double a = std::abs(vecs(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (vecs(arg, j) < 0.0) {
            vecs.col(j) = -vecs.col(j);
        }
    }
}

} // namespace

SpectralBasis SpectralBasis::from_parts(Eigen::MatrixXd train_points, Eigen::MatrixXd eigvecs,
                                        Eigen::VectorXd eigvals, const KernelSpec& kernel,
                                        bool gap_warning) {
    kernel.validate();
    validate_sample_set(train_points);
    if (eigvecs.rows() != train_points.rows() || eigvecs.cols() != eigvals.size() ||
        eigvals.size() < 1) {
        throw InputError("SpectralBasis::from_parts: inconsistent shapes");
    }
    for (Eigen::Index j = 0; j < eigvals.size(); ++j) {
        if (!(eigvals(j) > 0.0) || (j > 0 && eigvals(j) > eigvals(j - 1))) {
            throw InputError("SpectralBasis::from_parts: eigenvalues must be positive "
                             "and descending");
        }
    }
    SpectralBasis basis;
    basis.train_points_ = std::move(train_points);
    basis.eigvecs_ = std::move(eigvecs);
    basis.eigvals_ = std::move(eigvals);
    basis.kernel_ = kernel;
    basis.gap_warning_ = gap_warning;
    return basis;
}

SpectralBasis fit_basis(const Eigen::Ref<const Eigen::MatrixXd>& samples_g,
                        const KernelSpec& kernel, int j_max) {
    validate_sample_set(samples_g);
    return fit_basis_from_sq_dists(samples_g, pairwise_sq_dists(samples_g, samples_g),
                                   kernel, j_max);
}

SpectralBasis fit_basis_from_sq_dists(const Eigen::Ref<const Eigen::MatrixXd>& samples_g,
                                      const Eigen::MatrixXd& sq_dists,
                                      const KernelSpec& kernel, int j_max) {
    kernel.validate();
    validate_sample_set(samples_g);
    const auto n = static_cast<int>(samples_g.rows());
    if (n < 2) {
        throw InputError("fit_basis: need at least two training points");
    }
    if (j_max < 1) {
        throw InputError("fit_basis: j_max must be at least 1");
    }

    Eigen::MatrixXd gram(n, n);
    const double scale = 1.0 / (4.0 * kernel.bandwidth_eps);
    for (int i = 0; i < n; ++i) {
        gram(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double v = std::exp(-sq_dists(i, j) * scale);
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }

    // One extra pair beyond j_max so the gap below the last retained
    // component is visible to the degeneracy check.
    const int j_req = std::min(j_max + 1, n);
    Eigen::VectorXd vals;
    Eigen::MatrixXd vecs;
    top_eigenpairs(std::move(gram), j_req, vals, vecs);

    const double floor = kEigvalFloorRel * vals(0);
    int above = 0;
    while (above < j_req && vals(above) > floor) {
        ++above;
    }
    if (above == 0) {
        throw NumericalError("fit_basis: degenerate kernel, all eigenvalues below floor "
                             "(bandwidth far too small or too large)");
    }
    const int j_kept = std::min(j_max, above);

    SpectralBasis basis;
    basis.train_points_ = samples_g;
    basis.kernel_ = kernel;
    basis.eigvals_ = vals.head(j_kept);
    basis.eigvecs_ = vecs.leftCols(j_kept);
    fix_column_signs(basis.eigvecs_);

    const double gap_tol = kGapWarnRel * vals(0);
    for (int j = 0; j + 1 < j_req; ++j) {
        if (j < j_kept && vals(j) - vals(j + 1) < gap_tol) {
            basis.gap_warning_ = true;
            break;
        }
    }
    return basis;
}

Eigen::VectorXd SpectralBasis::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    if (x.size() != train_points_.cols()) {
        throw InputError("evaluate_basis: point dimension does not match training points");
    }
    if (!x.allFinite()) {
        throw InputError("evaluate_basis: non-finite coordinate");
    }
    const Eigen::Index n = train_points_.rows();
    Eigen::VectorXd kvec(n);
    const double scale = 1.0 / (4.0 * kernel_.bandwidth_eps);
    for (Eigen::Index k = 0; k < n; ++k) {
        kvec(k) = std::exp(-(x - train_points_.row(k)).squaredNorm() * scale);
    }
    const double root_n = std::sqrt(static_cast<double>(n));
    Eigen::VectorXd out = eigvecs_.transpose() * kvec;
    out.array() *= root_n / eigvals_.array();
    return out;
}

Eigen::MatrixXd SpectralBasis::evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& xs) const {
    validate_sample_set(xs);
    if (xs.cols() != train_points_.cols()) {
        throw InputError("evaluate_basis_batch: dimension does not match training points");
    }
    const Eigen::MatrixXd kblock =
        kernel_from_sq_dists(kernel_, pairwise_sq_dists(xs, train_points_));
    const double root_n = std::sqrt(static_cast<double>(train_points_.rows()));
    Eigen::MatrixXd out = kblock * eigvecs_;
    out.array().rowwise() *= (root_n / eigvals_.array()).transpose();
    return out;
}

} // namespace specseries

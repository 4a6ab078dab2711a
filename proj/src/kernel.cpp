#include "specseries/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace specseries {

void KernelSpec::validate() const {
    if (!(bandwidth_eps > 0.0) || !std::isfinite(bandwidth_eps)) {
        throw InputError("kernel bandwidth eps must be a positive finite real");
    }
}

void validate_sample_set(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
    if (samples.rows() < 1 || samples.cols() < 1) {
        throw InputError("sample set must have at least one row and one column");
    }
    if (!samples.allFinite()) {
        throw InputError("sample set contains non-finite entries");
    }
}

double eval_kernel(const KernelSpec& spec,
                   const Eigen::Ref<const Eigen::RowVectorXd>& z,
                   const Eigen::Ref<const Eigen::RowVectorXd>& y) {
    spec.validate();
    if (z.size() != y.size()) {
        throw InputError("eval_kernel: points have different dimensions");
    }
    if (!z.allFinite() || !y.allFinite()) {
        throw InputError("eval_kernel: non-finite coordinate");
    }
    const double sq = (z - y).squaredNorm();
    return std::exp(-sq / (4.0 * spec.bandwidth_eps));
}

Eigen::MatrixXd pairwise_sq_dists(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                  const Eigen::Ref<const Eigen::MatrixXd>& b) {
    if (a.cols() != b.cols()) {
        throw InputError("pairwise_sq_dists: dimension mismatch");
    }
    const Eigen::VectorXd a2 = a.rowwise().squaredNorm();
    const Eigen::VectorXd b2 = b.rowwise().squaredNorm();
    Eigen::MatrixXd sq = -2.0 * (a * b.transpose());
    sq.colwise() += a2;
    sq.rowwise() += b2.transpose();
    return sq.cwiseMax(0.0);
}

Eigen::MatrixXd kernel_from_sq_dists(const KernelSpec& spec,
                                     const Eigen::MatrixXd& sq_dists) {
    spec.validate();
    return (-sq_dists / (4.0 * spec.bandwidth_eps)).array().exp();
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                            const Eigen::Ref<const Eigen::MatrixXd>& samples) {
    spec.validate();
    validate_sample_set(samples);
    const Eigen::Index n = samples.rows();
    const Eigen::MatrixXd sq = pairwise_sq_dists(samples, samples);
    Eigen::MatrixXd gram(n, n);
    const double scale = 1.0 / (4.0 * spec.bandwidth_eps);
    for (Eigen::Index i = 0; i < n; ++i) {
        gram(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = std::exp(-sq(i, j) * scale);
            gram(i, j) = v;
            gram(j, i) = v;
        }
    }
    return gram;
}

namespace {

// Linear-interpolation quantile of an ascending vector.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

std::vector<double> default_eps_grid(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                                     std::uint64_t seed) {
    validate_sample_set(samples);
    const Eigen::Index n = samples.rows();
    if (n < 2) {
        throw InputError("default_eps_grid: need at least two points");
    }

    const Eigen::Index cap = 1000;
    Eigen::MatrixXd sub;
    if (n <= cap) {
        sub = samples;
    } else {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        std::mt19937_64 rng(seed);
        std::shuffle(idx.begin(), idx.end(), rng);
        sub.resize(cap, samples.cols());
        for (Eigen::Index i = 0; i < cap; ++i) {
            sub.row(i) = samples.row(idx[static_cast<std::size_t>(i)]);
        }
    }

    const Eigen::Index m = sub.rows();
    const Eigen::MatrixXd sq = pairwise_sq_dists(sub, sub);
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            dists.push_back(sq(i, j));
        }
    }
    std::sort(dists.begin(), dists.end());

    static constexpr double kQuantiles[] = {0.05, 0.10, 0.25, 0.50, 0.75};
    std::vector<double> grid;
    for (const double q : kQuantiles) {
        const double eps = quantile_sorted(dists, q) / 4.0;
        if (eps > 0.0 && (grid.empty() || eps > grid.back())) {
            grid.push_back(eps);
        }
    }
    if (grid.empty()) {
        throw NumericalError("default_eps_grid: all pairwise distances are zero");
    }
    return grid;
}

} // namespace specseries

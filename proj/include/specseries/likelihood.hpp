#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "specseries/spectral_basis.hpp"

namespace specseries {

/// Floor applied to per-observation likelihood values before taking logs.
inline constexpr double kLikelihoodFloor = 1e-300;
/// Default number of label permutations in the held-out loss.
inline constexpr int kDefaultPermutations = 20;

/// Axis-aligned parameter box with per-component (low, high) bounds.
struct ParamBox {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    int dim() const { return static_cast<int>(lo.size()); }
    double volume() const;
    bool contains(const Eigen::Ref<const Eigen::RowVectorXd>& theta) const;
    /// Affine map sending each component of [lo, hi] to [0, 1].
    Eigen::RowVectorXd standardize(const Eigen::Ref<const Eigen::RowVectorXd>& theta) const;
    /// Requires lo <= hi per component; strict when degenerate boxes are not allowed.
    void validate(bool allow_degenerate = false) const;
};

/// Uniform evaluation grid over a parameter box; cell_volume = volume / #points.
struct ThetaGrid {
    Eigen::MatrixXd points; // m_grid x p, cell centers
    double cell_volume = 0.0;
    ParamBox box;

    static ThetaGrid regular(const ParamBox& box, int points_per_dim);
};

/// Paired (x, theta) draws from the joint simulation distribution.
struct JointSample {
    Eigen::MatrixXd x;     // n x d
    Eigen::MatrixXd theta; // n x p

    int n() const { return static_cast<int>(x.rows()); }
    void validate() const;
};

/**
 * Tensor-product spectral series estimate of the likelihood ratio
 * f(x|theta) / g(x): a data basis fit on the g-sample, a parameter basis fit
 * on the prior draws, and a coefficient matrix estimated as the empirical
 * mean of products of the two bases over the joint sample.
 */
struct LikelihoodModel {
    SpectralBasis basis_x;
    SpectralBasis basis_theta;
    Eigen::MatrixXd coeffs; // j_kept_x rows, i_kept_theta cols
    int i_selected = 1;
    int j_selected = 1;
    bool clip_negative = true;
};

struct LikelihoodLossEntry {
    double eps_x = 0.0;
    double eps_theta = 0.0;
    int i = 0;
    int j = 0;
    double loss = 0.0;
};

struct LikelihoodLossReport {
    std::vector<LikelihoodLossEntry> entries;
    LikelihoodLossEntry selected;
    std::vector<double> eps_grid_x;
    std::vector<double> eps_grid_theta;
};

/// B seeded permutations of 0..n-1 (used by the first loss term).
std::vector<std::vector<int>> make_permutations(int n, int b, std::uint64_t seed);

LikelihoodModel fit_likelihood(const JointSample& joint,
                               const Eigen::Ref<const Eigen::MatrixXd>& samples_g,
                               const KernelSpec& kernel_x, const KernelSpec& kernel_theta,
                               int i_max, int j_max);

/// Coefficient step alone: entry (j, i) is the mean over joint pairs of
/// psi_j(x_k) * phi_i(theta_k). Works for any pairing size, including one.
Eigen::MatrixXd fit_likelihood_coeffs(const SpectralBasis& basis_x,
                                      const SpectralBasis& basis_theta,
                                      const JointSample& joint);

/// Double-truncated tensor series, clipped at 0; i/j default to the selected truncations.
double predict_likelihood(const LikelihoodModel& model,
                          const Eigen::Ref<const Eigen::RowVectorXd>& x,
                          const Eigen::Ref<const Eigen::RowVectorXd>& theta,
                          int i = 0, int j = 0);

/// Entry (k, g) holds the prediction at (xs.row(k), thetas.row(g)).
Eigen::MatrixXd predict_likelihood_grid(const LikelihoodModel& model,
                                        const Eigen::Ref<const Eigen::MatrixXd>& xs,
                                        const Eigen::Ref<const Eigen::MatrixXd>& thetas,
                                        int i = 0, int j = 0);

/**
 * Permutation estimate of the quadratic likelihood loss for an arbitrary
 * predictor: the squared term pairs validation g-points with permuted theta
 * labels, the cross term uses the true joint pairing.
 */
double estimate_likelihood_loss(
    const std::function<double(const Eigen::RowVectorXd&, const Eigen::RowVectorXd&)>& predictor,
    const Eigen::Ref<const Eigen::MatrixXd>& val_g, const JointSample& val_joint,
    const std::vector<std::vector<int>>& perms);

/// Model loss at truncation (i, j) with B fresh seeded permutations.
double estimate_likelihood_loss(const LikelihoodModel& model,
                                const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                                const JointSample& val_joint, int b, int i, int j,
                                std::uint64_t seed);

/// Same with explicit permutations (test hook; also the scan-equivalence anchor).
double estimate_likelihood_loss_with_perms(const LikelihoodModel& model,
                                           const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                                           const JointSample& val_joint,
                                           const std::vector<std::vector<int>>& perms,
                                           int i, int j);

/**
 * Losses for every truncation pair (I, J) from one basis evaluation per
 * validation point, exploiting the prefix structure of the tensor series.
 * Entry (j-1, i-1) matches estimate_likelihood_loss_with_perms at (i, j)
 * exactly.
 */
Eigen::MatrixXd likelihood_ij_scan(const LikelihoodModel& model,
                                   const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                                   const JointSample& val_joint,
                                   const std::vector<std::vector<int>>& perms);

/**
 * Joint (eps_x, eps_theta, I, J) selection by minimal estimated loss; ties
 * broken by smaller I+J, then smaller bandwidths, then smaller I.
 */
std::pair<LikelihoodModel, LikelihoodLossReport>
select_likelihood_model(const JointSample& train_joint,
                        const Eigen::Ref<const Eigen::MatrixXd>& train_g,
                        const JointSample& val_joint,
                        const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                        const std::vector<double>& eps_grid_x,
                        const std::vector<double>& eps_grid_theta,
                        int i_max, int j_max, int b, std::uint64_t seed);

struct PosteriorResult {
    Eigen::VectorXd density; // one value per grid point
    bool flat_warning = false;
};

/**
 * Posterior over the grid for a set of observations: per-observation
 * likelihoods are floored, log-accumulated, exponentiated stably and
 * normalized so that sum(density) * cell_volume = 1.
 */
PosteriorResult sample_log_likelihood(const LikelihoodModel& model,
                                      const Eigen::Ref<const Eigen::MatrixXd>& observations,
                                      const ThetaGrid& grid);

/**
 * Mean over test pairs of the theta-normalized likelihood at the true pair,
 * scaled by the box volume so a flat predictor scores exactly 1.
 */
double average_likelihood(const LikelihoodModel& model, const JointSample& test,
                          const ThetaGrid& grid);

/// The same metric for an arbitrary predictor (grid used for normalization).
double average_likelihood(
    const std::function<double(const Eigen::RowVectorXd&, const Eigen::RowVectorXd&)>& predictor,
    const JointSample& test, const ThetaGrid& grid);

/// Posterior-weighted distance to theta_star, components standardized to [0, 1].
double posterior_distance_to_truth(const LikelihoodModel& model,
                                   const Eigen::Ref<const Eigen::MatrixXd>& observations,
                                   const Eigen::Ref<const Eigen::RowVectorXd>& theta_star,
                                   const ThetaGrid& grid);

/// Mean single-observation posterior distance to the true theta over test pairs.
double average_distance_to_truth(const LikelihoodModel& model, const JointSample& test,
                                 const ThetaGrid& grid);

/// The same metric for an arbitrary predictor.
double average_distance_to_truth(
    const std::function<double(const Eigen::RowVectorXd&, const Eigen::RowVectorXd&)>& predictor,
    const JointSample& test, const ThetaGrid& grid);

} // namespace specseries

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "specseries/ratio.hpp"
#include "specseries/simulators.hpp"

namespace specseries {

/// Floor applied to the denominator density of the KDE ratio baseline.
inline constexpr double kKdeGFloor = 1e-12;

/**
 * Product-Gaussian kernel density estimate. With an unset bandwidth the
 * Silverman reference rule is applied per dimension:
 *
 *   h_c = sd_c * (4 / ((d + 2) n))^(1 / (d + 4)).
 *
 * Densities are accumulated in log space, so high-dimensional evaluations
 * underflow to 0 instead of producing garbage.
 */
class KdeModel {
public:
    static KdeModel fit(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                        double bandwidth = std::numeric_limits<double>::quiet_NaN());
    static KdeModel fit_with_bandwidths(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                                        const Eigen::Ref<const Eigen::RowVectorXd>& bandwidths);

    double density(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    const Eigen::RowVectorXd& bandwidths() const { return bandwidths_; }

private:
    Eigen::MatrixXd samples_;
    Eigen::RowVectorXd bandwidths_;
};

/// Single-call KDE evaluation; NaN bandwidth means the reference rule.
double kde_density(const Eigen::Ref<const Eigen::MatrixXd>& samples, double bandwidth,
                   const Eigen::Ref<const Eigen::RowVectorXd>& x);

/**
 * Ratio-of-KDEs baseline: f_hat / max(g_hat, g_floor). The floor keeps the
 * ratio finite where the denominator estimate collapses; predictions there
 * are capped and flagged.
 */
struct KdeRatioBaseline {
    KdeModel f_hat;
    KdeModel g_hat;
    double g_floor = kKdeGFloor;

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                   bool* floored = nullptr) const;
    std::function<double(const Eigen::RowVectorXd&)> predictor() const;
};

/**
 * Fits the baseline with bandwidth selection: for d <= 4 a multiplier grid
 * on the reference rule is tuned per density against the held-out ratio
 * loss; in higher dimensions the reference rule is used directly.
 */
KdeRatioBaseline fit_kde_ratio_baseline(const Eigen::Ref<const Eigen::MatrixXd>& train_f,
                                        const Eigen::Ref<const Eigen::MatrixXd>& train_g,
                                        const Eigen::Ref<const Eigen::MatrixXd>& val_f,
                                        const Eigen::Ref<const Eigen::MatrixXd>& val_g);

/// Monte Carlo mean of (predictor - truth)^2 over the rows of eval_sample.
double mise_vs_truth(const std::function<double(const Eigen::RowVectorXd&)>& predictor,
                     const std::function<double(const Eigen::RowVectorXd&)>& truth,
                     const Eigen::Ref<const Eigen::MatrixXd>& eval_sample);

/// Analytic ratio of N(mu, 1) to N(0, 1) in one dimension.
double gaussian_shift_true_ratio(double mu, double x);

enum class Benchmark { RatioMise, SpiralDistance, EdgesDistance, KleinAvgLikelihood };

Benchmark parse_benchmark(const std::string& name);
std::string benchmark_name(Benchmark benchmark);

struct StudyConfig {
    Benchmark benchmark = Benchmark::RatioMise;
    std::vector<int> grid;  // sample sizes n, or observation counts m
    int n_seeds = 10;
    std::uint64_t base_seed = 0;
    int n_sim = 2000;       // simulation budget for likelihood benchmarks
    int n_replicates = 40;  // posterior replicates per cell
    int grid_points_per_dim = 50;
    int ratio_j_max = 30;
    int lik_i_max = 20;
    int lik_j_max = 20;
    int b_permutations = kDefaultPermutations;
};

struct StudyCell {
    int size = 0;
    std::uint64_t seed = 0;
    double metric = 0.0;
    bool valid = false;
    std::string error;
};

struct StudySummaryRow {
    int size = 0;
    double mean = 0.0;
    double se = 0.0;
    int n_valid = 0;
};

struct StudyResult {
    std::vector<StudyCell> cells;
    std::vector<StudySummaryRow> summary; // grid order
};

/**
 * Runs the full estimation pipeline per (size, seed) cell and aggregates the
 * benchmark metric. Failures are recorded per cell rather than aborting the
 * study. For the observation-count benchmarks the fitted model is shared
 * across the m-grid within a seed, matching the protocol of holding the
 * simulation budget fixed while the observed sample grows.
 */
StudyResult convergence_study(const StudyConfig& config);

/// True when the summary means never increase along the grid.
bool monotone_non_increasing(const std::vector<StudySummaryRow>& summary);

/// Deterministic stream seed for a study cell.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

} // namespace specseries

#include "specseries/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <tuple>

namespace specseries {

double ParamBox::volume() const {
    validate();
    return (hi - lo).prod();
}

bool ParamBox::contains(const Eigen::Ref<const Eigen::RowVectorXd>& theta) const {
    if (theta.size() != lo.size()) {
        return false;
    }
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (theta(i) < lo(i) || theta(i) > hi(i)) {
            return false;
        }
    }
    return true;
}

Eigen::RowVectorXd
ParamBox::standardize(const Eigen::Ref<const Eigen::RowVectorXd>& theta) const {
    if (theta.size() != lo.size()) {
        throw InputError("ParamBox::standardize: dimension mismatch");
    }
    return (theta.transpose() - lo).cwiseQuotient(hi - lo).transpose();
}

void ParamBox::validate(bool allow_degenerate) const {
    if (lo.size() != hi.size() || lo.size() == 0) {
        throw InputError("parameter box has mismatched or empty bounds");
    }
    if (!lo.allFinite() || !hi.allFinite()) {
        throw InputError("parameter box has non-finite bounds");
    }
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        const bool ok = allow_degenerate ? lo(i) <= hi(i) : lo(i) < hi(i);
        if (!ok) {
            throw InputError("parameter box requires low < high per component");
        }
    }
}

ThetaGrid ThetaGrid::regular(const ParamBox& box, int points_per_dim) {
    box.validate();
    if (points_per_dim < 1) {
        throw InputError("ThetaGrid: points_per_dim must be at least 1");
    }
    const int p = box.dim();
    double m_real = 1.0;
    for (int i = 0; i < p; ++i) {
        m_real *= points_per_dim;
    }
    if (m_real > 1e7) {
        throw InputError("ThetaGrid: grid too large");
    }
    const auto m = static_cast<Eigen::Index>(m_real);

    ThetaGrid grid;
    grid.box = box;
    grid.points.resize(m, p);
    const Eigen::VectorXd step = (box.hi - box.lo) / static_cast<double>(points_per_dim);
    std::vector<int> odo(static_cast<std::size_t>(p), 0);
    for (Eigen::Index g = 0; g < m; ++g) {
        for (int c = 0; c < p; ++c) {
            grid.points(g, c) = box.lo(c) + (odo[static_cast<std::size_t>(c)] + 0.5) * step(c);
        }
        for (int c = p - 1; c >= 0; --c) {
            if (++odo[static_cast<std::size_t>(c)] < points_per_dim) {
                break;
            }
            odo[static_cast<std::size_t>(c)] = 0;
        }
    }
    grid.cell_volume = box.volume() / static_cast<double>(m);
    return grid;
}

void JointSample::validate() const {
    validate_sample_set(x);
    validate_sample_set(theta);
    if (x.rows() != theta.rows()) {
        throw InputError("joint sample: x and theta row counts differ");
    }
}

std::vector<std::vector<int>> make_permutations(int n, int b, std::uint64_t seed) {
    if (n < 1) {
        throw InputError("make_permutations: n must be positive");
    }
    if (b < 1) {
        throw InputError("make_permutations: need at least one permutation");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::vector<int>> perms(static_cast<std::size_t>(b));
    for (auto& perm : perms) {
        perm.resize(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
    }
    return perms;
}

namespace {

void check_truncation(const LikelihoodModel& model, int& i, int& j) {
    if (i == 0) {
        i = model.i_selected;
    }
    if (j == 0) {
        j = model.j_selected;
    }
    if (i < 1 || i > model.basis_theta.j_kept() || j < 1 || j > model.basis_x.j_kept()) {
        throw InputError("likelihood truncation (I, J) out of range");
    }
}

// Tensor-series partial sums at one evaluation point. For each truncation
// pair (j, i) the clipped value (squared when requested) is added to
// acc(j, i). Row partial sums r and the running matrix s give every prefix
// in one pass, with the same operation order as the direct predictor.
void scan_accumulate(const Eigen::RowVectorXd& psi, const Eigen::RowVectorXd& phi,
                     const Eigen::MatrixXd& coeffs, int j_limit, int i_limit, bool clip,
                     bool square, Eigen::MatrixXd& acc, Eigen::VectorXd& s_buf) {
    s_buf.setZero();
    for (int j = 0; j < j_limit; ++j) {
        double r = 0.0;
        for (int i = 0; i < i_limit; ++i) {
            r += coeffs(j, i) * phi(i);
            s_buf(i) += psi(j) * r;
            double v = clip ? std::max(s_buf(i), 0.0) : s_buf(i);
            acc(j, i) += square ? v * v : v;
        }
    }
}

void check_perms(const std::vector<std::vector<int>>& perms, int n) {
    if (perms.empty()) {
        throw InputError("likelihood loss: need at least one permutation (B >= 1)");
    }
    for (const auto& perm : perms) {
        if (static_cast<int>(perm.size()) != n) {
            throw InputError("likelihood loss: permutation length does not match sample size");
        }
    }
}

// Loss surface over all truncation prefixes from precomputed basis features.
Eigen::MatrixXd scan_from_features(const Eigen::MatrixXd& psi_g, const Eigen::MatrixXd& phi,
                                   const Eigen::MatrixXd& psi_f, const Eigen::MatrixXd& coeffs,
                                   const std::vector<std::vector<int>>& perms, bool clip,
                                   int j_limit, int i_limit) {
    const Eigen::Index n = psi_g.rows();
    Eigen::MatrixXd acc_sq = Eigen::MatrixXd::Zero(j_limit, i_limit);
    Eigen::MatrixXd acc_cross = Eigen::MatrixXd::Zero(j_limit, i_limit);
    Eigen::VectorXd s_buf(i_limit);

    for (const auto& perm : perms) {
        for (Eigen::Index k = 0; k < n; ++k) {
            scan_accumulate(psi_g.row(k), phi.row(perm[static_cast<std::size_t>(k)]), coeffs,
                            j_limit, i_limit, clip, true, acc_sq, s_buf);
        }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        scan_accumulate(psi_f.row(k), phi.row(k), coeffs, j_limit, i_limit, clip, false,
                        acc_cross, s_buf);
    }

    const double bn = static_cast<double>(perms.size()) * static_cast<double>(n);
    const double nn = static_cast<double>(n);
    return acc_sq / bn - 2.0 * (acc_cross / nn);
}

struct LikelihoodFeatures {
    Eigen::MatrixXd psi_g;
    Eigen::MatrixXd phi;
    Eigen::MatrixXd psi_f;
};

LikelihoodFeatures validation_features(const LikelihoodModel& model,
                                       const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                                       const JointSample& val_joint) {
    val_joint.validate();
    validate_sample_set(val_g);
    if (val_g.rows() != val_joint.n()) {
        throw InputError("likelihood loss: val_g and val_joint must have equal sizes "
                         "(index-paired estimator)");
    }
    return {model.basis_x.evaluate_batch(val_g),
            model.basis_theta.evaluate_batch(val_joint.theta),
            model.basis_x.evaluate_batch(val_joint.x)};
}

} // namespace

LikelihoodModel fit_likelihood(const JointSample& joint,
                               const Eigen::Ref<const Eigen::MatrixXd>& samples_g,
                               const KernelSpec& kernel_x, const KernelSpec& kernel_theta,
                               int i_max, int j_max) {
    joint.validate();
    validate_sample_set(samples_g);
    if (samples_g.cols() != joint.x.cols()) {
        throw InputError("fit_likelihood: g-sample and joint x dimensions differ");
    }

    LikelihoodModel model;
    model.basis_x = fit_basis(samples_g, kernel_x, j_max);
    model.basis_theta = fit_basis(joint.theta, kernel_theta, i_max);
    model.coeffs = fit_likelihood_coeffs(model.basis_x, model.basis_theta, joint);
    model.i_selected = model.basis_theta.j_kept();
    model.j_selected = model.basis_x.j_kept();
    return model;
}

Eigen::MatrixXd fit_likelihood_coeffs(const SpectralBasis& basis_x,
                                      const SpectralBasis& basis_theta,
                                      const JointSample& joint) {
    joint.validate();
    const Eigen::MatrixXd psi = basis_x.evaluate_batch(joint.x);
    const Eigen::MatrixXd phi = basis_theta.evaluate_batch(joint.theta);
    return (psi.transpose() * phi) / static_cast<double>(joint.n());
}

double predict_likelihood(const LikelihoodModel& model,
                          const Eigen::Ref<const Eigen::RowVectorXd>& x,
                          const Eigen::Ref<const Eigen::RowVectorXd>& theta, int i, int j) {
    check_truncation(model, i, j);
    const Eigen::VectorXd psi = model.basis_x.evaluate(x);
    const Eigen::VectorXd phi = model.basis_theta.evaluate(theta);
    double s = 0.0;
    for (int jj = 0; jj < j; ++jj) {
        double r = 0.0;
        for (int ii = 0; ii < i; ++ii) {
            r += model.coeffs(jj, ii) * phi(ii);
        }
        s += psi(jj) * r;
    }
    return model.clip_negative ? std::max(s, 0.0) : s;
}

Eigen::MatrixXd predict_likelihood_grid(const LikelihoodModel& model,
                                        const Eigen::Ref<const Eigen::MatrixXd>& xs,
                                        const Eigen::Ref<const Eigen::MatrixXd>& thetas,
                                        int i, int j) {
    check_truncation(model, i, j);
    const Eigen::MatrixXd psi = model.basis_x.evaluate_batch(xs);
    const Eigen::MatrixXd phi = model.basis_theta.evaluate_batch(thetas);
    Eigen::MatrixXd out =
        psi.leftCols(j) * model.coeffs.topLeftCorner(j, i) * phi.leftCols(i).transpose();
    if (model.clip_negative) {
        out = out.cwiseMax(0.0);
    }
    return out;
}

double estimate_likelihood_loss(
    const std::function<double(const Eigen::RowVectorXd&, const Eigen::RowVectorXd&)>& predictor,
    const Eigen::Ref<const Eigen::MatrixXd>& val_g, const JointSample& val_joint,
    const std::vector<std::vector<int>>& perms) {
    val_joint.validate();
    validate_sample_set(val_g);
    if (val_g.rows() != val_joint.n()) {
        throw InputError("likelihood loss: val_g and val_joint must have equal sizes");
    }
    const Eigen::Index n = val_g.rows();
    check_perms(perms, static_cast<int>(n));

    double acc_sq = 0.0;
    for (const auto& perm : perms) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const double v =
                predictor(val_g.row(k), val_joint.theta.row(perm[static_cast<std::size_t>(k)]));
            acc_sq += v * v;
        }
    }
    double acc_cross = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        acc_cross += predictor(val_joint.x.row(k), val_joint.theta.row(k));
    }
    const double bn = static_cast<double>(perms.size()) * static_cast<double>(n);
    return acc_sq / bn - 2.0 * (acc_cross / static_cast<double>(n));
}

double estimate_likelihood_loss_with_perms(const LikelihoodModel& model,
                                           const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                                           const JointSample& val_joint,
                                           const std::vector<std::vector<int>>& perms,
                                           int i, int j) {
    check_truncation(model, i, j);
    const LikelihoodFeatures f = validation_features(model, val_g, val_joint);
    check_perms(perms, val_joint.n());
    const Eigen::MatrixXd losses = scan_from_features(f.psi_g, f.phi, f.psi_f, model.coeffs,
                                                      perms, model.clip_negative, j, i);
    return losses(j - 1, i - 1);
}

double estimate_likelihood_loss(const LikelihoodModel& model,
                                const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                                const JointSample& val_joint, int b, int i, int j,
                                std::uint64_t seed) {
    if (b < 1) {
        throw InputError("estimate_likelihood_loss: B must be at least 1");
    }
    return estimate_likelihood_loss_with_perms(model, val_g, val_joint,
                                               make_permutations(val_joint.n(), b, seed), i, j);
}

Eigen::MatrixXd likelihood_ij_scan(const LikelihoodModel& model,
                                   const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                                   const JointSample& val_joint,
                                   const std::vector<std::vector<int>>& perms) {
    const LikelihoodFeatures f = validation_features(model, val_g, val_joint);
    check_perms(perms, val_joint.n());
    return scan_from_features(f.psi_g, f.phi, f.psi_f, model.coeffs, perms,
                              model.clip_negative, model.basis_x.j_kept(),
                              model.basis_theta.j_kept());
}

std::pair<LikelihoodModel, LikelihoodLossReport>
select_likelihood_model(const JointSample& train_joint,
                        const Eigen::Ref<const Eigen::MatrixXd>& train_g,
                        const JointSample& val_joint,
                        const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                        const std::vector<double>& eps_grid_x,
                        const std::vector<double>& eps_grid_theta,
                        int i_max, int j_max, int b, std::uint64_t seed) {
    if (eps_grid_x.empty() || eps_grid_theta.empty()) {
        throw InputError("select_likelihood_model: empty bandwidth grid");
    }
    if (b < 1) {
        throw InputError("select_likelihood_model: B must be at least 1");
    }
    train_joint.validate();
    val_joint.validate();
    validate_sample_set(train_g);
    validate_sample_set(val_g);
    if (val_g.rows() != val_joint.n()) {
        throw InputError("select_likelihood_model: val_g and val_joint sizes differ");
    }

    const auto perms = make_permutations(val_joint.n(), b, seed);
    const Eigen::MatrixXd sq_x = pairwise_sq_dists(train_g, train_g);
    const Eigen::MatrixXd sq_theta = pairwise_sq_dists(train_joint.theta, train_joint.theta);

    LikelihoodLossReport report;
    report.eps_grid_x = eps_grid_x;
    report.eps_grid_theta = eps_grid_theta;
    std::string first_error;

    // The theta side does not depend on eps_x; fit and evaluate it once per
    // theta bandwidth.
    struct ThetaSide {
        double eps = 0.0;
        SpectralBasis basis;
        Eigen::MatrixXd phi_train;
        Eigen::MatrixXd phi_val;
    };
    std::vector<ThetaSide> theta_sides;
    for (const double eps_theta : eps_grid_theta) {
        try {
            ThetaSide side;
            side.eps = eps_theta;
            side.basis = fit_basis_from_sq_dists(
                train_joint.theta, sq_theta, KernelSpec{KernelFamily::Gaussian, eps_theta},
                i_max);
            side.phi_train = side.basis.evaluate_batch(train_joint.theta);
            side.phi_val = side.basis.evaluate_batch(val_joint.theta);
            theta_sides.push_back(std::move(side));
        } catch (const NumericalError& e) {
            if (first_error.empty()) {
                first_error = e.what();
            }
        }
    }

    for (const double eps_x : eps_grid_x) {
        SpectralBasis basis_x;
        Eigen::MatrixXd psi_train, psi_val_g, psi_val_f;
        try {
            basis_x = fit_basis_from_sq_dists(train_g, sq_x,
                                              KernelSpec{KernelFamily::Gaussian, eps_x}, j_max);
            psi_train = basis_x.evaluate_batch(train_joint.x);
            psi_val_g = basis_x.evaluate_batch(val_g);
            psi_val_f = basis_x.evaluate_batch(val_joint.x);
        } catch (const NumericalError& e) {
            if (first_error.empty()) {
                first_error = e.what();
            }
            continue;
        }
        for (const ThetaSide& side : theta_sides) {
            const Eigen::MatrixXd coeffs =
                (psi_train.transpose() * side.phi_train) / static_cast<double>(train_joint.n());
            const Eigen::MatrixXd losses =
                scan_from_features(psi_val_g, side.phi_val, psi_val_f, coeffs, perms, true,
                                   basis_x.j_kept(), side.basis.j_kept());
            for (int j = 1; j <= losses.rows(); ++j) {
                for (int i = 1; i <= losses.cols(); ++i) {
                    report.entries.push_back({eps_x, side.eps, i, j, losses(j - 1, i - 1)});
                }
            }
        }
    }

    // Minimal loss; ties by smaller I+J, then smaller bandwidths, then smaller I.
    auto better = [](const LikelihoodLossEntry& a, const LikelihoodLossEntry& b2) {
        const auto key = [](const LikelihoodLossEntry& e) {
            return std::make_tuple(e.loss, e.i + e.j, e.eps_x, e.eps_theta, e.i);
        };
        return key(a) < key(b2);
    };
    if (report.entries.empty()) {
        throw NumericalError("select_likelihood_model: every configuration failed: " +
                             first_error);
    }
    report.selected = *std::min_element(report.entries.begin(), report.entries.end(), better);

    // Refit the winning configuration.
    LikelihoodModel best;
    best.basis_x = fit_basis_from_sq_dists(
        train_g, sq_x, KernelSpec{KernelFamily::Gaussian, report.selected.eps_x}, j_max);
    best.basis_theta = fit_basis_from_sq_dists(
        train_joint.theta, sq_theta, KernelSpec{KernelFamily::Gaussian, report.selected.eps_theta},
        i_max);
    const Eigen::MatrixXd psi_train = best.basis_x.evaluate_batch(train_joint.x);
    const Eigen::MatrixXd phi_train = best.basis_theta.evaluate_batch(train_joint.theta);
    best.coeffs = (psi_train.transpose() * phi_train) / static_cast<double>(train_joint.n());
    best.i_selected = report.selected.i;
    best.j_selected = report.selected.j;
    return {std::move(best), std::move(report)};
}

PosteriorResult sample_log_likelihood(const LikelihoodModel& model,
                                      const Eigen::Ref<const Eigen::MatrixXd>& observations,
                                      const ThetaGrid& grid) {
    if (observations.rows() < 1) {
        throw InputError("sample_log_likelihood: need at least one observation");
    }
    validate_sample_set(observations);

    const Eigen::MatrixXd lik =
        predict_likelihood_grid(model, observations, grid.points, 0, 0);
    const Eigen::Index m = lik.rows();
    const Eigen::Index g_count = lik.cols();

    Eigen::VectorXd log_post = Eigen::VectorXd::Zero(g_count);
    Eigen::Index floored = 0;
    for (Eigen::Index g = 0; g < g_count; ++g) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            double v = lik(k, g);
            if (!(v > kLikelihoodFloor)) {
                v = kLikelihoodFloor;
                ++floored;
            }
            acc += std::log(v);
        }
        log_post(g) = acc;
    }

    PosteriorResult result;
    result.flat_warning = (floored == m * g_count);
    const double shift = log_post.maxCoeff();
    Eigen::VectorXd w = (log_post.array() - shift).exp();
    const double z = w.sum() * grid.cell_volume;
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw NumericalError("sample_log_likelihood: degenerate posterior normalization");
    }
    result.density = w / z;
    return result;
}

double average_likelihood(const LikelihoodModel& model, const JointSample& test,
                          const ThetaGrid& grid) {
    test.validate();
    const int i = model.i_selected;
    const int j = model.j_selected;
    const Eigen::MatrixXd psi = model.basis_x.evaluate_batch(test.x);
    const Eigen::MatrixXd phi_test = model.basis_theta.evaluate_batch(test.theta);
    const Eigen::MatrixXd phi_grid = model.basis_theta.evaluate_batch(grid.points);

    const Eigen::MatrixXd a = psi.leftCols(j) * model.coeffs.topLeftCorner(j, i); // n x i
    Eigen::VectorXd num = (a.array() * phi_test.leftCols(i).array()).rowwise().sum();
    Eigen::MatrixXd on_grid = a * phi_grid.leftCols(i).transpose();
    if (model.clip_negative) {
        num = num.cwiseMax(0.0);
        on_grid = on_grid.cwiseMax(0.0);
    }

    const double box_volume = grid.box.volume();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < num.size(); ++k) {
        const double denom = on_grid.row(k).sum() * grid.cell_volume;
        if (!(denom > 0.0) || !std::isfinite(denom)) {
            throw NumericalError("average_likelihood: degenerate normalization at a test point");
        }
        acc += num(k) * box_volume / denom;
    }
    return acc / static_cast<double>(num.size());
}

double average_likelihood(
    const std::function<double(const Eigen::RowVectorXd&, const Eigen::RowVectorXd&)>& predictor,
    const JointSample& test, const ThetaGrid& grid) {
    test.validate();
    const double box_volume = grid.box.volume();
    double acc = 0.0;
    for (int k = 0; k < test.n(); ++k) {
        const double num = predictor(test.x.row(k), test.theta.row(k));
        double denom = 0.0;
        for (Eigen::Index g = 0; g < grid.points.rows(); ++g) {
            denom += predictor(test.x.row(k), grid.points.row(g));
        }
        denom *= grid.cell_volume;
        if (!(denom > 0.0) || !std::isfinite(denom)) {
            throw NumericalError("average_likelihood: degenerate normalization at a test point");
        }
        acc += num * box_volume / denom;
    }
    return acc / static_cast<double>(test.n());
}

double average_distance_to_truth(
    const std::function<double(const Eigen::RowVectorXd&, const Eigen::RowVectorXd&)>& predictor,
    const JointSample& test, const ThetaGrid& grid) {
    test.validate();
    double acc = 0.0;
    for (int k = 0; k < test.n(); ++k) {
        const Eigen::RowVectorXd u_star = grid.box.standardize(test.theta.row(k));
        double rowsum = 0.0;
        double weighted = 0.0;
        for (Eigen::Index g = 0; g < grid.points.rows(); ++g) {
            const double w = predictor(test.x.row(k), grid.points.row(g));
            rowsum += w;
            weighted += w * (grid.box.standardize(grid.points.row(g)) - u_star).norm();
        }
        if (!(rowsum > 0.0) || !std::isfinite(rowsum)) {
            throw NumericalError(
                "average_distance_to_truth: degenerate normalization at a test point");
        }
        acc += weighted / rowsum;
    }
    return acc / static_cast<double>(test.n());
}

double posterior_distance_to_truth(const LikelihoodModel& model,
                                   const Eigen::Ref<const Eigen::MatrixXd>& observations,
                                   const Eigen::Ref<const Eigen::RowVectorXd>& theta_star,
                                   const ThetaGrid& grid) {
    const PosteriorResult post = sample_log_likelihood(model, observations, grid);
    const Eigen::RowVectorXd u_star = grid.box.standardize(theta_star);
    double acc = 0.0;
    for (Eigen::Index g = 0; g < grid.points.rows(); ++g) {
        const double d = (grid.box.standardize(grid.points.row(g)) - u_star).norm();
        acc += d * post.density(g) * grid.cell_volume;
    }
    return acc;
}

double average_distance_to_truth(const LikelihoodModel& model, const JointSample& test,
                                 const ThetaGrid& grid) {
    test.validate();
    double acc = 0.0;
    for (int k = 0; k < test.n(); ++k) {
        acc += posterior_distance_to_truth(model, test.x.row(k), test.theta.row(k), grid);
    }
    return acc / static_cast<double>(test.n());
}

} // namespace specseries

#include "specseries/ratio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace specseries {

namespace {

int resolve_truncation(const RatioModel& model, int j) {
    if (j == 0) {
        j = model.j_selected;
    }
    if (j < 1 || j > model.basis.j_kept()) {
        throw InputError("ratio truncation J out of range: " + std::to_string(j));
    }
    return j;
}

// Running partial sums over components; at each J <= j_limit the clipped
// value (squared when requested) is added to acc[J-1]. Keeping the loop
// order identical between the scan and the direct loss makes them agree
// bit-for-bit.
void accumulate_partial_sums(const Eigen::MatrixXd& psi, const Eigen::VectorXd& coeffs,
                             int j_limit, bool clip, bool square, Eigen::VectorXd& acc) {
    for (Eigen::Index k = 0; k < psi.rows(); ++k) {
        double s = 0.0;
        for (int j = 0; j < j_limit; ++j) {
            s += coeffs(j) * psi(k, j);
            double v = clip ? std::max(s, 0.0) : s;
            acc(j) += square ? v * v : v;
        }
    }
}

std::vector<RatioLossEntry> scan_losses(const RatioModel& model,
                                        const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                                        const Eigen::Ref<const Eigen::MatrixXd>& val_f,
                                        int j_limit) {
    validate_sample_set(val_g);
    validate_sample_set(val_f);
    const Eigen::MatrixXd psi_g = model.basis.evaluate_batch(val_g);
    const Eigen::MatrixXd psi_f = model.basis.evaluate_batch(val_f);

    Eigen::VectorXd acc_g = Eigen::VectorXd::Zero(j_limit);
    Eigen::VectorXd acc_f = Eigen::VectorXd::Zero(j_limit);
    accumulate_partial_sums(psi_g, model.coeffs, j_limit, model.clip_negative, true, acc_g);
    accumulate_partial_sums(psi_f, model.coeffs, j_limit, model.clip_negative, false, acc_f);

    const double ng = static_cast<double>(val_g.rows());
    const double nf = static_cast<double>(val_f.rows());
    std::vector<RatioLossEntry> out(static_cast<std::size_t>(j_limit));
    for (int j = 0; j < j_limit; ++j) {
        out[static_cast<std::size_t>(j)] = {model.basis.kernel().bandwidth_eps, j + 1,
                                            acc_g(j) / ng - 2.0 * (acc_f(j) / nf)};
    }
    return out;
}

} // namespace

Eigen::VectorXd fit_ratio_coeffs(const SpectralBasis& basis,
                                 const Eigen::Ref<const Eigen::MatrixXd>& samples_f) {
    if (samples_f.rows() < 1) {
        throw InputError("fit_ratio_coeffs: empty F sample");
    }
    validate_sample_set(samples_f);
    return basis.evaluate_batch(samples_f).colwise().mean();
}

RatioModel fit_ratio_model(const Eigen::Ref<const Eigen::MatrixXd>& train_g,
                           const Eigen::Ref<const Eigen::MatrixXd>& train_f,
                           const KernelSpec& kernel, int j_max) {
    RatioModel model;
    model.basis = fit_basis(train_g, kernel, j_max);
    model.coeffs = fit_ratio_coeffs(model.basis, train_f);
    model.j_selected = model.basis.j_kept();
    return model;
}

double predict_ratio(const RatioModel& model,
                     const Eigen::Ref<const Eigen::RowVectorXd>& x, int j) {
    const int j_use = resolve_truncation(model, j);
    const Eigen::VectorXd psi = model.basis.evaluate(x);
    double s = 0.0;
    for (int c = 0; c < j_use; ++c) {
        s += model.coeffs(c) * psi(c);
    }
    return model.clip_negative ? std::max(s, 0.0) : s;
}

Eigen::VectorXd predict_ratio_batch(const RatioModel& model,
                                    const Eigen::Ref<const Eigen::MatrixXd>& xs, int j) {
    const int j_use = resolve_truncation(model, j);
    const Eigen::MatrixXd psi = model.basis.evaluate_batch(xs);
    Eigen::VectorXd out(xs.rows());
    for (Eigen::Index k = 0; k < xs.rows(); ++k) {
        double s = 0.0;
        for (int c = 0; c < j_use; ++c) {
            s += model.coeffs(c) * psi(k, c);
        }
        out(k) = model.clip_negative ? std::max(s, 0.0) : s;
    }
    return out;
}

double estimate_ratio_loss(const std::function<double(const Eigen::RowVectorXd&)>& predictor,
                           const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                           const Eigen::Ref<const Eigen::MatrixXd>& val_f) {
    if (val_g.rows() < 1 || val_f.rows() < 1) {
        throw InputError("estimate_ratio_loss: empty validation set");
    }
    double acc_g = 0.0;
    for (Eigen::Index k = 0; k < val_g.rows(); ++k) {
        const double v = predictor(val_g.row(k));
        acc_g += v * v;
    }
    double acc_f = 0.0;
    for (Eigen::Index k = 0; k < val_f.rows(); ++k) {
        acc_f += predictor(val_f.row(k));
    }
    const double ng = static_cast<double>(val_g.rows());
    const double nf = static_cast<double>(val_f.rows());
    return acc_g / ng - 2.0 * (acc_f / nf);
}

double estimate_ratio_loss(const RatioModel& model,
                           const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                           const Eigen::Ref<const Eigen::MatrixXd>& val_f, int j) {
    const int j_use = resolve_truncation(model, j);
    if (val_g.rows() < 1 || val_f.rows() < 1) {
        throw InputError("estimate_ratio_loss: empty validation set");
    }
    return scan_losses(model, val_g, val_f, j_use).back().loss;
}

std::vector<RatioLossEntry> ratio_j_scan(const RatioModel& model,
                                         const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                                         const Eigen::Ref<const Eigen::MatrixXd>& val_f) {
    return scan_losses(model, val_g, val_f, model.basis.j_kept());
}

std::pair<RatioModel, RatioLossReport>
select_ratio_model(const Eigen::Ref<const Eigen::MatrixXd>& train_g,
                   const Eigen::Ref<const Eigen::MatrixXd>& train_f,
                   const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                   const Eigen::Ref<const Eigen::MatrixXd>& val_f,
                   const std::vector<double>& eps_grid, int j_max) {
    if (eps_grid.empty()) {
        throw InputError("select_ratio_model: empty bandwidth grid");
    }
    validate_sample_set(train_g);
    validate_sample_set(train_f);

    // The squared distances do not depend on eps; share them across the grid.
    const Eigen::MatrixXd sq_train = pairwise_sq_dists(train_g, train_g);

    RatioLossReport report;
    report.eps_grid = eps_grid;
    RatioModel best;
    bool have_best = false;
    std::string first_error;

    for (const double eps : eps_grid) {
        RatioModel candidate;
        std::vector<RatioLossEntry> losses;
        try {
            candidate.basis = fit_basis_from_sq_dists(
                train_g, sq_train, KernelSpec{KernelFamily::Gaussian, eps}, j_max);
            candidate.coeffs = fit_ratio_coeffs(candidate.basis, train_f);
            candidate.j_selected = candidate.basis.j_kept();
            losses = ratio_j_scan(candidate, val_g, val_f);
        } catch (const NumericalError& e) {
            if (first_error.empty()) {
                first_error = e.what();
            }
            continue;
        }
        report.entries.insert(report.entries.end(), losses.begin(), losses.end());
        for (const RatioLossEntry& entry : losses) {
            const bool better =
                !have_best || entry.loss < report.selected.loss ||
                (entry.loss == report.selected.loss &&
                 (entry.j < report.selected.j ||
                  (entry.j == report.selected.j && entry.eps < report.selected.eps)));
            if (better) {
                report.selected = entry;
                best = candidate;
                best.j_selected = entry.j;
                have_best = true;
            }
        }
    }

    if (!have_best) {
        throw NumericalError("select_ratio_model: every (eps, J) configuration failed: " +
                             first_error);
    }
    return {std::move(best), std::move(report)};
}

} // namespace specseries

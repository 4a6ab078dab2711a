#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "specseries/spectral_basis.hpp"

namespace specseries {

/**
 * Spectral series estimate of the density ratio f/g: a basis fit on the
 * g-sample, coefficients estimated as basis means over the f-sample, a
 * selected truncation, and positive-part clipping of the partial series.
 */
struct RatioModel {
    SpectralBasis basis;
    Eigen::VectorXd coeffs; // one per retained component
    int j_selected = 1;
    bool clip_negative = true;
};

struct RatioLossEntry {
    double eps = 0.0;
    int j = 0;
    double loss = 0.0;
};

struct RatioLossReport {
    std::vector<RatioLossEntry> entries; // every (eps, J) evaluated
    RatioLossEntry selected;
    std::vector<double> eps_grid;
};

/// Coefficient j is the mean of basis component j over the f-sample.
Eigen::VectorXd fit_ratio_coeffs(const SpectralBasis& basis,
                                 const Eigen::Ref<const Eigen::MatrixXd>& samples_f);

/// Basis on train_g, coefficients on train_f; j_selected starts at j_kept.
RatioModel fit_ratio_model(const Eigen::Ref<const Eigen::MatrixXd>& train_g,
                           const Eigen::Ref<const Eigen::MatrixXd>& train_f,
                           const KernelSpec& kernel, int j_max);

/// Partial series truncated at j (0 means the selected truncation), clipped at 0.
double predict_ratio(const RatioModel& model,
                     const Eigen::Ref<const Eigen::RowVectorXd>& x, int j = 0);

Eigen::VectorXd predict_ratio_batch(const RatioModel& model,
                                    const Eigen::Ref<const Eigen::MatrixXd>& xs, int j = 0);

/**
 * Held-out quadratic loss estimate of an arbitrary predictor b:
 *
 *   (1/n_G) sum_k b(xG_k)^2  -  (2/n_F) sum_k b(xF_k).
 *
 * The minimizer over constants is b = 1 with loss -1; the zero predictor
 * scores 0.
 */
double estimate_ratio_loss(const std::function<double(const Eigen::RowVectorXd&)>& predictor,
                           const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                           const Eigen::Ref<const Eigen::MatrixXd>& val_f);

/// The same loss for the model's clipped series truncated at j.
double estimate_ratio_loss(const RatioModel& model,
                           const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                           const Eigen::Ref<const Eigen::MatrixXd>& val_f, int j = 0);

/**
 * Losses for every truncation J = 1..j_kept from one basis evaluation per
 * validation point: running partial sums are clipped per J and accumulated,
 * matching per-J estimate_ratio_loss calls exactly.
 */
std::vector<RatioLossEntry> ratio_j_scan(const RatioModel& model,
                                         const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                                         const Eigen::Ref<const Eigen::MatrixXd>& val_f);

/**
 * Joint (eps, J) selection: per bandwidth, fit on the training splits and
 * scan J on the validation splits; pick the minimal estimated loss, ties
 * broken by smaller J then smaller eps. Grid order does not matter.
 */
std::pair<RatioModel, RatioLossReport>
select_ratio_model(const Eigen::Ref<const Eigen::MatrixXd>& train_g,
                   const Eigen::Ref<const Eigen::MatrixXd>& train_f,
                   const Eigen::Ref<const Eigen::MatrixXd>& val_g,
                   const Eigen::Ref<const Eigen::MatrixXd>& val_f,
                   const std::vector<double>& eps_grid, int j_max);

} // namespace specseries

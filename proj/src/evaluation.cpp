#include "specseries/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "specseries/data.hpp"

namespace specseries {

namespace {

constexpr double kLogRoot2Pi = 0.9189385332046727; // log(sqrt(2*pi))

Eigen::RowVectorXd silverman_bandwidths(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
    const double n = static_cast<double>(samples.rows());
    const double d = static_cast<double>(samples.cols());
    const double factor = std::pow(4.0 / ((d + 2.0) * n), 1.0 / (d + 4.0));
    const Eigen::RowVectorXd mean = samples.colwise().mean();
    Eigen::RowVectorXd sd =
        (samples.rowwise() - mean).array().square().colwise().mean().sqrt();
    for (Eigen::Index c = 0; c < sd.size(); ++c) {
        if (!(sd(c) > 0.0)) {
            sd(c) = 1.0; // degenerate column; keep the kernel proper
        }
    }
    return sd * factor;
}

} // namespace

KdeModel KdeModel::fit(const Eigen::Ref<const Eigen::MatrixXd>& samples, double bandwidth) {
    if (samples.rows() < 1) {
        throw InputError("kde: empty sample");
    }
    validate_sample_set(samples);
    KdeModel model;
    model.samples_ = samples;
    if (std::isnan(bandwidth)) {
        model.bandwidths_ = silverman_bandwidths(samples);
    } else {
        if (!(bandwidth > 0.0)) {
            throw InputError("kde: bandwidth must be positive");
        }
        model.bandwidths_ = Eigen::RowVectorXd::Constant(samples.cols(), bandwidth);
    }
    return model;
}

KdeModel KdeModel::fit_with_bandwidths(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                                       const Eigen::Ref<const Eigen::RowVectorXd>& bandwidths) {
    if (samples.rows() < 1) {
        throw InputError("kde: empty sample");
    }
    validate_sample_set(samples);
    if (bandwidths.size() != samples.cols() || !(bandwidths.minCoeff() > 0.0)) {
        throw InputError("kde: need one positive bandwidth per dimension");
    }
    KdeModel model;
    model.samples_ = samples;
    model.bandwidths_ = bandwidths;
    return model;
}

double KdeModel::density(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    if (x.size() != samples_.cols()) {
        throw InputError("kde: point dimension mismatch");
    }
    const Eigen::Index n = samples_.rows();
    const Eigen::Index d = samples_.cols();
    double log_norm = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) {
        log_norm -= std::log(bandwidths_(c)) + kLogRoot2Pi;
    }
    // log-sum-exp over sample kernels
    Eigen::VectorXd logs(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::RowVectorXd z =
            (x - samples_.row(k)).cwiseQuotient(bandwidths_);
        logs(k) = -0.5 * z.squaredNorm() + log_norm;
    }
    const double shift = logs.maxCoeff();
    if (!std::isfinite(shift)) {
        return 0.0;
    }
    const double sum = (logs.array() - shift).exp().sum();
    return std::exp(shift + std::log(sum / static_cast<double>(n)));
}

double kde_density(const Eigen::Ref<const Eigen::MatrixXd>& samples, double bandwidth,
                   const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    return KdeModel::fit(samples, bandwidth).density(x);
}

double KdeRatioBaseline::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                 bool* floored) const {
    const double f = f_hat.density(x);
    double g = g_hat.density(x);
    if (floored != nullptr) {
        *floored = g < g_floor;
    }
    g = std::max(g, g_floor);
    return f / g;
}

std::function<double(const Eigen::RowVectorXd&)> KdeRatioBaseline::predictor() const {
    return [this](const Eigen::RowVectorXd& x) { return predict(x); };
}

KdeRatioBaseline fit_kde_ratio_baseline(const Eigen::Ref<const Eigen::MatrixXd>& train_f,
                                        const Eigen::Ref<const Eigen::MatrixXd>& train_g,
                                        const Eigen::Ref<const Eigen::MatrixXd>& val_f,
                                        const Eigen::Ref<const Eigen::MatrixXd>& val_g) {
    validate_sample_set(train_f);
    validate_sample_set(train_g);
    if (train_f.cols() != train_g.cols()) {
        throw InputError("kde ratio baseline: dimension mismatch between samples");
    }

    KdeRatioBaseline best;
    if (train_f.cols() > 4) {
        // Cross-validating bandwidths is impractical in high dimension; use
        // the reference rule directly.
        best.f_hat = KdeModel::fit(train_f);
        best.g_hat = KdeModel::fit(train_g);
        return best;
    }

    const Eigen::RowVectorXd base_f = silverman_bandwidths(train_f);
    const Eigen::RowVectorXd base_g = silverman_bandwidths(train_g);
    static constexpr double kMultipliers[] = {0.25, 0.5, 1.0, 2.0, 4.0};

    double best_loss = std::numeric_limits<double>::infinity();
    for (const double mf : kMultipliers) {
        KdeModel f_hat = KdeModel::fit_with_bandwidths(train_f, mf * base_f);
        for (const double mg : kMultipliers) {
            KdeRatioBaseline candidate;
            candidate.f_hat = f_hat;
            candidate.g_hat = KdeModel::fit_with_bandwidths(train_g, mg * base_g);
            const double loss =
                estimate_ratio_loss(candidate.predictor(), val_g, val_f);
            if (loss < best_loss) {
                best_loss = loss;
                best = candidate;
            }
        }
    }
    return best;
}

double mise_vs_truth(const std::function<double(const Eigen::RowVectorXd&)>& predictor,
                     const std::function<double(const Eigen::RowVectorXd&)>& truth,
                     const Eigen::Ref<const Eigen::MatrixXd>& eval_sample) {
    validate_sample_set(eval_sample);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < eval_sample.rows(); ++k) {
        const double diff = predictor(eval_sample.row(k)) - truth(eval_sample.row(k));
        acc += diff * diff;
    }
    return acc / static_cast<double>(eval_sample.rows());
}

double gaussian_shift_true_ratio(double mu, double x) {
    return std::exp(mu * x - 0.5 * mu * mu);
}

Benchmark parse_benchmark(const std::string& name) {
    if (name == "ratio-mise") {
        return Benchmark::RatioMise;
    }
    if (name == "spiral-distance") {
        return Benchmark::SpiralDistance;
    }
    if (name == "edges-distance") {
        return Benchmark::EdgesDistance;
    }
    if (name == "klein-likelihood") {
        return Benchmark::KleinAvgLikelihood;
    }
    throw InputError("unknown benchmark '" + name +
                     "' (expected ratio-mise, spiral-distance, edges-distance or "
                     "klein-likelihood)");
}

std::string benchmark_name(Benchmark benchmark) {
    switch (benchmark) {
    case Benchmark::RatioMise:
        return "ratio-mise";
    case Benchmark::SpiralDistance:
        return "spiral-distance";
    case Benchmark::EdgesDistance:
        return "edges-distance";
    case Benchmark::KleinAvgLikelihood:
        return "klein-likelihood";
    }
    throw InputError("unknown benchmark");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    // splitmix64 over a mixed key
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

// Ratio benchmark: F = N(0.5, 1), G = N(0, 1) in one dimension; metric is
// the empirical MISE of the selected model against the analytic ratio.
double ratio_mise_cell(const StudyConfig& config, int n, std::uint64_t cell_seed) {
    const Eigen::MatrixXd all_g = simulate_gaussian_shift(0.0, n, 1, derive_seed(cell_seed, 1, 0));
    const Eigen::MatrixXd all_f = simulate_gaussian_shift(0.5, n, 1, derive_seed(cell_seed, 2, 0));
    const SplitIndices split_g = split_indices(n, kDefaultSplits, derive_seed(cell_seed, 3, 0));
    const SplitIndices split_f = split_indices(n, kDefaultSplits, derive_seed(cell_seed, 4, 0));

    const Eigen::MatrixXd train_g = take_rows(all_g, split_g.train);
    const Eigen::MatrixXd train_f = take_rows(all_f, split_f.train);
    const Eigen::MatrixXd val_g = take_rows(all_g, split_g.val);
    const Eigen::MatrixXd val_f = take_rows(all_f, split_f.val);

    const std::vector<double> eps_grid = default_eps_grid(train_g, derive_seed(cell_seed, 5, 0));
    auto [model, report] =
        select_ratio_model(train_g, train_f, val_g, val_f, eps_grid, config.ratio_j_max);
    (void)report;

    const Eigen::MatrixXd eval =
        simulate_gaussian_shift(0.0, 2000, 1, derive_seed(cell_seed, 6, 0));
    const Eigen::VectorXd pred = predict_ratio_batch(model, eval);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < eval.rows(); ++k) {
        const double diff = pred(k) - gaussian_shift_true_ratio(0.5, eval(k, 0));
        acc += diff * diff;
    }
    return acc / static_cast<double>(eval.rows());
}

LikelihoodModel fit_simulated_likelihood(const StudyConfig& config, const SimulatorSpec& spec,
                                         std::uint64_t cell_seed, JointSample* test_out) {
    const int n = config.n_sim;
    const JointSample joint = simulate_joint(spec, n, derive_seed(cell_seed, 10, 0));
    // Fresh prior draws with theta discarded realize the marginal g.
    const Eigen::MatrixXd all_g = simulate_joint(spec, n, derive_seed(cell_seed, 11, 0)).x;

    const SplitIndices split_j = split_indices(n, kDefaultSplits, derive_seed(cell_seed, 12, 0));
    const SplitIndices split_g = split_indices(n, kDefaultSplits, derive_seed(cell_seed, 13, 0));

    const JointSample train_joint{take_rows(joint.x, split_j.train),
                                  take_rows(joint.theta, split_j.train)};
    const JointSample val_joint{take_rows(joint.x, split_j.val),
                                take_rows(joint.theta, split_j.val)};
    if (test_out != nullptr) {
        *test_out = {take_rows(joint.x, split_j.test), take_rows(joint.theta, split_j.test)};
    }
    const Eigen::MatrixXd train_g = take_rows(all_g, split_g.train);
    const Eigen::MatrixXd val_g = take_rows(all_g, split_g.val);

    const std::vector<double> grid_x = default_eps_grid(train_g, derive_seed(cell_seed, 14, 0));
    const std::vector<double> grid_theta =
        default_eps_grid(train_joint.theta, derive_seed(cell_seed, 15, 0));

    auto [model, report] = select_likelihood_model(
        train_joint, train_g, val_joint, val_g, grid_x, grid_theta, config.lik_i_max,
        config.lik_j_max, config.b_permutations, derive_seed(cell_seed, 16, 0));
    (void)report;
    return model;
}

double distance_cell(const StudyConfig& config, const SimulatorSpec& spec,
                     const LikelihoodModel& model, const ThetaGrid& grid, int m,
                     std::uint64_t cell_seed) {
    std::mt19937_64 rng(derive_seed(cell_seed, 20, static_cast<std::uint64_t>(m)));
    double acc = 0.0;
    for (int r = 0; r < config.n_replicates; ++r) {
        const Eigen::RowVectorXd theta_star = uniform_in_box(spec.param_box, rng);
        const Eigen::MatrixXd obs =
            simulate_at(spec, theta_star, m, derive_seed(cell_seed, 21, static_cast<std::uint64_t>(m * 100003 + r)));
        acc += posterior_distance_to_truth(model, obs, theta_star, grid);
    }
    return acc / static_cast<double>(config.n_replicates);
}

} // namespace

StudyResult convergence_study(const StudyConfig& config) {
    if (config.grid.empty()) {
        throw InputError("convergence_study: empty size grid");
    }
    if (config.n_seeds < 1) {
        throw InputError("convergence_study: need at least one seed");
    }

    StudyResult result;
    const bool per_seed_model = config.benchmark == Benchmark::SpiralDistance ||
                                config.benchmark == Benchmark::EdgesDistance;

    if (per_seed_model) {
        const SimulatorSpec spec = config.benchmark == Benchmark::SpiralDistance
                                       ? SimulatorSpec::spiral()
                                       : SimulatorSpec::edges();
        const ThetaGrid grid = ThetaGrid::regular(spec.param_box, config.grid_points_per_dim);
        for (int s = 0; s < config.n_seeds; ++s) {
            const std::uint64_t seed = derive_seed(config.base_seed, 100, static_cast<std::uint64_t>(s));
            LikelihoodModel model;
            std::string fit_error;
            try {
                model = fit_simulated_likelihood(config, spec, seed, nullptr);
            } catch (const std::exception& e) {
                fit_error = e.what();
            }
            for (const int m : config.grid) {
                StudyCell cell;
                cell.size = m;
                cell.seed = seed;
                if (!fit_error.empty()) {
                    cell.error = fit_error;
                } else {
                    try {
                        cell.metric = distance_cell(config, spec, model, grid, m, seed);
                        cell.valid = true;
                    } catch (const std::exception& e) {
                        cell.error = e.what();
                    }
                }
                result.cells.push_back(std::move(cell));
            }
        }
    } else {
        for (const int size : config.grid) {
            for (int s = 0; s < config.n_seeds; ++s) {
                const std::uint64_t seed =
                    derive_seed(config.base_seed, static_cast<std::uint64_t>(size),
                                static_cast<std::uint64_t>(s));
                StudyCell cell;
                cell.size = size;
                cell.seed = seed;
                try {
                    if (config.benchmark == Benchmark::RatioMise) {
                        cell.metric = ratio_mise_cell(config, size, seed);
                    } else {
                        StudyConfig local = config;
                        local.n_sim = size;
                        const SimulatorSpec spec = SimulatorSpec::klein();
                        JointSample test;
                        const LikelihoodModel model =
                            fit_simulated_likelihood(local, spec, seed, &test);
                        const ThetaGrid grid =
                            ThetaGrid::regular(spec.param_box, config.grid_points_per_dim);
                        cell.metric = average_likelihood(model, test, grid);
                    }
                    cell.valid = true;
                } catch (const std::exception& e) {
                    cell.error = e.what();
                }
                result.cells.push_back(std::move(cell));
            }
        }
    }

    for (const int size : config.grid) {
        StudySummaryRow row;
        row.size = size;
        std::vector<double> metrics;
        for (const StudyCell& cell : result.cells) {
            if (cell.size == size && cell.valid) {
                metrics.push_back(cell.metric);
            }
        }
        row.n_valid = static_cast<int>(metrics.size());
        if (!metrics.empty()) {
            double mean = 0.0;
            for (const double v : metrics) {
                mean += v;
            }
            mean /= static_cast<double>(metrics.size());
            row.mean = mean;
            if (metrics.size() >= 2) {
                double ss = 0.0;
                for (const double v : metrics) {
                    ss += (v - mean) * (v - mean);
                }
                const double sd = std::sqrt(ss / static_cast<double>(metrics.size() - 1));
                row.se = sd / std::sqrt(static_cast<double>(metrics.size()));
            } else {
                row.se = std::numeric_limits<double>::quiet_NaN();
            }
        } else {
            row.mean = std::numeric_limits<double>::quiet_NaN();
            row.se = std::numeric_limits<double>::quiet_NaN();
        }
        result.summary.push_back(row);
    }
    return result;
}

bool monotone_non_increasing(const std::vector<StudySummaryRow>& summary) {
    for (std::size_t i = 1; i < summary.size(); ++i) {
        if (!(summary[i].mean <= summary[i - 1].mean)) {
            return false;
        }
    }
    return true;
}

} // namespace specseries

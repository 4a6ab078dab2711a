#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "specseries/csv.hpp"
#include "specseries/data.hpp"
#include "specseries/evaluation.hpp"
#include "specseries/model_io.hpp"
#include "specseries/ratio.hpp"
#include "specseries/simulators.hpp"

using json = nlohmann::json;
using namespace specseries;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

std::vector<double> parse_double_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0') {
            throw InputError(std::string("cannot parse ") + what + " value '" + cell + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw InputError(std::string(what) + " list is empty");
    }
    return out;
}

std::array<double, 3> parse_splits(const std::string& text) {
    const auto vals = parse_double_list(text, "--splits");
    if (vals.size() != 3) {
        throw InputError("--splits needs exactly three fractions");
    }
    return {vals[0], vals[1], vals[2]};
}

// Loaded --config JSON, used to fill flags the user did not pass explicitly.
struct ConfigOverlay {
    json values = json::object();

    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw InputError("cannot open config file: " + path);
        }
        try {
            in >> values;
        } catch (const json::exception& e) {
            throw InputError("config file " + path + " is not valid JSON: " +
                             std::string(e.what()));
        }
        if (!values.is_object()) {
            throw InputError("config file must hold a JSON object");
        }
    }

    template <typename T>
    void fill(const CLI::Option* opt, const std::string& key, T& target) const {
        if (opt->count() == 0 && values.contains(key)) {
            try {
                target = values.at(key).get<T>();
            } catch (const json::exception&) {
                throw InputError("config key '" + key + "' has the wrong type");
            }
        }
    }
};

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw DataError("cannot create output directory " + dir + ": " + ec.message());
    }
}

std::string config_hash_of(const json& effective) { return fnv1a_hex(effective.dump()); }

void write_config(const std::string& dir, const json& effective) {
    std::ofstream out(dir + "/config.json");
    out << effective.dump(1, '\t') << '\n';
}

SimulatorSpec spec_by_name(const std::string& name, double mu, int dim) {
    if (name == "spiral") {
        return SimulatorSpec::spiral();
    }
    if (name == "klein") {
        return SimulatorSpec::klein();
    }
    if (name == "edges") {
        return SimulatorSpec::edges();
    }
    if (name == "gaussian-shift") {
        SimulatorSpec spec = SimulatorSpec::gaussian_shift(dim);
        spec.param_box.lo.setConstant(mu);
        spec.param_box.hi.setConstant(mu);
        return spec;
    }
    throw InputError("unknown simulator model '" + name +
                     "' (expected spiral, klein, edges or gaussian-shift)");
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string model = "spiral";
    int n = 100;
    std::uint64_t seed = 0;
    std::string theta;
    double mu = 0.0;
    int dim = 1;
    std::string out = "sample.csv";
    std::string config;
};

int run_generate(const GenerateArgs& args) {
    if (args.n < 1) {
        throw InputError("--n must be positive");
    }
    Eigen::MatrixXd theta_block;
    Eigen::MatrixXd x_block;

    if (args.model == "gaussian-shift") {
        x_block = simulate_gaussian_shift(args.mu, args.n, args.dim, args.seed);
        theta_block.resize(args.n, 0);
    } else {
        const SimulatorSpec spec = spec_by_name(args.model, 0.0, 1);
        if (!args.theta.empty()) {
            const auto vals = parse_double_list(args.theta, "--theta");
            if (static_cast<int>(vals.size()) != spec.param_dim()) {
                throw InputError("--theta needs " + std::to_string(spec.param_dim()) +
                                 " value(s) for model " + args.model);
            }
            Eigen::RowVectorXd theta(spec.param_dim());
            for (int c = 0; c < spec.param_dim(); ++c) {
                theta(c) = vals[static_cast<std::size_t>(c)];
            }
            x_block = simulate_at(spec, theta, args.n, args.seed);
            theta_block = theta.replicate(args.n, 1);
        } else {
            const JointSample joint = simulate_joint(spec, args.n, args.seed);
            theta_block = joint.theta;
            x_block = joint.x;
        }
    }

    Eigen::MatrixXd table(args.n, theta_block.cols() + x_block.cols());
    table << theta_block, x_block;
    write_csv(args.out, sample_columns(static_cast<int>(theta_block.cols()),
                                       static_cast<int>(x_block.cols())),
              table);
    std::cout << "wrote " << args.n << " rows, " << table.cols() << " columns to "
              << args.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- fit-ratio

struct FitRatioArgs {
    std::string data_f;
    std::string data_g;
    bool sim_gaussian_shift = false;
    double mu = 0.5;
    int n = 2000;
    std::uint64_t seed = 0;
    std::string eps_grid;
    int j_max = 30;
    std::string splits = "0.6,0.2,0.2";
    bool standardize = false;
    std::string out_dir = "out";
    std::string config;
};

json fit_ratio_config(const FitRatioArgs& args) {
    return {{"data_f", args.data_f},   {"data_g", args.data_g},
            {"sim_gaussian_shift", args.sim_gaussian_shift},
            {"mu", args.mu},           {"n", args.n},
            {"seed", args.seed},       {"eps_grid", args.eps_grid},
            {"j_max", args.j_max},     {"splits", args.splits},
            {"standardize", args.standardize}};
}

int run_fit_ratio(const FitRatioArgs& args) {
    Eigen::MatrixXd all_f, all_g;
    if (args.sim_gaussian_shift) {
        all_f = simulate_gaussian_shift(args.mu, args.n, 1, derive_seed(args.seed, 1, 0));
        all_g = simulate_gaussian_shift(0.0, args.n, 1, derive_seed(args.seed, 2, 0));
    } else {
        if (args.data_f.empty() || args.data_g.empty()) {
            throw InputError("fit-ratio needs --data-f and --data-g (or --sim-gaussian-shift)");
        }
        all_f = x_columns(read_csv(args.data_f));
        all_g = x_columns(read_csv(args.data_g));
        if (all_f.cols() != all_g.cols()) {
            throw DataError("F and G data have different dimensions");
        }
    }

    const auto fracs = parse_splits(args.splits);
    const SplitIndices sf = split_indices(static_cast<int>(all_f.rows()), fracs,
                                          derive_seed(args.seed, 3, 0));
    const SplitIndices sg = split_indices(static_cast<int>(all_g.rows()), fracs,
                                          derive_seed(args.seed, 4, 0));
    if (sf.train.empty() || sg.train.empty() || sf.val.empty() || sg.val.empty() ||
        sf.test.empty() || sg.test.empty()) {
        throw DataError("a data split is empty; need more rows or different fractions");
    }

    ColumnTransform transform;
    if (args.standardize) {
        transform = ColumnTransform::fit(take_rows(all_g, sg.train));
        all_f = transform.apply(all_f);
        all_g = transform.apply(all_g);
    }

    const Eigen::MatrixXd train_g = take_rows(all_g, sg.train);
    const Eigen::MatrixXd train_f = take_rows(all_f, sf.train);
    const Eigen::MatrixXd val_g = take_rows(all_g, sg.val);
    const Eigen::MatrixXd val_f = take_rows(all_f, sf.val);
    const Eigen::MatrixXd test_g = take_rows(all_g, sg.test);
    const Eigen::MatrixXd test_f = take_rows(all_f, sf.test);

    const std::vector<double> grid = args.eps_grid.empty()
                                         ? default_eps_grid(train_g, derive_seed(args.seed, 5, 0))
                                         : parse_double_list(args.eps_grid, "--eps-grid");

    auto [model, report] = select_ratio_model(train_g, train_f, val_g, val_f, grid, args.j_max);
    const double test_loss = estimate_ratio_loss(model, test_g, test_f);

    ensure_out_dir(args.out_dir);
    const json effective = fit_ratio_config(args);
    write_config(args.out_dir, effective);

    RatioModelFile file;
    file.model = std::move(model);
    file.x_transform = transform;
    file.provenance.config_hash = config_hash_of(effective);
    file.provenance.seed = args.seed;
    save_ratio_model(args.out_dir + "/ratio_model.json", file);

    Eigen::MatrixXd losses(static_cast<Eigen::Index>(report.entries.size()), 3);
    for (std::size_t r = 0; r < report.entries.size(); ++r) {
        losses.row(static_cast<Eigen::Index>(r)) << report.entries[r].eps,
            static_cast<double>(report.entries[r].j), report.entries[r].loss;
    }
    write_csv(args.out_dir + "/loss_report.csv", {"eps", "j", "loss"}, losses);

    json summary{{"selected",
                  {{"eps", report.selected.eps},
                   {"j", report.selected.j},
                   {"val_loss", report.selected.loss}}},
                 {"test_loss", test_loss},
                 {"config_hash", file.provenance.config_hash},
                 {"n_train_f", train_f.rows()},
                 {"n_train_g", train_g.rows()}};
    std::ofstream(args.out_dir + "/summary.json") << summary.dump(1, '\t') << '\n';

    std::cout << "selected eps=" << format_double(report.selected.eps)
              << " J=" << report.selected.j
              << " val_loss=" << format_double(report.selected.loss)
              << "\ntest_loss=" << format_double(test_loss) << "\nmodel: " << args.out_dir
              << "/ratio_model.json\n";
    return kExitOk;
}

// ----------------------------------------------------------- fit-likelihood

struct FitLikelihoodArgs {
    std::string data_joint;
    std::string data_g;
    std::string sim;
    int n = 2000;
    std::uint64_t seed = 0;
    std::string eps_grid_x;
    std::string eps_grid_theta;
    int i_max = 20;
    int j_max = 20;
    int b = kDefaultPermutations;
    std::string splits = "0.6,0.2,0.2";
    bool standardize = false;
    std::string out_dir = "out";
    std::string config;
};

json fit_likelihood_config(const FitLikelihoodArgs& args) {
    return {{"data_joint", args.data_joint},
            {"data_g", args.data_g},
            {"sim", args.sim},
            {"n", args.n},
            {"seed", args.seed},
            {"eps_grid_x", args.eps_grid_x},
            {"eps_grid_theta", args.eps_grid_theta},
            {"i_max", args.i_max},
            {"j_max", args.j_max},
            {"b_permutations", args.b},
            {"splits", args.splits},
            {"standardize", args.standardize}};
}

int run_fit_likelihood(const FitLikelihoodArgs& args) {
    JointSample joint;
    Eigen::MatrixXd all_g;
    ParamBox box;
    if (!args.sim.empty()) {
        const SimulatorSpec spec = spec_by_name(args.sim, 0.0, 1);
        if (spec.model == SimModel::GaussianShift) {
            throw InputError("fit-likelihood supports spiral, klein and edges simulators");
        }
        joint = simulate_joint(spec, args.n, derive_seed(args.seed, 1, 0));
        all_g = simulate_joint(spec, args.n, derive_seed(args.seed, 2, 0)).x;
        box = spec.param_box;
    } else {
        if (args.data_joint.empty() || args.data_g.empty()) {
            throw InputError("fit-likelihood needs --data-joint and --data-g (or --sim)");
        }
        joint = joint_from_table(read_csv(args.data_joint));
        all_g = x_columns(read_csv(args.data_g));
        if (joint.x.cols() != all_g.cols()) {
            throw DataError("joint and G data have different x dimensions");
        }
        // prior box inferred from the observed labels
        box.lo = joint.theta.colwise().minCoeff();
        box.hi = joint.theta.colwise().maxCoeff();
        box.validate();
    }

    const auto fracs = parse_splits(args.splits);
    const SplitIndices sj =
        split_indices(joint.n(), fracs, derive_seed(args.seed, 3, 0));
    const SplitIndices sg = split_indices(static_cast<int>(all_g.rows()), fracs,
                                          derive_seed(args.seed, 4, 0));
    if (sj.train.empty() || sg.train.empty() || sj.val.empty() || sg.val.empty()) {
        throw DataError("a data split is empty; need more rows or different fractions");
    }

    ColumnTransform transform;
    if (args.standardize) {
        transform = ColumnTransform::fit(take_rows(all_g, sg.train));
        all_g = transform.apply(all_g);
        joint.x = transform.apply(joint.x);
    }

    JointSample train_joint{take_rows(joint.x, sj.train), take_rows(joint.theta, sj.train)};
    JointSample val_joint{take_rows(joint.x, sj.val), take_rows(joint.theta, sj.val)};
    JointSample test_joint{take_rows(joint.x, sj.test), take_rows(joint.theta, sj.test)};
    const Eigen::MatrixXd train_g = take_rows(all_g, sg.train);
    Eigen::MatrixXd val_g = take_rows(all_g, sg.val);
    Eigen::MatrixXd test_g = take_rows(all_g, sg.test);

    // the permutation loss pairs by index, so the validation sides must agree
    const int n_val = std::min(val_joint.n(), static_cast<int>(val_g.rows()));
    if (n_val < val_joint.n() || n_val < val_g.rows()) {
        std::cout << "note: truncating validation sets to the common size " << n_val << "\n";
    }
    val_joint.x.conservativeResize(n_val, Eigen::NoChange);
    val_joint.theta.conservativeResize(n_val, Eigen::NoChange);
    val_g.conservativeResize(n_val, Eigen::NoChange);

    const std::vector<double> grid_x =
        args.eps_grid_x.empty() ? default_eps_grid(train_g, derive_seed(args.seed, 5, 0))
                                : parse_double_list(args.eps_grid_x, "--eps-grid-x");
    const std::vector<double> grid_theta =
        args.eps_grid_theta.empty()
            ? default_eps_grid(train_joint.theta, derive_seed(args.seed, 6, 0))
            : parse_double_list(args.eps_grid_theta, "--eps-grid-theta");

    auto [model, report] =
        select_likelihood_model(train_joint, train_g, val_joint, val_g, grid_x, grid_theta,
                                args.i_max, args.j_max, args.b, derive_seed(args.seed, 7, 0));

    double test_loss = std::numeric_limits<double>::quiet_NaN();
    const int n_test = std::min(test_joint.n(), static_cast<int>(test_g.rows()));
    if (n_test >= 2) {
        test_joint.x.conservativeResize(n_test, Eigen::NoChange);
        test_joint.theta.conservativeResize(n_test, Eigen::NoChange);
        test_g.conservativeResize(n_test, Eigen::NoChange);
        test_loss = estimate_likelihood_loss(model, test_g, test_joint, args.b, 0, 0,
                                             derive_seed(args.seed, 8, 0));
    }

    ensure_out_dir(args.out_dir);
    const json effective = fit_likelihood_config(args);
    write_config(args.out_dir, effective);

    LikelihoodModelFile file;
    file.model = std::move(model);
    file.x_transform = transform;
    file.param_box = box;
    file.provenance.config_hash = config_hash_of(effective);
    file.provenance.seed = args.seed;
    save_likelihood_model(args.out_dir + "/likelihood_model.json", file);

    Eigen::MatrixXd losses(static_cast<Eigen::Index>(report.entries.size()), 5);
    for (std::size_t r = 0; r < report.entries.size(); ++r) {
        losses.row(static_cast<Eigen::Index>(r))
            << report.entries[r].eps_x, report.entries[r].eps_theta,
            static_cast<double>(report.entries[r].i), static_cast<double>(report.entries[r].j),
            report.entries[r].loss;
    }
    write_csv(args.out_dir + "/loss_report.csv", {"eps_x", "eps_theta", "i", "j", "loss"},
              losses);

    json summary{{"selected",
                  {{"eps_x", report.selected.eps_x},
                   {"eps_theta", report.selected.eps_theta},
                   {"i", report.selected.i},
                   {"j", report.selected.j},
                   {"val_loss", report.selected.loss}}},
                 {"test_loss", test_loss},
                 {"config_hash", file.provenance.config_hash}};
    std::ofstream(args.out_dir + "/summary.json") << summary.dump(1, '\t') << '\n';

    std::cout << "selected eps_x=" << format_double(report.selected.eps_x)
              << " eps_theta=" << format_double(report.selected.eps_theta)
              << " I=" << report.selected.i << " J=" << report.selected.j
              << " val_loss=" << format_double(report.selected.loss)
              << "\ntest_loss=" << format_double(test_loss) << "\nmodel: " << args.out_dir
              << "/likelihood_model.json\n";
    return kExitOk;
}

// ----------------------------------------------------------------- posterior

struct PosteriorArgs {
    std::string model;
    std::string observations;
    int grid_points = 50;
    std::string out = "posterior.csv";
    std::string config;
};

int run_posterior(const PosteriorArgs& args) {
    if (peek_model_kind(args.model) != ModelKind::Likelihood) {
        throw DataError("posterior needs a likelihood model file");
    }
    const LikelihoodModelFile file = load_likelihood_model(args.model);
    Eigen::MatrixXd obs = x_columns(read_csv(args.observations));
    if (obs.cols() != file.model.basis_x.dim()) {
        throw DataError("observations have dimension " + std::to_string(obs.cols()) +
                        " but the model expects " +
                        std::to_string(file.model.basis_x.dim()));
    }
    obs = file.x_transform.apply(obs);

    const ThetaGrid grid = ThetaGrid::regular(file.param_box, args.grid_points);
    const PosteriorResult post = sample_log_likelihood(file.model, obs, grid);
    if (post.flat_warning) {
        std::cout << "warning: likelihood was at the floor everywhere; posterior is flat "
                     "(uninformative)\n";
    }

    const int p = file.param_box.dim();
    Eigen::MatrixXd table(grid.points.rows(), p + 1);
    table.leftCols(p) = grid.points;
    table.col(p) = post.density;
    std::vector<std::string> cols;
    for (int c = 0; c < p; ++c) {
        cols.push_back("theta_" + std::to_string(c));
    }
    cols.emplace_back("density");
    write_csv(args.out, cols, table);

    std::cout << "posterior over " << grid.points.rows() << " grid points, normalization "
              << format_double(post.density.sum() * grid.cell_volume) << ", written to "
              << args.out << "\n";
    return kExitOk;
}

// --------------------------------------------------------------------- study

struct StudyArgs {
    std::string benchmark = "ratio-mise";
    std::string grid = "250,1000,4000";
    int seeds = 10;
    std::uint64_t seed = 0;
    int n_sim = 2000;
    int replicates = 40;
    int grid_points = 50;
    bool assert_monotone = false;
    std::string out_dir = "out";
    std::string config;
};

int run_study(const StudyArgs& args) {
    StudyConfig config;
    config.benchmark = parse_benchmark(args.benchmark);
    for (const double v : parse_double_list(args.grid, "--grid")) {
        config.grid.push_back(static_cast<int>(v));
    }
    config.n_seeds = args.seeds;
    config.base_seed = args.seed;
    config.n_sim = args.n_sim;
    config.n_replicates = args.replicates;
    config.grid_points_per_dim = args.grid_points;

    const StudyResult result = convergence_study(config);

    ensure_out_dir(args.out_dir);
    Eigen::MatrixXd cells(static_cast<Eigen::Index>(result.cells.size()), 4);
    for (std::size_t r = 0; r < result.cells.size(); ++r) {
        const StudyCell& cell = result.cells[r];
        if (!cell.valid) {
            std::cerr << "cell size=" << cell.size << " seed=" << cell.seed
                      << " failed: " << cell.error << "\n";
        }
        cells.row(static_cast<Eigen::Index>(r))
            << static_cast<double>(cell.size), static_cast<double>(cell.seed), cell.metric,
            cell.valid ? 1.0 : 0.0;
    }
    write_csv(args.out_dir + "/study.csv", {"size", "seed", "metric", "valid"}, cells);

    Eigen::MatrixXd summary(static_cast<Eigen::Index>(result.summary.size()), 3);
    for (std::size_t r = 0; r < result.summary.size(); ++r) {
        summary.row(static_cast<Eigen::Index>(r)) << static_cast<double>(result.summary[r].size),
            result.summary[r].mean, result.summary[r].se;
    }
    write_csv(args.out_dir + "/summary.csv", {"size", "mean", "se"}, summary);

    for (const StudySummaryRow& row : result.summary) {
        std::cout << "size=" << row.size << " mean=" << format_double(row.mean)
                  << " se=" << format_double(row.se) << " (" << row.n_valid << " seeds)\n";
    }
    if (args.assert_monotone && !monotone_non_increasing(result.summary)) {
        std::cerr << "assert-monotone failed: metric means are not non-increasing\n";
        return kExitNumerical;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral series density-ratio and likelihood estimation"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "Write simulator draws to CSV");
    auto* gen_model = generate->add_option("--model", gen.model,
                                           "spiral | klein | edges | gaussian-shift");
    auto* gen_n = generate->add_option("--n", gen.n, "number of draws");
    auto* gen_seed = generate->add_option("--seed", gen.seed, "RNG seed");
    auto* gen_theta =
        generate->add_option("--theta", gen.theta, "fixed theta (comma-separated)");
    auto* gen_mu = generate->add_option("--mu", gen.mu, "gaussian-shift mean");
    auto* gen_dim = generate->add_option("--dim", gen.dim, "gaussian-shift dimension");
    auto* gen_out = generate->add_option("--out", gen.out, "output CSV path");
    generate->add_option("--config", gen.config, "JSON config file");

    FitRatioArgs fr;
    CLI::App* fit_ratio = app.add_subcommand("fit-ratio", "Fit a density-ratio model");
    auto* fr_f = fit_ratio->add_option("--data-f", fr.data_f, "CSV sample from F");
    auto* fr_g = fit_ratio->add_option("--data-g", fr.data_g, "CSV sample from G");
    auto* fr_sim = fit_ratio->add_flag("--sim-gaussian-shift", fr.sim_gaussian_shift,
                                       "use the 1-d Gaussian shift fixture");
    auto* fr_mu = fit_ratio->add_option("--mu", fr.mu, "fixture shift");
    auto* fr_n = fit_ratio->add_option("--n", fr.n, "fixture sample size");
    auto* fr_seed = fit_ratio->add_option("--seed", fr.seed, "RNG seed");
    auto* fr_eps = fit_ratio->add_option("--eps-grid", fr.eps_grid,
                                         "comma-separated bandwidths (default: quantile rule)");
    auto* fr_jmax = fit_ratio->add_option("--j-max", fr.j_max, "largest truncation");
    auto* fr_splits = fit_ratio->add_option("--splits", fr.splits, "train,val,test fractions");
    auto* fr_std =
        fit_ratio->add_flag("--standardize", fr.standardize, "z-score inputs on train-G stats");
    auto* fr_out = fit_ratio->add_option("--out-dir", fr.out_dir, "output directory");
    fit_ratio->add_option("--config", fr.config, "JSON config file");

    FitLikelihoodArgs fl;
    CLI::App* fit_lik = app.add_subcommand("fit-likelihood", "Fit a likelihood model");
    auto* fl_joint = fit_lik->add_option("--data-joint", fl.data_joint,
                                         "CSV with theta_* and x_* columns");
    auto* fl_g = fit_lik->add_option("--data-g", fl.data_g, "CSV sample from G");
    auto* fl_sim = fit_lik->add_option("--sim", fl.sim, "spiral | klein | edges");
    auto* fl_n = fit_lik->add_option("--n", fl.n, "simulation sample size");
    auto* fl_seed = fit_lik->add_option("--seed", fl.seed, "RNG seed");
    auto* fl_epsx = fit_lik->add_option("--eps-grid-x", fl.eps_grid_x, "x bandwidth grid");
    auto* fl_epst =
        fit_lik->add_option("--eps-grid-theta", fl.eps_grid_theta, "theta bandwidth grid");
    auto* fl_imax = fit_lik->add_option("--i-max", fl.i_max, "largest theta truncation");
    auto* fl_jmax = fit_lik->add_option("--j-max", fl.j_max, "largest x truncation");
    auto* fl_b = fit_lik->add_option("--b-permutations", fl.b, "loss permutations");
    auto* fl_splits = fit_lik->add_option("--splits", fl.splits, "train,val,test fractions");
    auto* fl_std =
        fit_lik->add_flag("--standardize", fl.standardize, "z-score x on train-G stats");
    auto* fl_out = fit_lik->add_option("--out-dir", fl.out_dir, "output directory");
    fit_lik->add_option("--config", fl.config, "JSON config file");

    PosteriorArgs po;
    CLI::App* posterior = app.add_subcommand("posterior", "Posterior over the parameter grid");
    posterior->add_option("--model", po.model, "likelihood model file")->required();
    posterior->add_option("--observations", po.observations, "CSV of observed x rows")
        ->required();
    auto* po_grid = posterior->add_option("--grid-points", po.grid_points,
                                          "grid points per parameter dimension");
    auto* po_out = posterior->add_option("--out", po.out, "output CSV path");
    posterior->add_option("--config", po.config, "JSON config file");

    StudyArgs st;
    CLI::App* study = app.add_subcommand("study", "Seeded convergence study");
    auto* st_bench = study->add_option(
        "--benchmark", st.benchmark,
        "ratio-mise | spiral-distance | edges-distance | klein-likelihood");
    auto* st_grid = study->add_option("--grid", st.grid, "comma-separated sizes");
    auto* st_seeds = study->add_option("--seeds", st.seeds, "number of seeds");
    auto* st_seed = study->add_option("--seed", st.seed, "base seed");
    auto* st_nsim = study->add_option("--n-sim", st.n_sim, "simulation budget");
    auto* st_rep = study->add_option("--replicates", st.replicates, "posterior replicates");
    auto* st_gp = study->add_option("--grid-points", st.grid_points, "theta grid per dim");
    auto* st_mono = study->add_flag("--assert-monotone", st.assert_monotone,
                                    "fail unless means are non-increasing");
    auto* st_out = study->add_option("--out-dir", st.out_dir, "output directory");
    study->add_option("--config", st.config, "JSON config file");

    try {
        app.parse(argc, argv);

        if (generate->parsed()) {
            if (!gen.config.empty()) {
                ConfigOverlay overlay;
                overlay.load(gen.config);
                overlay.fill(gen_model, "model", gen.model);
                overlay.fill(gen_n, "n", gen.n);
                overlay.fill(gen_seed, "seed", gen.seed);
                overlay.fill(gen_theta, "theta", gen.theta);
                overlay.fill(gen_mu, "mu", gen.mu);
                overlay.fill(gen_dim, "dim", gen.dim);
                overlay.fill(gen_out, "out", gen.out);
            }
            return run_generate(gen);
        }
        if (fit_ratio->parsed()) {
            if (!fr.config.empty()) {
                ConfigOverlay overlay;
                overlay.load(fr.config);
                overlay.fill(fr_f, "data_f", fr.data_f);
                overlay.fill(fr_g, "data_g", fr.data_g);
                overlay.fill(fr_sim, "sim_gaussian_shift", fr.sim_gaussian_shift);
                overlay.fill(fr_mu, "mu", fr.mu);
                overlay.fill(fr_n, "n", fr.n);
                overlay.fill(fr_seed, "seed", fr.seed);
                overlay.fill(fr_eps, "eps_grid", fr.eps_grid);
                overlay.fill(fr_jmax, "j_max", fr.j_max);
                overlay.fill(fr_splits, "splits", fr.splits);
                overlay.fill(fr_std, "standardize", fr.standardize);
                overlay.fill(fr_out, "out_dir", fr.out_dir);
            }
            return run_fit_ratio(fr);
        }
        if (fit_lik->parsed()) {
            if (!fl.config.empty()) {
                ConfigOverlay overlay;
                overlay.load(fl.config);
                overlay.fill(fl_joint, "data_joint", fl.data_joint);
                overlay.fill(fl_g, "data_g", fl.data_g);
                overlay.fill(fl_sim, "sim", fl.sim);
                overlay.fill(fl_n, "n", fl.n);
                overlay.fill(fl_seed, "seed", fl.seed);
                overlay.fill(fl_epsx, "eps_grid_x", fl.eps_grid_x);
                overlay.fill(fl_epst, "eps_grid_theta", fl.eps_grid_theta);
                overlay.fill(fl_imax, "i_max", fl.i_max);
                overlay.fill(fl_jmax, "j_max", fl.j_max);
                overlay.fill(fl_b, "b_permutations", fl.b);
                overlay.fill(fl_splits, "splits", fl.splits);
                overlay.fill(fl_std, "standardize", fl.standardize);
                overlay.fill(fl_out, "out_dir", fl.out_dir);
            }
            return run_fit_likelihood(fl);
        }
        if (posterior->parsed()) {
            if (!po.config.empty()) {
                ConfigOverlay overlay;
                overlay.load(po.config);
                overlay.fill(po_grid, "grid_points", po.grid_points);
                overlay.fill(po_out, "out", po.out);
            }
            return run_posterior(po);
        }
        if (study->parsed()) {
            if (!st.config.empty()) {
                ConfigOverlay overlay;
                overlay.load(st.config);
                overlay.fill(st_bench, "benchmark", st.benchmark);
                overlay.fill(st_grid, "grid", st.grid);
                overlay.fill(st_seeds, "seeds", st.seeds);
                overlay.fill(st_seed, "seed", st.seed);
                overlay.fill(st_nsim, "n_sim", st.n_sim);
                overlay.fill(st_rep, "replicates", st.replicates);
                overlay.fill(st_gp, "grid_points", st.grid_points);
                overlay.fill(st_mono, "assert_monotone", st.assert_monotone);
                overlay.fill(st_out, "out_dir", st.out_dir);
            }
            return run_study(st);
        }
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

#include "specseries/simulators.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace specseries {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ParamBox box1(double lo, double hi) {
    ParamBox box;
    box.lo = Eigen::VectorXd::Constant(1, lo);
    box.hi = Eigen::VectorXd::Constant(1, hi);
    return box;
}

ParamBox box2(double lo0, double hi0, double lo1, double hi1) {
    ParamBox box;
    box.lo = (Eigen::VectorXd(2) << lo0, lo1).finished();
    box.hi = (Eigen::VectorXd(2) << hi0, hi1).finished();
    return box;
}

void check_in_open_interval(double value, double lo, double hi, const char* name) {
    if (!(value > lo && value < hi)) {
        throw InputError(std::string(name) + " outside the declared parameter box");
    }
}

Eigen::RowVectorXd spiral_row(std::mt19937_64& rng, std::normal_distribution<double>& n01,
                              double theta, double noise_sd) {
    Eigen::RowVectorXd row = spiral_center(theta);
    row(0) += noise_sd * n01(rng);
    row(1) += noise_sd * n01(rng);
    return row;
}

Eigen::RowVectorXd klein_row(std::mt19937_64& rng, std::normal_distribution<double>& n01,
                             double t1, double t2, double noise_sd) {
    Eigen::RowVectorXd row = klein_center(t1, t2);
    for (int c = 0; c < 4; ++c) {
        row(c) += noise_sd * n01(rng);
    }
    return row;
}

Eigen::RowVectorXd edges_row(std::mt19937_64& rng, std::normal_distribution<double>& n01,
                             double alpha, double lambda, double angle_sd, double disp_sd) {
    const double a = alpha + angle_sd * n01(rng);
    const double l = truncated_normal(rng, lambda, disp_sd, -kEdgeMaxDisplacement,
                                      kEdgeMaxDisplacement);
    return edge_image(a, l);
}

} // namespace

SimulatorSpec SimulatorSpec::spiral() {
    SimulatorSpec spec;
    spec.model = SimModel::Spiral;
    spec.param_box = box1(0.0, 15.0);
    spec.noise_sd = 1.0;
    return spec;
}

SimulatorSpec SimulatorSpec::klein() {
    SimulatorSpec spec;
    spec.model = SimModel::KleinBottle;
    spec.param_box = box2(0.0, kTwoPi, 0.0, kTwoPi);
    spec.noise_sd = 1.0;
    return spec;
}

SimulatorSpec SimulatorSpec::edges() {
    SimulatorSpec spec;
    spec.model = SimModel::Edges;
    spec.param_box = box2(0.0, kTwoPi, -5.0, 5.0); // (alpha, lambda)
    spec.edges_angle_sd = std::numbers::pi / 4.0;
    spec.edges_disp_sd = 0.5;
    return spec;
}

SimulatorSpec SimulatorSpec::gaussian_shift(int dim) {
    SimulatorSpec spec;
    spec.model = SimModel::GaussianShift;
    spec.param_box = box1(-1.0, 1.0);
    spec.gaussian_dim = dim;
    return spec;
}

int SimulatorSpec::data_dim() const {
    switch (model) {
    case SimModel::Spiral:
        return 2;
    case SimModel::KleinBottle:
        return 4;
    case SimModel::Edges:
        return kEdgeImageDim;
    case SimModel::GaussianShift:
        return gaussian_dim;
    }
    throw InputError("unknown simulator model");
}

void SimulatorSpec::validate() const {
    param_box.validate(true);
    if (noise_sd < 0.0 || edges_angle_sd < 0.0 || edges_disp_sd < 0.0) {
        throw InputError("simulator noise scales must be nonnegative");
    }
    if (model == SimModel::GaussianShift && gaussian_dim < 1) {
        throw InputError("gaussian-shift dimension must be at least 1");
    }
}

Eigen::RowVectorXd spiral_center(double theta) {
    Eigen::RowVectorXd row(2);
    row << theta * std::cos(theta), theta * std::sin(theta);
    return row;
}

Eigen::RowVectorXd klein_center(double theta1, double theta2) {
    Eigen::RowVectorXd row(4);
    row << 2.0 * (std::cos(theta2) + 1.0) * std::cos(theta1),
        2.0 * (std::cos(theta2) + 1.0) * std::sin(theta1),
        2.0 * std::sin(theta2) * std::cos(theta1 / 2.0),
        2.0 * std::sin(theta2) * std::sin(theta1 / 2.0);
    return row;
}

Eigen::RowVectorXd edge_image(double angle, double displacement) {
    const double nx = std::cos(angle);
    const double ny = std::sin(angle);
    const double half = (kEdgeImageSide - 1) / 2.0;
    Eigen::RowVectorXd img(kEdgeImageDim);
    for (int r = 0; r < kEdgeImageSide; ++r) {
        const double v = static_cast<double>(r) - half;
        for (int c = 0; c < kEdgeImageSide; ++c) {
            const double u = static_cast<double>(c) - half;
            img(r * kEdgeImageSide + c) = (u * nx + v * ny < displacement) ? 1.0 : 0.0;
        }
    }
    return img;
}

double truncated_normal(std::mt19937_64& rng, double mean, double sd, double lo, double hi) {
    if (!(lo < hi)) {
        throw InputError("truncated_normal: empty truncation interval");
    }
    if (sd == 0.0) {
        if (mean < lo || mean > hi) {
            throw InputError("truncated_normal: zero-noise mean outside bounds");
        }
        return mean;
    }
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const double v = mean + sd * n01(rng);
        if (v >= lo && v <= hi) {
            return v;
        }
    }
    throw NumericalError("truncated_normal: acceptance region too small");
}

Eigen::MatrixXd simulate_spiral(double theta, int n, std::uint64_t seed, double noise_sd) {
    check_in_open_interval(theta, 0.0, 15.0, "spiral theta");
    if (n < 1) {
        throw InputError("simulate_spiral: n must be positive");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd out(n, 2);
    for (int k = 0; k < n; ++k) {
        out.row(k) = spiral_row(rng, n01, theta, noise_sd);
    }
    return out;
}

Eigen::MatrixXd simulate_klein(double theta1, double theta2, int n, std::uint64_t seed,
                               double noise_sd) {
    check_in_open_interval(theta1, 0.0, kTwoPi, "klein theta1");
    check_in_open_interval(theta2, 0.0, kTwoPi, "klein theta2");
    if (n < 1) {
        throw InputError("simulate_klein: n must be positive");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd out(n, 4);
    for (int k = 0; k < n; ++k) {
        out.row(k) = klein_row(rng, n01, theta1, theta2, noise_sd);
    }
    return out;
}

Eigen::MatrixXd simulate_edges(double alpha, double lambda, int n, std::uint64_t seed,
                               double angle_sd, double disp_sd) {
    const SimulatorSpec ref = SimulatorSpec::edges();
    if (angle_sd < 0.0) {
        angle_sd = ref.edges_angle_sd;
    }
    if (disp_sd < 0.0) {
        disp_sd = ref.edges_disp_sd;
    }
    if (lambda < ref.param_box.lo(1) || lambda > ref.param_box.hi(1)) {
        throw InputError("edges lambda outside the declared displacement box");
    }
    if (n < 1) {
        throw InputError("simulate_edges: n must be positive");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd out(n, kEdgeImageDim);
    for (int k = 0; k < n; ++k) {
        out.row(k) = edges_row(rng, n01, alpha, lambda, angle_sd, disp_sd);
    }
    return out;
}

Eigen::MatrixXd simulate_gaussian_shift(double mu, int n, int d, std::uint64_t seed) {
    if (n < 1 || d < 1) {
        throw InputError("simulate_gaussian_shift: n and d must be positive");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd out(n, d);
    for (int k = 0; k < n; ++k) {
        for (int c = 0; c < d; ++c) {
            out(k, c) = mu + n01(rng);
        }
    }
    return out;
}

Eigen::MatrixXd simulate_at(const SimulatorSpec& spec,
                            const Eigen::Ref<const Eigen::RowVectorXd>& theta, int n,
                            std::uint64_t seed) {
    spec.validate();
    if (theta.size() != spec.param_dim()) {
        throw InputError("simulate_at: theta dimension does not match the simulator");
    }
    switch (spec.model) {
    case SimModel::Spiral:
        return simulate_spiral(theta(0), n, seed, spec.noise_sd);
    case SimModel::KleinBottle:
        return simulate_klein(theta(0), theta(1), n, seed, spec.noise_sd);
    case SimModel::Edges:
        return simulate_edges(theta(0), theta(1), n, seed, spec.edges_angle_sd,
                              spec.edges_disp_sd);
    case SimModel::GaussianShift:
        return simulate_gaussian_shift(theta(0), n, spec.gaussian_dim, seed);
    }
    throw InputError("unknown simulator model");
}

Eigen::RowVectorXd uniform_in_box(const ParamBox& box, std::mt19937_64& rng) {
    box.validate(true);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Eigen::RowVectorXd theta(box.dim());
    for (int c = 0; c < box.dim(); ++c) {
        if (box.hi(c) > box.lo(c)) {
            double u = u01(rng);
            while (u == 0.0) {
                u = u01(rng);
            }
            theta(c) = box.lo(c) + u * (box.hi(c) - box.lo(c));
        } else {
            theta(c) = box.lo(c);
        }
    }
    return theta;
}

JointSample simulate_joint(const SimulatorSpec& spec, int n, std::uint64_t seed) {
    spec.validate();
    if (n < 1) {
        throw InputError("simulate_joint: n must be positive");
    }
    const int p = spec.param_dim();
    const int d = spec.data_dim();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    JointSample out;
    out.theta.resize(n, p);
    out.x.resize(n, d);
    for (int k = 0; k < n; ++k) {
        Eigen::RowVectorXd theta(p);
        for (int c = 0; c < p; ++c) {
            const double lo = spec.param_box.lo(c);
            const double hi = spec.param_box.hi(c);
            if (hi > lo) {
                double u = u01(rng);
                while (u == 0.0) { // keep draws in the open interval
                    u = u01(rng);
                }
                theta(c) = lo + u * (hi - lo);
            } else {
                theta(c) = lo;
            }
        }
        out.theta.row(k) = theta;
        switch (spec.model) {
        case SimModel::Spiral:
            out.x.row(k) = spiral_row(rng, n01, theta(0), spec.noise_sd);
            break;
        case SimModel::KleinBottle:
            out.x.row(k) = klein_row(rng, n01, theta(0), theta(1), spec.noise_sd);
            break;
        case SimModel::Edges:
            out.x.row(k) = edges_row(rng, n01, theta(0), theta(1), spec.edges_angle_sd,
                                     spec.edges_disp_sd);
            break;
        case SimModel::GaussianShift:
            for (int c = 0; c < d; ++c) {
                out.x(k, c) = theta(0) + n01(rng);
            }
            break;
        }
    }
    return out;
}

} // namespace specseries

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "specseries/simulators.hpp"

using namespace specseries;

namespace {

constexpr double kPi = std::numbers::pi;

// Kolmogorov-Smirnov statistic against Uniform(lo, hi).
double ks_uniform(Eigen::VectorXd values, double lo, double hi) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double u = (values(i) - lo) / (hi - lo);
        d = std::max(d, std::abs((i + 1) / n - u));
        d = std::max(d, std::abs(u - i / n));
    }
    return d;
}

} // namespace

TEST_CASE("spiral centers") {
    const Eigen::RowVectorXd at_pi = spiral_center(kPi);
    CHECK(at_pi(0) == doctest::Approx(-kPi).epsilon(1e-12));
    CHECK(std::abs(at_pi(1)) < 1e-12);
    // theta -> 0+ collapses to the origin
    CHECK(spiral_center(1e-9).norm() < 1e-8);

    // noiseless draws sit exactly on the center
    const Eigen::MatrixXd pts = simulate_spiral(kPi, 3, 1, 0.0);
    for (int k = 0; k < 3; ++k) {
        CHECK((pts.row(k) - at_pi).norm() == 0.0);
    }
}

TEST_CASE("spiral Monte Carlo mean matches the center") {
    const double theta = 5.0;
    const Eigen::MatrixXd pts = simulate_spiral(theta, 100000, 42);
    const Eigen::RowVectorXd mean = pts.colwise().mean();
    const Eigen::RowVectorXd center = spiral_center(theta);
    CHECK(std::abs(mean(0) - center(0)) < 0.02);
    CHECK(std::abs(mean(1) - center(1)) < 0.02);
}

TEST_CASE("spiral parameter validation") {
    CHECK_THROWS_AS(simulate_spiral(0.0, 5, 1), InputError);
    CHECK_THROWS_AS(simulate_spiral(15.0, 5, 1), InputError);
    CHECK_THROWS_AS(simulate_spiral(-2.0, 5, 1), InputError);
    CHECK_THROWS_AS(simulate_spiral(5.0, 0, 1), InputError);
}

TEST_CASE("klein centers") {
    const Eigen::RowVectorXd at = klein_center(kPi / 2.0, kPi / 2.0);
    CHECK(at(0) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
    CHECK(at(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(at(2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(at(3) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // theta2 = pi annihilates every coordinate
    CHECK(klein_center(1.234, kPi).cwiseAbs().maxCoeff() < 1e-12);

    const Eigen::MatrixXd mc = simulate_klein(1.0, 2.0, 100000, 7);
    const Eigen::RowVectorXd mean = mc.colwise().mean();
    const Eigen::RowVectorXd center = klein_center(1.0, 2.0);
    for (int c = 0; c < 4; ++c) {
        CHECK(std::abs(mean(c) - center(c)) < 0.02);
    }
    CHECK_THROWS_AS(simulate_klein(0.0, 1.0, 5, 1), InputError);
    CHECK_THROWS_AS(simulate_klein(1.0, 7.0, 5, 1), InputError);
}

TEST_CASE("edge rasterization") {
    const Eigen::RowVectorXd img = edge_image(0.0, 0.0);
    REQUIRE(img.size() == 400);
    CHECK(img.sum() == 200.0);
    // left half-plane = 1, right half = 0, row-major layout
    for (int r = 0; r < 20; ++r) {
        for (int c = 0; c < 20; ++c) {
            CHECK(img(r * 20 + c) == (c < 10 ? 1.0 : 0.0));
        }
    }
    // flipping the normal complements the image
    const Eigen::RowVectorXd flipped = edge_image(kPi, 0.0);
    for (int i = 0; i < 400; ++i) {
        CHECK(flipped(i) == 1.0 - img(i));
    }
}

TEST_CASE("edge draws are binary and respect the displacement box") {
    const Eigen::MatrixXd draws = simulate_edges(1.0, 2.0, 20, 3);
    CHECK(draws.rows() == 20);
    CHECK(draws.cols() == 400);
    for (int k = 0; k < draws.rows(); ++k) {
        for (int c = 0; c < draws.cols(); ++c) {
            const bool binary = draws(k, c) == 0.0 || draws(k, c) == 1.0;
            CHECK(binary);
        }
    }
    CHECK_THROWS_AS(simulate_edges(1.0, 5.5, 5, 1), InputError);
    CHECK_THROWS_AS(simulate_edges(1.0, -5.5, 5, 1), InputError);
}

TEST_CASE("truncated normal stays within bounds and recovers the location") {
    std::mt19937_64 rng(11);
    double acc = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        const double v = truncated_normal(rng, 0.3, 1.0, -0.5, 0.8);
        CHECK(v >= -0.5);
        CHECK(v <= 0.8);
    }
    // wide bounds: mean approaches the location parameter
    for (int k = 0; k < n; ++k) {
        acc += truncated_normal(rng, 0.3, 1.0, -10.0, 10.0);
    }
    CHECK(std::abs(acc / n - 0.3) < 0.03);
    CHECK_THROWS_AS(truncated_normal(rng, 0.0, 1.0, 2.0, 1.0), InputError);
}

TEST_CASE("gaussian shift sample statistics and determinism") {
    const Eigen::MatrixXd a = simulate_gaussian_shift(0.0, 4000, 2, 5);
    CHECK(std::abs(a.col(0).mean()) < 3.0 / std::sqrt(4000.0));
    const Eigen::MatrixXd b = simulate_gaussian_shift(0.0, 4000, 2, 5);
    CHECK(a == b); // bit-identical under a fixed seed

    const Eigen::MatrixXd c = simulate_gaussian_shift(0.5, 4000, 1, 6);
    CHECK(std::abs(c.mean() - 0.5) < 3.0 / std::sqrt(4000.0));
}

TEST_CASE("simulate_joint draws uniform labels") {
    const SimulatorSpec spec = SimulatorSpec::klein();
    const JointSample joint = simulate_joint(spec, 10000, 9);
    REQUIRE(joint.theta.cols() == 2);
    REQUIRE(joint.x.cols() == 4);
    for (int c = 0; c < 2; ++c) {
        CHECK(ks_uniform(joint.theta.col(c), 0.0, 2.0 * kPi) < 0.05);
    }
    CHECK_THROWS_AS(simulate_joint(spec, 0, 9), InputError);
}

TEST_CASE("simulate_joint with a degenerate box reproduces the fixed-theta simulator") {
    SimulatorSpec spec = SimulatorSpec::spiral();
    spec.param_box.lo.setConstant(7.0);
    spec.param_box.hi.setConstant(7.0);
    const JointSample joint = simulate_joint(spec, 50, 123);
    CHECK((joint.theta.array() == 7.0).all());
    const Eigen::MatrixXd direct = simulate_spiral(7.0, 50, 123);
    CHECK(joint.x == direct);
}

TEST_CASE("simulate_at dispatches to the fixed-theta simulators") {
    const SimulatorSpec spec = SimulatorSpec::spiral();
    Eigen::RowVectorXd theta(1);
    theta << 7.0;
    CHECK(simulate_at(spec, theta, 25, 55) == simulate_spiral(7.0, 25, 55));

    const SimulatorSpec edges = SimulatorSpec::edges();
    Eigen::RowVectorXd te(2);
    te << 1.0, 2.0;
    CHECK(simulate_at(edges, te, 4, 56) == simulate_edges(1.0, 2.0, 4, 56));
}

TEST_CASE("all simulators are finite and deterministic") {
    for (const SimulatorSpec& spec :
         {SimulatorSpec::spiral(), SimulatorSpec::klein(), SimulatorSpec::edges(),
          SimulatorSpec::gaussian_shift(3)}) {
        const JointSample a = simulate_joint(spec, 30, 77);
        const JointSample b = simulate_joint(spec, 30, 77);
        CHECK(a.x.allFinite());
        CHECK(a.theta.allFinite());
        CHECK(a.x == b.x);
        CHECK(a.theta == b.theta);
        for (int k = 0; k < a.n(); ++k) {
            CHECK(spec.param_box.contains(a.theta.row(k)));
        }
    }
}

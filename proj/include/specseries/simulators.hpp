#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "specseries/likelihood.hpp"

namespace specseries {

enum class SimModel { Spiral, KleinBottle, Edges, GaussianShift };

/// Edge images are 20x20 binary rasters, flattened row-major.
inline constexpr int kEdgeImageSide = 20;
inline constexpr int kEdgeImageDim = kEdgeImageSide * kEdgeImageSide;
/// Total edge displacements are truncated to this many pixels from center.
inline constexpr double kEdgeMaxDisplacement = 8.0;

/**
 * Synthetic benchmark declaration: which model, its uniform-prior parameter
 * box, and the per-model noise scales (standard deviations).
 */
struct SimulatorSpec {
    SimModel model = SimModel::Spiral;
    ParamBox param_box;
    double noise_sd = 1.0;            // spiral / klein coordinate noise
    double edges_angle_sd = 0.0;      // set by edges()
    double edges_disp_sd = 0.0;
    int gaussian_dim = 1;

    static SimulatorSpec spiral();
    static SimulatorSpec klein();
    static SimulatorSpec edges();
    static SimulatorSpec gaussian_shift(int dim = 1);

    int data_dim() const;
    int param_dim() const { return param_box.dim(); }
    void validate() const;
};

/// Noiseless spiral point (t cos t, t sin t).
Eigen::RowVectorXd spiral_center(double theta);
/// Noiseless Klein-bottle embedding of (theta1, theta2) in R^4.
Eigen::RowVectorXd klein_center(double theta1, double theta2);
/// Binary edge raster: pixel (r, c) is 1 iff its center lies on the
/// negative side of the line with normal angle `angle` offset `displacement`
/// from the image center.
Eigen::RowVectorXd edge_image(double angle, double displacement);

/// Rejection sampler for a normal restricted to [lo, hi].
double truncated_normal(std::mt19937_64& rng, double mean, double sd, double lo, double hi);

Eigen::MatrixXd simulate_spiral(double theta, int n, std::uint64_t seed,
                                double noise_sd = 1.0);
Eigen::MatrixXd simulate_klein(double theta1, double theta2, int n, std::uint64_t seed,
                               double noise_sd = 1.0);
Eigen::MatrixXd simulate_edges(double alpha, double lambda, int n, std::uint64_t seed,
                               double angle_sd = -1.0, double disp_sd = -1.0);
/// i.i.d. draws from N(mu * 1, I_d).
Eigen::MatrixXd simulate_gaussian_shift(double mu, int n, int d, std::uint64_t seed);

/// One (theta, x) pair per row: theta uniform over the box, x from the model.
JointSample simulate_joint(const SimulatorSpec& spec, int n, std::uint64_t seed);

/// n draws from the model at a fixed parameter value.
Eigen::MatrixXd simulate_at(const SimulatorSpec& spec,
                            const Eigen::Ref<const Eigen::RowVectorXd>& theta, int n,
                            std::uint64_t seed);

/// Uniform draw from the open interior of the box.
Eigen::RowVectorXd uniform_in_box(const ParamBox& box, std::mt19937_64& rng);

} // namespace specseries

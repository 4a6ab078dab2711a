#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "specseries/evaluation.hpp"
#include "specseries/model_io.hpp"
#include "specseries/ratio.hpp"
#include "specseries/simulators.hpp"

namespace py = pybind11;
using namespace specseries;

namespace {

SimulatorSpec spec_from_name(const std::string& name) {
    if (name == "spiral") {
        return SimulatorSpec::spiral();
    }
    if (name == "klein") {
        return SimulatorSpec::klein();
    }
    if (name == "edges") {
        return SimulatorSpec::edges();
    }
    throw InputError("unknown simulator '" + name + "'");
}

ParamBox box_from_arrays(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    ParamBox box;
    box.lo = lo;
    box.hi = hi;
    box.validate();
    return box;
}

} // namespace

PYBIND11_MODULE(specseries, m) {
    m.doc() = "Spectral series estimators for density ratios and simulation-based "
              "likelihood functions";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_IOError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<SpectralBasis>(m, "SpectralBasis")
        .def_property_readonly("eigvals", &SpectralBasis::eigvals)
        .def_property_readonly("eigvecs", &SpectralBasis::eigvecs)
        .def_property_readonly("j_kept", &SpectralBasis::j_kept)
        .def_property_readonly("gap_warning", &SpectralBasis::gap_warning)
        .def_property_readonly("bandwidth_eps",
                               [](const SpectralBasis& b) { return b.kernel().bandwidth_eps; })
        .def("evaluate", &SpectralBasis::evaluate_batch, py::arg("xs"),
             "Nystrom extension of all components at the given rows");

    m.def(
        "fit_basis",
        [](const Eigen::MatrixXd& samples_g, double eps, int j_max) {
            return fit_basis(samples_g, {KernelFamily::Gaussian, eps}, j_max);
        },
        py::arg("samples_g"), py::arg("eps"), py::arg("j_max"));

    m.def("default_eps_grid", &default_eps_grid, py::arg("samples"), py::arg("seed") = 0,
          "Quantile-rule bandwidth grid");

    py::class_<RatioLossEntry>(m, "RatioLossEntry")
        .def_readonly("eps", &RatioLossEntry::eps)
        .def_readonly("j", &RatioLossEntry::j)
        .def_readonly("loss", &RatioLossEntry::loss);

    py::class_<RatioLossReport>(m, "RatioLossReport")
        .def_readonly("entries", &RatioLossReport::entries)
        .def_readonly("selected", &RatioLossReport::selected);

    py::class_<RatioModel>(m, "RatioModel")
        .def_property_readonly("j_selected", [](const RatioModel& r) { return r.j_selected; })
        .def_property_readonly("coeffs", [](const RatioModel& r) { return r.coeffs; })
        .def_property_readonly("basis", [](const RatioModel& r) { return r.basis; })
        .def(
            "predict",
            [](const RatioModel& r, const Eigen::MatrixXd& xs, int j) {
                return predict_ratio_batch(r, xs, j);
            },
            py::arg("xs"), py::arg("j") = 0, "Clipped series predictions per row");

    m.def(
        "fit_ratio_model",
        [](const Eigen::MatrixXd& train_g, const Eigen::MatrixXd& train_f, double eps,
           int j_max) {
            return fit_ratio_model(train_g, train_f, {KernelFamily::Gaussian, eps}, j_max);
        },
        py::arg("train_g"), py::arg("train_f"), py::arg("eps"), py::arg("j_max"));

    m.def("select_ratio_model", &select_ratio_model, py::arg("train_g"), py::arg("train_f"),
          py::arg("val_g"), py::arg("val_f"), py::arg("eps_grid"), py::arg("j_max"),
          "Joint (eps, J) selection by minimal held-out loss");

    m.def(
        "estimate_ratio_loss",
        [](const RatioModel& model, const Eigen::MatrixXd& val_g, const Eigen::MatrixXd& val_f,
           int j) { return estimate_ratio_loss(model, val_g, val_f, j); },
        py::arg("model"), py::arg("val_g"), py::arg("val_f"), py::arg("j") = 0);

    m.def("ratio_j_scan", &ratio_j_scan, py::arg("model"), py::arg("val_g"), py::arg("val_f"));

    py::class_<ThetaGrid>(m, "ThetaGrid")
        .def_static(
            "regular",
            [](const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int points_per_dim) {
                return ThetaGrid::regular(box_from_arrays(lo, hi), points_per_dim);
            },
            py::arg("lo"), py::arg("hi"), py::arg("points_per_dim"))
        .def_readonly("points", &ThetaGrid::points)
        .def_readonly("cell_volume", &ThetaGrid::cell_volume);

    py::class_<LikelihoodLossEntry>(m, "LikelihoodLossEntry")
        .def_readonly("eps_x", &LikelihoodLossEntry::eps_x)
        .def_readonly("eps_theta", &LikelihoodLossEntry::eps_theta)
        .def_readonly("i", &LikelihoodLossEntry::i)
        .def_readonly("j", &LikelihoodLossEntry::j)
        .def_readonly("loss", &LikelihoodLossEntry::loss);

    py::class_<LikelihoodLossReport>(m, "LikelihoodLossReport")
        .def_readonly("entries", &LikelihoodLossReport::entries)
        .def_readonly("selected", &LikelihoodLossReport::selected);

    py::class_<LikelihoodModel>(m, "LikelihoodModel")
        .def_property_readonly("i_selected",
                               [](const LikelihoodModel& l) { return l.i_selected; })
        .def_property_readonly("j_selected",
                               [](const LikelihoodModel& l) { return l.j_selected; })
        .def_property_readonly("coeffs", [](const LikelihoodModel& l) { return l.coeffs; })
        .def(
            "predict",
            [](const LikelihoodModel& model, const Eigen::MatrixXd& xs,
               const Eigen::MatrixXd& thetas, int i, int j) {
                return predict_likelihood_grid(model, xs, thetas, i, j);
            },
            py::arg("xs"), py::arg("thetas"), py::arg("i") = 0, py::arg("j") = 0,
            "Likelihood surface: rows index observations, columns theta rows");

    m.def(
        "fit_likelihood",
        [](const Eigen::MatrixXd& joint_x, const Eigen::MatrixXd& joint_theta,
           const Eigen::MatrixXd& samples_g, double eps_x, double eps_theta, int i_max,
           int j_max) {
            return fit_likelihood({joint_x, joint_theta}, samples_g,
                                  {KernelFamily::Gaussian, eps_x},
                                  {KernelFamily::Gaussian, eps_theta}, i_max, j_max);
        },
        py::arg("joint_x"), py::arg("joint_theta"), py::arg("samples_g"), py::arg("eps_x"),
        py::arg("eps_theta"), py::arg("i_max"), py::arg("j_max"));

    m.def(
        "select_likelihood_model",
        [](const Eigen::MatrixXd& train_x, const Eigen::MatrixXd& train_theta,
           const Eigen::MatrixXd& train_g, const Eigen::MatrixXd& val_x,
           const Eigen::MatrixXd& val_theta, const Eigen::MatrixXd& val_g,
           const std::vector<double>& eps_grid_x, const std::vector<double>& eps_grid_theta,
           int i_max, int j_max, int b, std::uint64_t seed) {
            return select_likelihood_model({train_x, train_theta}, train_g,
                                           {val_x, val_theta}, val_g, eps_grid_x,
                                           eps_grid_theta, i_max, j_max, b, seed);
        },
        py::arg("train_x"), py::arg("train_theta"), py::arg("train_g"), py::arg("val_x"),
        py::arg("val_theta"), py::arg("val_g"), py::arg("eps_grid_x"),
        py::arg("eps_grid_theta"), py::arg("i_max"), py::arg("j_max"),
        py::arg("b") = kDefaultPermutations, py::arg("seed") = 0);

    m.def(
        "estimate_likelihood_loss",
        [](const LikelihoodModel& model, const Eigen::MatrixXd& val_g,
           const Eigen::MatrixXd& val_x, const Eigen::MatrixXd& val_theta, int b, int i,
           int j, std::uint64_t seed) {
            return estimate_likelihood_loss(model, val_g, {val_x, val_theta}, b, i, j, seed);
        },
        py::arg("model"), py::arg("val_g"), py::arg("val_x"), py::arg("val_theta"),
        py::arg("b") = kDefaultPermutations, py::arg("i") = 0, py::arg("j") = 0,
        py::arg("seed") = 0);

    m.def(
        "sample_log_likelihood",
        [](const LikelihoodModel& model, const Eigen::MatrixXd& observations,
           const ThetaGrid& grid) {
            const PosteriorResult post = sample_log_likelihood(model, observations, grid);
            return py::make_tuple(post.density, post.flat_warning);
        },
        py::arg("model"), py::arg("observations"), py::arg("grid"),
        "Normalized posterior over the grid; returns (density, flat_warning)");

    m.def(
        "average_likelihood",
        [](const LikelihoodModel& model, const Eigen::MatrixXd& test_x,
           const Eigen::MatrixXd& test_theta, const ThetaGrid& grid) {
            return average_likelihood(model, {test_x, test_theta}, grid);
        },
        py::arg("model"), py::arg("test_x"), py::arg("test_theta"), py::arg("grid"));

    m.def(
        "average_distance_to_truth",
        [](const LikelihoodModel& model, const Eigen::MatrixXd& test_x,
           const Eigen::MatrixXd& test_theta, const ThetaGrid& grid) {
            return average_distance_to_truth(model, {test_x, test_theta}, grid);
        },
        py::arg("model"), py::arg("test_x"), py::arg("test_theta"), py::arg("grid"));

    m.def("posterior_distance_to_truth", &posterior_distance_to_truth, py::arg("model"),
          py::arg("observations"), py::arg("theta_star"), py::arg("grid"));

    // simulators
    m.def("simulate_spiral", &simulate_spiral, py::arg("theta"), py::arg("n"),
          py::arg("seed"), py::arg("noise_sd") = 1.0);
    m.def("simulate_klein", &simulate_klein, py::arg("theta1"), py::arg("theta2"),
          py::arg("n"), py::arg("seed"), py::arg("noise_sd") = 1.0);
    m.def("simulate_edges", &simulate_edges, py::arg("alpha"), py::arg("lambda_"),
          py::arg("n"), py::arg("seed"), py::arg("angle_sd") = -1.0,
          py::arg("disp_sd") = -1.0);
    m.def("simulate_gaussian_shift", &simulate_gaussian_shift, py::arg("mu"), py::arg("n"),
          py::arg("d"), py::arg("seed"));
    m.def(
        "simulate_joint",
        [](const std::string& model, int n, std::uint64_t seed) {
            const JointSample joint = simulate_joint(spec_from_name(model), n, seed);
            return py::make_tuple(joint.x, joint.theta);
        },
        py::arg("model"), py::arg("n"), py::arg("seed"),
        "Draws (x, theta) pairs from the named simulator's uniform prior");
    m.def(
        "param_box",
        [](const std::string& model) {
            const SimulatorSpec spec = spec_from_name(model);
            return py::make_tuple(spec.param_box.lo, spec.param_box.hi);
        },
        py::arg("model"), "Prior box (lo, hi) of the named simulator");
    m.def("edge_image", &edge_image, py::arg("angle"), py::arg("displacement"));

    // persistence
    m.def(
        "save_ratio_model",
        [](const std::string& path, const RatioModel& model) {
            RatioModelFile file;
            file.model = model;
            save_ratio_model(path, file);
        },
        py::arg("path"), py::arg("model"));
    m.def(
        "load_ratio_model",
        [](const std::string& path) { return load_ratio_model(path).model; },
        py::arg("path"));
    m.def(
        "save_likelihood_model",
        [](const std::string& path, const LikelihoodModel& model, const Eigen::VectorXd& lo,
           const Eigen::VectorXd& hi) {
            LikelihoodModelFile file;
            file.model = model;
            file.param_box = box_from_arrays(lo, hi);
            save_likelihood_model(path, file);
        },
        py::arg("path"), py::arg("model"), py::arg("box_lo"), py::arg("box_hi"));
    m.def(
        "load_likelihood_model",
        [](const std::string& path) {
            const LikelihoodModelFile file = load_likelihood_model(path);
            return py::make_tuple(file.model, file.param_box.lo, file.param_box.hi);
        },
        py::arg("path"));

    m.attr("__version__") = kLibraryVersion;
}

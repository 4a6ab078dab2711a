#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "specseries/model_io.hpp"
#include "specseries/simulators.hpp"
#include "test_utils.hpp"

using namespace specseries;
using specseries::test::randn;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

RatioModelFile make_ratio_file() {
    RatioModelFile file;
    file.model = fit_ratio_model(randn(30, 2, 1), randn(25, 2, 2),
                                 {KernelFamily::Gaussian, 0.9}, 6);
    file.model.j_selected = 3;
    file.provenance.config_hash = fnv1a_hex("test-config");
    file.provenance.seed = 42;
    return file;
}

LikelihoodModelFile make_likelihood_file() {
    LikelihoodModelFile file;
    const JointSample joint{randn(28, 2, 3), randn(28, 1, 4)};
    file.model = fit_likelihood(joint, randn(28, 2, 5), {KernelFamily::Gaussian, 1.1},
                                {KernelFamily::Gaussian, 0.7}, 4, 5);
    file.param_box.lo = Eigen::VectorXd::Constant(1, -3.0);
    file.param_box.hi = Eigen::VectorXd::Constant(1, 3.0);
    file.provenance.config_hash = fnv1a_hex("test-config-2");
    file.provenance.seed = 7;
    return file;
}

} // namespace

TEST_CASE("fnv1a matches the published constants") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("abc") == "e71fa2190541574b");
}

TEST_CASE("ratio model round-trips with identical predictions") {
    const std::string path = temp_path("specseries_ratio_model.json");
    const RatioModelFile file = make_ratio_file();
    save_ratio_model(path, file);
    CHECK(peek_model_kind(path) == ModelKind::Ratio);
    const RatioModelFile loaded = load_ratio_model(path);

    CHECK(loaded.model.coeffs == file.model.coeffs); // bit-exact coefficients
    CHECK(loaded.model.j_selected == file.model.j_selected);
    CHECK(loaded.provenance.config_hash == file.provenance.config_hash);
    CHECK(loaded.provenance.seed == 42);
    CHECK(loaded.x_transform.identity());

    const Eigen::MatrixXd probes = randn(100, 2, 9);
    for (int k = 0; k < probes.rows(); ++k) {
        const double a = predict_ratio(file.model, probes.row(k));
        const double b = predict_ratio(loaded.model, probes.row(k));
        CHECK(std::abs(a - b) <= 1e-12);
    }
    std::remove(path.c_str());
}

TEST_CASE("likelihood model round-trips with identical predictions") {
    const std::string path = temp_path("specseries_lik_model.json");
    LikelihoodModelFile file = make_likelihood_file();
    file.x_transform = ColumnTransform::fit(randn(50, 2, 10));
    save_likelihood_model(path, file);
    CHECK(peek_model_kind(path) == ModelKind::Likelihood);
    const LikelihoodModelFile loaded = load_likelihood_model(path);

    CHECK(loaded.model.coeffs == file.model.coeffs);
    CHECK(loaded.param_box.lo == file.param_box.lo);
    CHECK(!loaded.x_transform.identity());
    CHECK(loaded.x_transform.mean == file.x_transform.mean);

    const Eigen::MatrixXd xs = randn(100, 2, 11);
    const Eigen::MatrixXd ts = randn(100, 1, 12);
    for (int k = 0; k < xs.rows(); ++k) {
        const double a = predict_likelihood(file.model, xs.row(k), ts.row(k));
        const double b = predict_likelihood(loaded.model, xs.row(k), ts.row(k));
        CHECK(std::abs(a - b) <= 1e-12);
    }
    std::remove(path.c_str());
}

TEST_CASE("loading rejects truncated files") {
    const std::string path = temp_path("specseries_trunc_model.json");
    save_ratio_model(path, make_ratio_file());
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size / 2);
    CHECK_THROWS_AS(load_ratio_model(path), DataError);
    CHECK_THROWS_AS(peek_model_kind(path), DataError);
    std::remove(path.c_str());
}

TEST_CASE("loading rejects newer major versions and wrong kinds") {
    const std::string path = temp_path("specseries_version_model.json");
    {
        std::ofstream out(path);
        out << R"({"format":"specseries-model","version":{"major":99,"minor":0},)"
            << R"("kind":"ratio","provenance":{"config_hash":"x","seed":0,)"
            << R"("library_version":"9.9.9"}})";
    }
    CHECK_THROWS_AS(load_ratio_model(path), DataError);
    std::remove(path.c_str());

    const std::string rpath = temp_path("specseries_kind_model.json");
    save_ratio_model(rpath, make_ratio_file());
    CHECK_THROWS_AS(load_likelihood_model(rpath), DataError);
    std::remove(rpath.c_str());

    CHECK_THROWS_AS(load_ratio_model(temp_path("missing_model.json")), DataError);
}

#include <doctest.h>

#include <cmath>

#include "specseries/spectral_basis.hpp"
#include "test_utils.hpp"

using namespace specseries;
using specseries::test::randn;

TEST_CASE("fit_basis on two identical points keeps the rank-one component") {
    // Gram [[1,1],[1,1]] has eigenpairs (2, (1,1)/sqrt(2)) and (0, .)
    Eigen::MatrixXd pts(2, 2);
    pts << 0.4, -1.0, 0.4, -1.0;
    const SpectralBasis basis = fit_basis(pts, {KernelFamily::Gaussian, 1.0}, 2);
    REQUIRE(basis.j_kept() == 1);
    CHECK(basis.eigvals()(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(basis.eigvecs()(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
    CHECK(basis.eigvecs()(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("fit_basis flags near-degenerate spectra but still returns") {
    // distance 1e6 at eps = 1: the off-diagonal underflows, Gram ~ identity
    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 1e6;
    const SpectralBasis basis = fit_basis(pts, {KernelFamily::Gaussian, 1.0}, 2);
    REQUIRE(basis.j_kept() == 2);
    CHECK(basis.eigvals()(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(basis.eigvals()(1) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(basis.gap_warning());
}

TEST_CASE("fit_basis agrees with an independent dense eigensolver") {
    const Eigen::MatrixXd pts = randn(30, 2, 21);
    const KernelSpec spec{KernelFamily::Gaussian, 0.5};
    const SpectralBasis basis = fit_basis(pts, spec, 30);
    CHECK(basis.j_kept() <= 30);

    const Eigen::MatrixXd gram = gram_matrix(spec, pts);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(gram);
    REQUIRE(oracle.info() == Eigen::Success);

    // oracle self-check: full reconstruction reproduces the Gram matrix
    const Eigen::MatrixXd recon = oracle.eigenvectors() *
                                  oracle.eigenvalues().asDiagonal() *
                                  oracle.eigenvectors().transpose();
    CHECK((recon - gram).cwiseAbs().maxCoeff() < 1e-8);

    // retained eigenvalues match the oracle's top ones (oracle is ascending)
    const Eigen::Index n = gram.rows();
    for (int j = 0; j < basis.j_kept(); ++j) {
        CHECK(basis.eigvals()(j) ==
              doctest::Approx(oracle.eigenvalues()(n - 1 - j)).epsilon(1e-10));
        // same one-dimensional eigenspace (its eigenvalues are distinct here)
        const double align =
            std::abs(basis.eigvecs().col(j).dot(oracle.eigenvectors().col(n - 1 - j)));
        CHECK(align == doctest::Approx(1.0).epsilon(1e-8));
    }

    // orthonormal columns
    const Eigen::MatrixXd vtv = basis.eigvecs().transpose() * basis.eigvecs();
    CHECK((vtv - Eigen::MatrixXd::Identity(basis.j_kept(), basis.j_kept()))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
}

TEST_CASE("sign convention and determinism") {
    const Eigen::MatrixXd pts = randn(50, 3, 33);
    const KernelSpec spec{KernelFamily::Gaussian, 1.2};
    const SpectralBasis a = fit_basis(pts, spec, 10);
    const SpectralBasis b = fit_basis(pts, spec, 10);
    CHECK(a.eigvals() == b.eigvals()); // bit-identical
    CHECK(a.eigvecs() == b.eigvecs());
    for (int j = 0; j < a.j_kept(); ++j) {
        Eigen::Index arg = 0;
        a.eigvecs().col(j).cwiseAbs().maxCoeff(&arg);
        CHECK(a.eigvecs()(arg, j) > 0.0);
    }
}

TEST_CASE("Nystrom training-point identity") {
    const Eigen::MatrixXd pts = randn(80, 3, 5);
    const SpectralBasis basis = fit_basis(pts, {KernelFamily::Gaussian, 1.0}, 20);
    const double root_n = std::sqrt(80.0);

    const Eigen::MatrixXd batch = basis.evaluate_batch(pts);
    const Eigen::MatrixXd expected = root_n * basis.eigvecs();
    CHECK((batch - expected).cwiseAbs().maxCoeff() <= 1e-8 * root_n);

    // scalar path agrees too
    const Eigen::VectorXd at0 = basis.evaluate(pts.row(0));
    CHECK((at0.transpose() - expected.row(0)).cwiseAbs().maxCoeff() <= 1e-8 * root_n);
}

TEST_CASE("empirical orthonormality on the training sample") {
    const Eigen::MatrixXd pts = randn(120, 2, 9);
    const SpectralBasis basis = fit_basis(pts, {KernelFamily::Gaussian, 0.8}, 10);
    const Eigen::MatrixXd psi = basis.evaluate_batch(pts);
    const Eigen::MatrixXd inner = psi.transpose() * psi / 120.0;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(basis.j_kept(), basis.j_kept());
    CHECK((inner - eye).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("held-out near-orthonormality (seeded, statistical)") {
    const Eigen::MatrixXd train = randn(600, 2, 101);
    const Eigen::MatrixXd fresh = randn(600, 2, 202);
    const auto grid = default_eps_grid(train, 0);
    const SpectralBasis basis =
        fit_basis(train, {KernelFamily::Gaussian, grid[grid.size() / 2]}, 5);
    REQUIRE(basis.j_kept() == 5);
    const Eigen::MatrixXd psi = basis.evaluate_batch(fresh);
    const Eigen::MatrixXd inner = psi.transpose() * psi / 600.0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double target = i == j ? 1.0 : 0.0;
            CHECK(std::abs(inner(i, j) - target) <= 0.2);
        }
    }
}

TEST_CASE("Nystrom evaluation term-by-term oracle on the duplicate-point basis") {
    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 0.0;
    const SpectralBasis basis = fit_basis(pts, {KernelFamily::Gaussian, 1.0}, 2);
    REQUIRE(basis.j_kept() == 1);

    // point at distance 2 from both training points: K(y, x_k) = exp(-1)
    Eigen::RowVectorXd y(1);
    y << 2.0;
    const double c = std::exp(-1.0);
    const double root_n = std::sqrt(2.0);
    const double ell = basis.eigvals()(0);
    const double expected =
        (root_n / ell) * (basis.eigvecs()(0, 0) * c + basis.eigvecs()(1, 0) * c);
    CHECK(basis.evaluate(y)(0) == doctest::Approx(expected).epsilon(1e-12));
    // numerically this collapses to c itself
    CHECK(expected == doctest::Approx(c).epsilon(1e-9));
}

TEST_CASE("components vanish far from the training sample") {
    const Eigen::MatrixXd pts = randn(25, 2, 77);
    const SpectralBasis basis = fit_basis(pts, {KernelFamily::Gaussian, 1.0}, 5);
    Eigen::RowVectorXd far(2);
    far << 1e6, -1e6;
    CHECK(basis.evaluate(far).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("batch evaluation equals row-wise scalar evaluation") {
    const Eigen::MatrixXd pts = randn(40, 3, 13);
    const SpectralBasis basis = fit_basis(pts, {KernelFamily::Gaussian, 0.9}, 8);
    const Eigen::MatrixXd xs = randn(17, 3, 14);
    const Eigen::MatrixXd batch = basis.evaluate_batch(xs);
    for (int r = 0; r < xs.rows(); ++r) {
        const Eigen::VectorXd one = basis.evaluate(xs.row(r));
        CHECK((batch.row(r).transpose() - one).cwiseAbs().maxCoeff() < 1e-10);
    }
    // one-row batch is the scalar evaluation
    const Eigen::MatrixXd single = basis.evaluate_batch(xs.topRows(1));
    CHECK((single.row(0).transpose() - basis.evaluate(xs.row(0))).cwiseAbs().maxCoeff() <
          1e-10);
}

TEST_CASE("fit_basis input errors") {
    CHECK_THROWS_AS(fit_basis(Eigen::MatrixXd::Zero(1, 2), {}, 3), InputError);
    CHECK_THROWS_AS(fit_basis(randn(5, 2, 1), {}, 0), InputError);
    const SpectralBasis basis = fit_basis(randn(5, 2, 1), {}, 3);
    Eigen::RowVectorXd wrong(3);
    wrong.setZero();
    CHECK_THROWS_AS(basis.evaluate(wrong), InputError);
    CHECK_THROWS_AS(basis.evaluate_batch(randn(4, 3, 2)), InputError);
}

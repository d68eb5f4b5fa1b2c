#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "csfq/circuit.hpp"
#include "csfq/operators.hpp"

using namespace csfq;
using Catch::Approx;

namespace {

Matrix random_hermitian(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
    return 0.5 * (a + a.adjoint()).eval();
}

}  // namespace

TEST_CASE("eigensolve 2x2") {
    OperatorMatrix op;
    op.basis = subspace_basis(2);
    op.m.resize(2, 2);
    op.m << 0, 1, 1, 0;
    const auto s = eigensolve(op, 2);
    CHECK(s.values(0) == Approx(-1.0));
    CHECK(s.values(1) == Approx(1.0));
}

TEST_CASE("eigensolve matches dense oracle on random Hermitian 50x50") {
    OperatorMatrix op;
    op.basis = subspace_basis(50);
    op.m = random_hermitian(50, 42);
    const auto s = eigensolve(op, 12);

    Eigen::SelfAdjointEigenSolver<Matrix> es(op.m);
    for (int i = 0; i < 12; ++i) CHECK(s.values(i) == Approx(es.eigenvalues()(i)).margin(1e-10));

    // orthonormality
    Matrix gram = s.vectors.adjoint() * s.vectors;
    CHECK((gram - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("eigensolve residuals on circuit Hamiltonian") {
    const auto p = table_s1_1d();
    const auto h = build_h_1d(p, {1.5 * std::numbers::pi, 0.02}, 30);
    const auto s = eigensolve(h, 10);
    const double scale = h.m.cwiseAbs().maxCoeff();
    for (int i = 0; i < 10; ++i) {
        const double resid = (h.m * s.vectors.col(i) - s.values(i) * s.vectors.col(i)).norm();
        CHECK(resid < 1e-8 * scale);
    }
    for (int i = 1; i < 10; ++i) CHECK(s.values(i) >= s.values(i - 1));
}

TEST_CASE("eigenvector phase convention") {
    OperatorMatrix op;
    op.basis = subspace_basis(40);
    op.m = random_hermitian(40, 7);
    const auto s = eigensolve(op, 6);
    for (int c = 0; c < 6; ++c) {
        int imax = 0;
        double amax = -1;
        for (int r = 0; r < 40; ++r)
            if (std::abs(s.vectors(r, c)) > amax) {
                amax = std::abs(s.vectors(r, c));
                imax = r;
            }
        CHECK(std::abs(std::imag(s.vectors(imax, c))) < 1e-12);
        CHECK(std::real(s.vectors(imax, c)) > 0.0);
    }
}

TEST_CASE("Lanczos path agrees with dense oracle on the 2D circuit Hamiltonian") {
    const auto p = table_s1_2d();
    const FluxPoint flux{1.5 * std::numbers::pi, 0.03};
    const auto h_big = build_h_2d(p, flux, 8, 18);  // dim 629 -> Lanczos path

    const auto s_big = eigensolve(h_big, 4);
    Eigen::SelfAdjointEigenSolver<Matrix> dense(h_big.m);
    for (int i = 0; i < 4; ++i)
        CHECK(s_big.values(i) == Approx(dense.eigenvalues()(i)).margin(1e-9));

    const double scale = h_big.m.cwiseAbs().maxCoeff();
    for (int i = 0; i < 4; ++i) {
        const double resid =
            (h_big.m * s_big.vectors.col(i) - s_big.values(i) * s_big.vectors.col(i)).norm();
        CHECK(resid < 1e-8 * scale);
    }
}

TEST_CASE("eigensolve input validation") {
    OperatorMatrix op;
    op.basis = subspace_basis(3);
    op.m = Matrix::Zero(3, 3);
    op.m(0, 1) = 1.0;  // not Hermitian
    CHECK_THROWS_AS(eigensolve(op, 2), numerical_error);

    op.m = Matrix::Identity(3, 3);
    CHECK_THROWS_AS(eigensolve(op, 0), config_error);
    CHECK_THROWS_AS(eigensolve(op, 4), config_error);
}

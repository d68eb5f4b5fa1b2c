#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "csfq/readout.hpp"

using namespace csfq;
using Catch::Approx;

namespace {

Matrix diag_ip(std::initializer_list<double> currents) {
    Matrix m = Matrix::Zero(currents.size(), currents.size());
    int i = 0;
    for (double c : currents) m(i, i) = c, ++i;
    return m;
}

}  // namespace

TEST_CASE("povm weights follow the tanh filter") {
    ReadoutModel rm;  // 10 nA

    SECTION("zero current weight is 1/2") {
        const auto m = povm_right(diag_ip({0.0}));
        CHECK(std::real(m(0, 0)) == Approx(0.5).margin(1e-14));
    }

    SECTION("I = Delta_I gives (tanh 1 + 1)/2") {
        const auto m = povm_right(diag_ip({10.0}));
        CHECK(std::real(m(0, 0)) == Approx(0.88079).margin(1e-5));
    }

    SECTION("saturation") {
        const auto m = povm_right(diag_ip({300.0, -300.0}));
        CHECK(std::real(m(0, 0)) == Approx(1.0).margin(1e-10));
        CHECK(std::real(m(1, 1)) == Approx(0.0).margin(1e-10));
    }

    SECTION("operator inequality 0 <= M_r <= I and complement") {
        Matrix ip(3, 3);
        ip << 5.0, Complex(1.0, 2.0), 0.0,
              Complex(1.0, -2.0), -7.0, 3.0,
              0.0, 3.0, 0.5;
        const auto m = povm_right(ip, rm);
        Eigen::SelfAdjointEigenSolver<Matrix> es(m);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
        CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-12);

        const auto ml = povm_left(ip, rm);
        CHECK(((m + ml) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }

    SECTION("non-Hermitian input rejected") {
        Matrix bad = Matrix::Zero(2, 2);
        bad(0, 1) = 1.0;
        CHECK_THROWS_AS(povm_right(bad, rm), numerical_error);
    }
}

TEST_CASE("p_right basics") {
    SECTION("localized large current gives P ~ 1") {
        const auto m = povm_right(diag_ip({200.0, -200.0}));
        Matrix rho = Matrix::Zero(2, 2);
        rho(0, 0) = 1.0;
        CHECK(p_right(rho, m) == Approx(1.0).margin(1e-10));
    }

    SECTION("maximally mixed over a symmetric current spectrum gives 1/2") {
        const auto m = povm_right(diag_ip({37.0, -37.0, 4.0, -4.0}));
        Matrix rho = 0.25 * Matrix::Identity(4, 4);
        CHECK(p_right(rho, m) == Approx(0.5).margin(1e-12));
    }

    SECTION("linearity in the state") {
        const auto m = povm_right(diag_ip({12.0, -3.0, 7.0}));
        Matrix r1 = Matrix::Zero(3, 3), r2 = Matrix::Zero(3, 3);
        r1(0, 0) = 1.0;
        r2(1, 1) = 0.5;
        r2(2, 2) = 0.5;
        r2(1, 2) = r2(2, 1) = 0.25;
        const double a = 0.3;
        const Matrix mix = a * r1 + (1 - a) * r2;
        CHECK(p_right(mix, m) ==
              Approx(a * p_right(r1, m) + (1 - a) * p_right(r2, m)).margin(1e-12));
    }

    SECTION("monotone under shifting all currents upward") {
        Matrix ip(2, 2);
        ip << 3.0, 1.0, 1.0, -6.0;
        Matrix rho = Matrix::Zero(2, 2);
        rho(0, 0) = 0.7;
        rho(1, 1) = 0.3;
        const double p0 = p_right(rho, povm_right(ip));
        const Matrix shifted = ip + 2.0 * Matrix::Identity(2, 2);
        const double p1 = p_right(rho, povm_right(shifted));
        CHECK(p1 >= p0);
    }

    SECTION("dimension mismatch rejected") {
        const auto m = povm_right(diag_ip({1.0, 2.0}));
        Matrix rho = Matrix::Identity(3, 3);
        CHECK_THROWS_AS(p_right(rho, m), config_error);
    }
}

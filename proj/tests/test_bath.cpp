#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "csfq/bath.hpp"
#include "csfq/lindblad.hpp"

using namespace csfq;
using Catch::Approx;

TEST_CASE("bath spectral function gamma") {
    BathParams bath;  // eta g^2 = 3e-6, 10 mK, 15 GHz cutoff

    SECTION("thermal exponent: h nu / kB T at 1 GHz, 10 mK is about 4.80") {
        const double x = thermal_beta_ns(10.0) * ghz_to_angular(1.0);
        CHECK(x == Approx(4.80).margin(0.005));
    }

    SECTION("KMS detailed balance to 1e-12 relative") {
        for (double nu : {0.03, 0.3, 1.0, 5.0, 20.0}) {
            const double beta = thermal_beta_ns(bath.temperature_mk);
            const double lhs = bath_gamma(bath, -nu);
            const double rhs = std::exp(-beta * ghz_to_angular(nu)) * bath_gamma(bath, nu);
            if (rhs == 0.0)
                CHECK(lhs == 0.0);
            else
                CHECK(std::abs(lhs - rhs) / rhs < 1e-12);
        }
    }

    SECTION("omega -> 0 limits agree with gamma(0)") {
        const double g0 = bath_gamma(bath, 0.0);
        CHECK(g0 == Approx(bath.eta_g2 * two_pi / thermal_beta_ns(10.0)).epsilon(1e-12));
        CHECK(bath_gamma(bath, 1e-9) == Approx(g0).epsilon(1e-6));
        CHECK(bath_gamma(bath, -1e-9) == Approx(g0).epsilon(1e-6));
    }

    SECTION("regression constant at the reference point (1 GHz, 10 mK)") {
        // gamma = eta g^2 * 2 pi w e^{-w/wc} / (1 - e^{-beta w}), w = 2 pi /ns
        const double w = ghz_to_angular(1.0);
        const double expected = 3e-6 * two_pi * w * std::exp(-1.0 / 15.0) /
                                (-std::expm1(-thermal_beta_ns(10.0) * w));
        CHECK(bath_gamma(bath, 1.0) == Approx(expected).epsilon(1e-14));
        CHECK(bath_gamma(bath, 1.0) == Approx(1.1182e-4).epsilon(2e-3));
    }

    SECTION("positivity for both signs at finite T") {
        CHECK(bath_gamma(bath, 2.0) > 0.0);
        CHECK(bath_gamma(bath, -2.0) > 0.0);
        CHECK(bath_gamma(bath, -2.0) < bath_gamma(bath, 2.0));
    }
}

TEST_CASE("lamb shift principal value integral") {
    BathParams bath;

    SECTION("zero coupling gives exactly zero") {
        BathParams off = bath;
        off.eta_g2 = 0.0;
        CHECK(lamb_shift_S(off, 1.0) == 0.0);
    }

    SECTION("linear in eta_g2") {
        BathParams twice = bath;
        twice.eta_g2 = 2.0 * bath.eta_g2;
        const double s1 = lamb_shift_S(bath, 1.3);
        const double s2 = lamb_shift_S(twice, 1.3);
        CHECK(s2 == Approx(2.0 * s1).epsilon(1e-10));
    }

    SECTION("halving the exclusion window changes S by < 1%") {
        LambShiftConfig base;
        LambShiftConfig half = base;
        half.window = 0.5 * base.window;
        const double s_base = lamb_shift_S(bath, 1.0, base);
        const double s_half = lamb_shift_S(bath, 1.0, half);
        CHECK(std::abs(s_half - s_base) < 0.01 * std::abs(s_base));
    }

    SECTION("deterministic") {
        CHECK(lamb_shift_S(bath, 2.5) == lamb_shift_S(bath, 2.5));
    }
}

TEST_CASE("lindblad operators from a spectrum") {
    // synthetic 4-level system with two exactly degenerate middle levels
    Eigen::VectorXd eps(4);
    eps << 0.0, 1.0, 1.0, 2.5;
    Matrix ip = Matrix::Zero(4, 4);
    ip(0, 1) = Complex(0.3, 0.1);
    ip(1, 0) = std::conj(ip(0, 1));
    ip(1, 2) = Complex(0.0, -0.2);
    ip(2, 1) = std::conj(ip(1, 2));
    ip(0, 3) = 0.7;
    ip(3, 0) = 0.7;
    ip(1, 3) = -0.4;
    ip(3, 1) = -0.4;
    ip(0, 0) = 1.1;
    ip(2, 2) = -0.8;

    const auto ops = lindblad_ops_from_projected(eps, ip, 1e-3);

    SECTION("L_w = L_{-w}^dagger for every returned pair") {
        for (const auto& op : ops) {
            bool found = false;
            for (const auto& other : ops) {
                if (std::abs(other.omega_ghz + op.omega_ghz) < 1e-12) {
                    found = true;
                    CHECK((other.l - op.l.adjoint().eval()).cwiseAbs().maxCoeff() < 1e-14);
                }
            }
            CHECK(found);
        }
    }

    SECTION("completeness: sum of all L_w reconstructs Ip in the eigenbasis") {
        Matrix sum = Matrix::Zero(4, 4);
        for (const auto& op : ops) sum += op.l;
        CHECK((sum - ip).cwiseAbs().maxCoeff() < 1e-10);
    }

    SECTION("exactly degenerate pair lands in the omega = 0 bin") {
        for (const auto& op : ops) {
            if (op.omega_ghz == 0.0) {
                CHECK(std::abs(op.l(1, 2)) == Approx(0.2));
                CHECK(std::abs(op.l(0, 0)) == Approx(1.1));
            }
        }
    }

    SECTION("near-degenerate frequencies merge within the tolerance") {
        Eigen::VectorXd e2(3);
        e2 << 0.0, 1.0, 1.0004;  // omega_01 and omega_02 within 1e-3
        Matrix ip2 = Matrix::Identity(3, 3);
        ip2(0, 1) = ip2(1, 0) = 0.5;
        ip2(0, 2) = ip2(2, 0) = 0.5;
        const auto merged = lindblad_ops_from_projected(e2, ip2, 1e-3);
        int positive_bins = 0;
        for (const auto& op : merged)
            if (op.omega_ghz > 0) ++positive_bins;
        CHECK(positive_bins == 1);
    }
}

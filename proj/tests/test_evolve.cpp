#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "csfq/evolve.hpp"
#include "csfq/ising.hpp"

using namespace csfq;
using Catch::Approx;

namespace {
constexpr double pi = std::numbers::pi;

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

AnnealPath crossing_path(double z0, double t_f, double idle = 0.0) {
    PathSpec s;
    s.start = {3 * pi, z0};
    s.end = {2 * pi, z0};
    s.tilt_amplitude_rad = 0.326 * pi;
    s.t_f_ns = t_f;
    s.idle_after_ns = idle;
    return make_linear_path(s);
}

}  // namespace

TEST_CASE("static Hamiltonian: populations constant") {
    Matrix h(2, 2);
    h << 1.0, 0.25, 0.25, -0.3;
    auto frames = matrix_frame_fn([&](double) { return h; }, nullptr, 2);
    SolverConfig cfg;
    cfg.levels = 2;
    const auto res = evolve_schrodinger(frames, 25.0, cfg);
    for (size_t i = 0; i < res.times_ns.size(); ++i) {
        CHECK(res.populations(i, 0) == Approx(1.0).margin(1e-8));
        CHECK(res.populations(i, 1) == Approx(0.0).margin(1e-8));
    }
    CHECK(res.norm_drift < 1e-8);
}

TEST_CASE("Landau-Zener sweep matches the analytic formula") {
    // H = A sigma_x + B(t) sigma_z, B swept linearly from +B0 to -B0.
    // Diabatic probability: P = exp(-2 pi^2 A^2 / |dB/dt|) (A, B in GHz).
    const double b0 = 5.0, t_f = 20.0;
    const double rate = 2.0 * b0 / t_f;
    const double a = std::sqrt(std::log(2.0) * rate / (2.0 * pi * pi));  // P ~ 0.5

    auto h_of_t = [&](double t) {
        return (a * pauli_x() + b0 * (1.0 - 2.0 * t / t_f) * pauli_z()).eval();
    };
    auto frames = matrix_frame_fn(h_of_t, nullptr, 2);
    SolverConfig cfg;
    cfg.levels = 2;
    cfg.max_step_ns = 0.25;
    const auto res = evolve_schrodinger(frames, t_f, cfg);

    const double p_excited = res.populations(res.populations.rows() - 1, 1);
    const double p_lz = std::exp(-2.0 * pi * pi * a * a / rate);
    CHECK(p_lz == Approx(0.5).margin(1e-12));
    CHECK(p_excited == Approx(p_lz).margin(0.005));
    CHECK(res.norm_drift < 1e-8);
}

TEST_CASE("norm preserved over a 60 ns circuit anneal") {
    CircuitParams p = table_s1_1d();
    const auto path = crossing_path(-0.326 * pi + 0.01, 60.0);
    SolverConfig cfg;
    cfg.levels = 6;
    cfg.output_points = 61;
    const auto res = evolve_schrodinger(p, path, Model::OneD, cfg);
    CHECK(res.norm_drift < 1e-8);
    // populations sum to 1 at every output step
    for (size_t i = 0; i < res.times_ns.size(); ++i)
        CHECK(res.populations.row(i).sum() == Approx(1.0).margin(1e-6));
}

TEST_CASE("AME with eta_g2 = 0 matches the closed system") {
    CircuitParams p = table_s1_1d();
    const auto path = crossing_path(-0.326 * pi + 0.008, 60.0);
    SolverConfig cfg;
    cfg.levels = 5;
    cfg.output_points = 31;

    BathParams bath;
    bath.eta_g2 = 0.0;

    const auto closed = evolve_schrodinger(p, path, Model::OneD, cfg);
    const auto open = evolve_ame(p, path, Model::OneD, bath, cfg);

    REQUIRE(closed.times_ns.size() == open.times_ns.size());
    double max_dev = 0.0;
    for (size_t i = 0; i < closed.times_ns.size(); ++i)
        for (int k = 0; k < cfg.levels; ++k)
            max_dev = std::max(max_dev,
                               std::abs(closed.populations(i, k) - open.populations(i, k)));
    CHECK(max_dev < 1e-6);
    CHECK(open.max_trace_dev < 1e-9);
}

TEST_CASE("AME relaxes a static system to the Gibbs state") {
    CircuitParams p = table_s1_1d();
    const double phix = 1.5 * pi;
    const FluxPoint flux{phix, phi_d(p, phix)};

    PathSpec s;
    s.start = s.end = flux;
    s.t_f_ns = 40.0;
    s.samples_per_anneal = 3;
    const auto path = make_linear_path(s);

    SolverConfig cfg;
    cfg.levels = 5;
    cfg.output_points = 21;
    BathParams bath;  // 10 mK, eta g^2 = 3e-6

    const auto res = evolve_ame(p, path, Model::OneD, bath, cfg);

    // Gibbs populations from the spectrum at this flux point
    const double beta = thermal_beta_ns(bath.temperature_mk);
    Eigen::VectorXd gibbs(cfg.levels);
    for (int k = 0; k < cfg.levels; ++k)
        gibbs(k) = std::exp(-beta * ghz_to_angular(res.eps_final(k) - res.eps_final(0)));
    gibbs /= gibbs.sum();

    Matrix diff = res.rho_final.rho;
    for (int k = 0; k < cfg.levels; ++k) diff(k, k) -= gibbs(k);
    Eigen::SelfAdjointEigenSolver<Matrix> es(diff);
    const double trace_dist = 0.5 * es.eigenvalues().cwiseAbs().sum();
    CHECK(trace_dist < 1e-3);

    CHECK(res.max_trace_dev < 1e-9);
    CHECK(res.min_rho_eigenvalue > -1e-6);
}

TEST_CASE("AME detects an invalid solver config") {
    SolverConfig cfg;
    cfg.levels = 1;
    Matrix h = pauli_z();
    auto frames = matrix_frame_fn([&](double) { return h; }, nullptr, 2);
    BathParams bath;
    CHECK_THROWS_AS(evolve_ame(frames, 1.0, bath, cfg), config_error);
}

TEST_CASE("density matrix validation") {
    DensityMatrix rho;
    rho.rho = Matrix::Zero(2, 2);
    rho.rho(0, 0) = 0.7;
    rho.rho(1, 1) = 0.3;
    CHECK_NOTHROW(rho.validate());

    rho.rho(1, 1) = 0.5;  // trace 1.2
    CHECK_THROWS_AS(rho.validate(), numerical_error);

    rho.rho(0, 0) = 1.1;
    rho.rho(1, 1) = -0.1;  // negative eigenvalue
    CHECK_THROWS_AS(rho.validate(), numerical_error);
}

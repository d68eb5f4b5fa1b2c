#pragma once

#include <cmath>
#include <vector>

#include "csfq/circuit.hpp"
#include "csfq/operators.hpp"
#include "csfq/path.hpp"

namespace csfq {

// Transverse/longitudinal Ising schedule coefficients of the two-level
// reduction, H_eff = A sigma_x + B sigma_z + alpha_I.
struct IsingCoefficients {
    double a_ghz = 0.0;        // A >= 0
    double b_ghz = 0.0;        // sign(B) = sign(phi_z - phi_d), offsets included
    double alpha_i_ghz = 0.0;  // identity offset (E_g + E_e)/2
    FluxPoint flux;
    bool valid = true;  // both eigenstates have >= 1% weight in each well
};

// Computational (persistent-current) basis expressed in the circuit
// eigenbasis {|g>, |e>}. Column 0 is |0> (lower current), column 1 is |1>.
struct ComputationalBasis {
    Eigen::Matrix2cd u;
    double current_0_na = 0.0;
    double current_1_na = 0.0;
};

// Persistent-current operator in the low-energy subspace:
// [[<g|Ip|g>, <g|Ip|e>], [<e|Ip|g>, <e|Ip|e>]].
inline Eigen::Matrix2cd project_ip_low(const Spectrum& spectrum, const OperatorMatrix& ip) {
    if (spectrum.levels() < 2)
        throw config_error("project_ip_low: need at least two levels");
    if (!(spectrum.basis == ip.basis))
        throw config_error("project_ip_low: spectrum and operator bases differ");
    const auto v = spectrum.vectors.leftCols(2);
    Eigen::Matrix2cd out = v.adjoint() * ip.m * v;
    return 0.5 * (out + out.adjoint()).eval();  // strip roundoff anti-Hermitian part
}

struct IsingDecomposition {
    IsingCoefficients coeffs;
    ComputationalBasis basis;
};

inline constexpr double kDegenerateProjectionTolNa = 1e-6;

// Diagonalize Ip_low, rotate H_low = diag(E_g, E_e) into the current basis
// and read off the Ising coefficients under the constraint convention:
// alpha_y = 0, A >= 0 (both automatic for A = |H01|), and the computational
// basis ordered by current eigenvalue ascending, which realizes
// sign(B) = sign(phi_z - phi_d) continuously through the degeneracy point.
inline IsingDecomposition ising_decompose(const Spectrum& spectrum, const OperatorMatrix& ip) {
    const Eigen::Matrix2cd ip_low = project_ip_low(spectrum, ip);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(ip_low);
    const double i0 = es.eigenvalues()(0), i1 = es.eigenvalues()(1);
    if (std::abs(i1 - i0) < kDegenerateProjectionTolNa)
        throw DegenerateProjection(
            "ising_decompose: persistent-current projection is degenerate; "
            "computational basis undefined at this flux point");

    const Eigen::Matrix2cd u = es.eigenvectors();
    Eigen::Matrix2cd h_low = Eigen::Matrix2cd::Zero();
    h_low(0, 0) = spectrum.values(0);
    h_low(1, 1) = spectrum.values(1);
    const Eigen::Matrix2cd h_eff = u.adjoint() * h_low * u;

    IsingDecomposition out;
    out.coeffs.a_ghz = std::abs(h_eff(0, 1));
    out.coeffs.b_ghz = 0.5 * std::real(h_eff(0, 0) - h_eff(1, 1));
    out.coeffs.alpha_i_ghz = 0.5 * std::real(h_eff(0, 0) + h_eff(1, 1));
    out.basis.u = u;
    out.basis.current_0_na = i0;
    out.basis.current_1_na = i1;
    return out;
}

// Probability weight of a state on the positive-current side; the two wells
// are identified with the sign of the persistent current.
inline double right_well_weight(const Eigen::VectorXcd& state, const Spectrum& ip_spectrum) {
    double w = 0.0;
    for (int i = 0; i < ip_spectrum.levels(); ++i)
        if (ip_spectrum.values(i) > 0.0)
            w += std::norm(Complex(ip_spectrum.vectors.col(i).dot(state)));
    return w;
}

inline constexpr double kWellSupportThreshold = 0.01;

inline IsingCoefficients ising_coefficients(const CircuitParams& p, FluxPoint flux,
                                            Model model = Model::OneD,
                                            const TruncationConfig& tc = {}) {
    const auto h = build_hamiltonian(p, flux, model, tc.n_1d, tc.n0_2d, tc.n1_2d);
    const auto ip = persistent_current_op(p, flux, model, h.basis);
    const auto spec = eigensolve(h, 2);

    auto dec = ising_decompose(spec, ip);
    dec.coeffs.flux = flux;

    // Two-level validity: both eigenstates need >= 1% weight in each well.
    OperatorMatrix ip_op = ip;
    const auto ip_spec = eigensolve(ip_op, ip_op.dim());
    dec.coeffs.valid = true;
    for (int k = 0; k < 2; ++k) {
        const double w = right_well_weight(spec.vectors.col(k), ip_spec);
        if (std::min(w, 1.0 - w) < kWellSupportThreshold) dec.coeffs.valid = false;
    }
    return dec.coeffs;
}

struct SchedulePoint {
    double s = 0.0;  // normalized anneal time t/t_f
    IsingCoefficients coeffs;
};

// A(s), B(s) along the anneal portion of a path (idle samples excluded).
// Points where the two-level reduction fails are flagged, not fatal.
inline std::vector<SchedulePoint> schedule_along_path(const CircuitParams& p,
                                                      const AnnealPath& path,
                                                      Model model = Model::OneD,
                                                      const TruncationConfig& tc = {},
                                                      int n_points = 101) {
    if (n_points < 2) throw config_error("schedule_along_path: need >= 2 points");
    std::vector<SchedulePoint> out;
    out.reserve(n_points);
    const double t_f = path.spec.t_f_ns;
    for (int i = 0; i < n_points; ++i) {
        const double s = double(i) / (n_points - 1);
        const FluxPoint f = sample(path, s * t_f);
        SchedulePoint pt;
        pt.s = s;
        try {
            pt.coeffs = ising_coefficients(p, f, model, tc);
        } catch (const DegenerateProjection&) {
            pt.coeffs.flux = f;
            pt.coeffs.valid = false;
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace csfq

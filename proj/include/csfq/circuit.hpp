#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "csfq/constants.hpp"
#include "csfq/operators.hpp"
#include "csfq/params.hpp"

namespace csfq {

// Asymmetry-induced tilt shift, tan(phi_d) = d tan(phi_x/2). Principal
// arctan branch: continuous on each open interval ((2k-1)pi, (2k+1)pi);
// at phi_x = (2k+1)pi exactly the limit is taken as sign(d) pi/2.
inline double phi_d(const CircuitParams& p, double phi_x) {
    const double t = std::tan(0.5 * phi_x);
    if (std::isinf(t)) return std::copysign(std::numbers::pi / 2.0, p.d);
    return std::atan(p.d * t);
}

// Signed rescaling cos(phi_x/2) sqrt(1 + tan^2(phi_d)) of the total x-loop
// current, computed through the singularity-free equivalent
// sign(cos(phi_x/2)) sqrt(cos^2(phi_x/2) + d^2 sin^2(phi_x/2)).
// At cos(phi_x/2) == 0 exactly the sign is taken from sign(d), matching the
// one-sided limit convention used by phi_d.
inline double effective_x_factor(const CircuitParams& p, double phi_x) {
    const double c = std::cos(0.5 * phi_x);
    const double s = std::sin(0.5 * phi_x);
    const double mag = std::sqrt(c * c + p.d * p.d * s * s);
    if (c == 0.0) return std::copysign(mag, p.d);
    return std::copysign(mag, c);
}

namespace detail {

struct EffectiveFlux {
    double phi_x;
    double phi_z;
    double phi_d;
    double x_factor;
};

// Constant flux offsets are added to the applied biases before every
// model evaluation.
inline EffectiveFlux effective_flux(const CircuitParams& p, FluxPoint flux) {
    EffectiveFlux f;
    f.phi_x = flux.phi_x + p.phi_x_offset;
    f.phi_z = flux.phi_z + p.phi_z_offset;
    f.phi_d = phi_d(p, f.phi_x);
    f.x_factor = effective_x_factor(p, f.phi_x);
    return f;
}

// Emit the nonzero elements of an operator: diagonal entries once, each
// off-diagonal pair once as (row > col, value); consumers add the conjugate.
template <class F>
void h_1d_elements(const CircuitParams& p, const EffectiveFlux& f, int n_trunc, F&& emit) {
    const double ej = josephson_energy_ghz(p.I_z_nA);
    const double kin = 0.5 * single_electron_charging_ghz(p.C_sh_fF);
    const int dim = 2 * n_trunc + 1;
    const Complex hop1 = -2.0 * ej * 0.5 * std::exp(Complex(0.0, -0.5 * f.phi_z));
    const Complex hop2 =
        -2.0 * p.alpha * ej * f.x_factor * 0.5 * std::exp(Complex(0.0, -f.phi_d));
    for (int i = 0; i < dim; ++i) {
        const double n = i - n_trunc;
        emit(i, i, Complex(kin * n * n, 0.0));
        if (i + 1 < dim) emit(i + 1, i, hop1);
        if (i + 2 < dim) emit(i + 2, i, hop2);
    }
}

template <class F>
void h_2d_elements(const CircuitParams& p, const EffectiveFlux& f, const Charge2DLayout& lay,
                   F&& emit) {
    const double ej = josephson_energy_ghz(p.I_z_nA);
    const double kin0 = single_electron_charging_ghz(p.C_z_fF);
    const double kin1 =
        single_electron_charging_ghz(2.0 * p.C_sh_fF + (4.0 * p.alpha + 1.0) * p.C_z_fF);
    const Complex hop11_p = -2.0 * ej * 0.25 * std::exp(Complex(0.0, -0.5 * f.phi_z));
    const Complex hop2 =
        -2.0 * p.alpha * ej * f.x_factor * 0.5 * std::exp(Complex(0.0, -f.phi_d));

    // each unordered pair emitted once, from its lower-q1 member; the
    // s1 = -1 elements are the conjugates the consumer adds back
    const int dim = static_cast<int>(lay.states.size());
    for (int row = 0; row < dim; ++row) {
        const auto [q0, q1] = lay.states[row];
        emit(row, row, Complex(kin0 * double(q0) * q0 + kin1 * double(q1) * q1, 0.0));
        for (int s0 : {-1, 1}) {
            const int col = lay.at(q0 + s0, q1 + 1);
            if (col >= 0) emit(col, row, hop11_p);
        }
        const int col2 = lay.at(q0, q1 + 2);
        if (col2 >= 0) emit(col2, row, hop2);
    }
}

template <class F>
void ip_1d_elements(const CircuitParams& p, const EffectiveFlux& f, int n_trunc, F&& emit) {
    const int dim = 2 * n_trunc + 1;
    const Complex up = p.I_z_nA * Complex(0.0, -0.5) * std::exp(Complex(0.0, -0.5 * f.phi_z));
    for (int i = 0; i + 1 < dim; ++i) emit(i + 1, i, up);
}

template <class F>
void ip_2d_elements(const CircuitParams& p, const EffectiveFlux& f, const Charge2DLayout& lay,
                    F&& emit) {
    const int dim = static_cast<int>(lay.states.size());
    for (int row = 0; row < dim; ++row) {
        const auto [q0, q1] = lay.states[row];
        for (int s0 : {-1, 1}) {
            const int col = lay.at(q0 + s0, q1 + 1);
            if (col < 0) continue;
            const Complex el = p.I_z_nA * 0.5 * Complex(0.0, -0.5) *
                               std::exp(Complex(0.0, -0.5 * f.phi_z));
            emit(col, row, el);
        }
    }
}

}  // namespace detail

struct TruncationConfig {
    int n_1d = 30;
    int n0_2d = 10;
    int n1_2d = 20;
};

// 1D CSFQ Hamiltonian in the truncated charge basis n in [-N, N], in GHz:
//   H = e^2/(2 C_sh) n^2 - 2 E_J cos(phi - phi_z/2)
//       - 2 alpha E_J f(phi_x) cos(2 phi - phi_d)
// cos(phi - a) couples n -> n+1 with element e^{-ia}/2;
// cos(2 phi - a) couples n -> n+2 with element e^{-ia}/2.
inline OperatorMatrix build_h_1d(const CircuitParams& p, FluxPoint flux, int n_trunc = 30) {
    p.validate(Model::OneD);
    if (n_trunc < 5) throw config_error("build_h_1d: truncation N must be >= 5");

    const auto f = detail::effective_flux(p, flux);
    const int dim = 2 * n_trunc + 1;
    OperatorMatrix op;
    op.basis = charge_basis_1d(n_trunc);
    op.unit = OpUnit::GHz;
    op.m = Matrix::Zero(dim, dim);
    detail::h_1d_elements(p, f, n_trunc, [&](int r, int c, Complex v) {
        op.m(r, c) += v;
        if (r != c) op.m(c, r) += std::conj(v);
    });
    return op;
}

// 2D CSFQ Hamiltonian in the transformed coordinates, truncated physical
// charge basis (n0', n1') in [-N0, N0] x [-N1, N1] with n0' == n1' (mod 2),
// in GHz:
//   H = e^2/C_z n0'^2 + e^2/(2 C_sh + (4 alpha + 1) C_z) n1'^2
//       - 2 E_J cos(phi0') cos(phi1' - phi_z/2)
//       - 2 alpha E_J f(phi_x) cos(2 phi1' - phi_d)
inline OperatorMatrix build_h_2d(const CircuitParams& p, FluxPoint flux, int n0_trunc = 10,
                                 int n1_trunc = 20) {
    p.validate(Model::TwoD);
    if (n0_trunc < 4 || n1_trunc < 4)
        throw config_error("build_h_2d: truncations must be >= 4");

    const auto f = detail::effective_flux(p, flux);
    const auto lay = charge_2d_layout(n0_trunc, n1_trunc);
    const int dim = static_cast<int>(lay.states.size());
    OperatorMatrix op;
    op.basis = charge_basis_2d(n0_trunc, n1_trunc);
    op.unit = OpUnit::GHz;
    op.m = Matrix::Zero(dim, dim);
    detail::h_2d_elements(p, f, lay, [&](int r, int c, Complex v) {
        op.m(r, c) += v;
        if (r != c) op.m(c, r) += std::conj(v);
    });
    return op;
}

using SparseMatrixC = Eigen::SparseMatrix<Complex>;

// Sparse Hamiltonian and coupling builders for the propagators, which only
// ever apply these operators to thin blocks of vectors.
inline SparseMatrixC build_hamiltonian_sparse(const CircuitParams& p, FluxPoint flux,
                                              Model model, const TruncationConfig& tc = {}) {
    p.validate(model);
    const auto f = detail::effective_flux(p, flux);
    std::vector<Eigen::Triplet<Complex>> trip;
    int dim = 0;
    auto add = [&](int r, int c, Complex v) {
        trip.emplace_back(r, c, v);
        if (r != c) trip.emplace_back(c, r, std::conj(v));
    };
    if (model == Model::OneD) {
        if (tc.n_1d < 5) throw config_error("build_hamiltonian_sparse: N must be >= 5");
        dim = 2 * tc.n_1d + 1;
        trip.reserve(static_cast<size_t>(dim) * 5);
        detail::h_1d_elements(p, f, tc.n_1d, add);
    } else {
        if (tc.n0_2d < 4 || tc.n1_2d < 4)
            throw config_error("build_hamiltonian_sparse: truncations must be >= 4");
        const auto lay = charge_2d_layout(tc.n0_2d, tc.n1_2d);
        dim = static_cast<int>(lay.states.size());
        trip.reserve(static_cast<size_t>(dim) * 7);
        detail::h_2d_elements(p, f, lay, add);
    }
    SparseMatrixC h(dim, dim);
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

inline SparseMatrixC persistent_current_sparse(const CircuitParams& p, FluxPoint flux,
                                               Model model, const TruncationConfig& tc = {}) {
    p.validate(model);
    const auto f = detail::effective_flux(p, flux);
    std::vector<Eigen::Triplet<Complex>> trip;
    int dim = 0;
    auto add = [&](int r, int c, Complex v) {
        trip.emplace_back(r, c, v);
        if (r != c) trip.emplace_back(c, r, std::conj(v));
    };
    if (model == Model::OneD) {
        dim = 2 * tc.n_1d + 1;
        detail::ip_1d_elements(p, f, tc.n_1d, add);
    } else {
        const auto lay = charge_2d_layout(tc.n0_2d, tc.n1_2d);
        dim = static_cast<int>(lay.states.size());
        detail::ip_2d_elements(p, f, lay, add);
    }
    SparseMatrixC ip(dim, dim);
    ip.setFromTriplets(trip.begin(), trip.end());
    return ip;
}

inline OperatorMatrix build_hamiltonian(const CircuitParams& p, FluxPoint flux, Model model,
                                        int n_trunc = 30, int n0_trunc = 10, int n1_trunc = 20) {
    return model == Model::OneD ? build_h_1d(p, flux, n_trunc)
                                : build_h_2d(p, flux, n0_trunc, n1_trunc);
}

// Persistent-current operator I_p = -dU/dphi_z, expressed in nA (divide by
// Phi0/2pi to turn the energy-per-phase form into a circulating current):
//   1D: I_z sin(phi - phi_z/2)
//   2D: I_z cos(phi0') sin(phi1' - phi_z/2)
// sin(phi - a) couples n -> n+1 with element -i e^{-ia}/2.
inline OperatorMatrix persistent_current_op(const CircuitParams& p, FluxPoint flux,
                                            Model model, const BasisDesc& basis) {
    p.validate(model);
    const auto f = detail::effective_flux(p, flux);

    OperatorMatrix op;
    op.basis = basis;
    op.unit = OpUnit::nA;
    const int dim = basis.dim();
    op.m = Matrix::Zero(dim, dim);
    auto add = [&](int r, int c, Complex v) {
        op.m(r, c) += v;
        if (r != c) op.m(c, r) += std::conj(v);
    };
    if (model == Model::OneD) {
        if (basis.kind != BasisKind::Charge1D)
            throw config_error("persistent_current_op: basis does not match 1D model");
        detail::ip_1d_elements(p, f, basis.n, add);
    } else {
        if (basis.kind != BasisKind::Charge2D)
            throw config_error("persistent_current_op: basis does not match 2D model");
        const auto lay = charge_2d_layout(basis.n0, basis.n1);
        detail::ip_2d_elements(p, f, lay, add);
    }
    return op;
}

// omega_ij = eps_j - eps_i in GHz.
inline double transition_frequency(const CircuitParams& p, FluxPoint flux, Model model,
                                   int i, int j, const TruncationConfig& tc = {}) {
    if (i > j || i < 0) throw config_error("transition_frequency: require 0 <= i <= j");
    if (i == j) return 0.0;
    const auto h = build_hamiltonian(p, flux, model, tc.n_1d, tc.n0_2d, tc.n1_2d);
    const auto spec = eigensolve(h, j + 1);
    return spec.values(j) - spec.values(i);
}

struct GapMap {
    std::vector<double> phi_x;                 // grid along x
    std::vector<double> phi_z;                 // grid along z
    std::vector<std::vector<double>> omega01;  // [ix][iz], GHz
};

// Golden-section minimizer for smooth 1D minima.
inline double golden_section_min(const std::function<double(double)>& f, double a, double b,
                                 double tol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (std::abs(b - a) > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline GapMap gap_map(const CircuitParams& p, double phi_x_min, double phi_x_max,
                      double phi_z_min, double phi_z_max, int nx, int nz,
                      Model model = Model::OneD, const TruncationConfig& tc = {}) {
    if (nx < 2 || nz < 2) throw config_error("gap_map: resolution must be >= 2 per axis");
    if (!(phi_x_max > phi_x_min) || !(phi_z_max > phi_z_min))
        throw config_error("gap_map: empty range");
    GapMap g;
    g.phi_x.resize(nx);
    g.phi_z.resize(nz);
    g.omega01.assign(nx, std::vector<double>(nz, 0.0));
    for (int ix = 0; ix < nx; ++ix)
        g.phi_x[ix] = phi_x_min + (phi_x_max - phi_x_min) * ix / (nx - 1);
    for (int iz = 0; iz < nz; ++iz)
        g.phi_z[iz] = phi_z_min + (phi_z_max - phi_z_min) * iz / (nz - 1);
    for (int ix = 0; ix < nx; ++ix)
        for (int iz = 0; iz < nz; ++iz)
            g.omega01[ix][iz] =
                transition_frequency(p, {g.phi_x[ix], g.phi_z[iz]}, model, 0, 1, tc);
    return g;
}

// Location of the minimum gap along phi_z at fixed phi_x, refined from a
// coarse bracket by golden-section search.
inline double refine_min_gap_phi_z(const CircuitParams& p, double phi_x, double phi_z_lo,
                                   double phi_z_hi, Model model = Model::OneD,
                                   const TruncationConfig& tc = {}, double tol = 1e-5) {
    auto gap = [&](double z) { return transition_frequency(p, {phi_x, z}, model, 0, 1, tc); };
    const int coarse = 17;
    double best_z = phi_z_lo, best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < coarse; ++i) {
        const double z = phi_z_lo + (phi_z_hi - phi_z_lo) * i / (coarse - 1);
        const double w = gap(z);
        if (w < best) {
            best = w;
            best_z = z;
        }
    }
    const double h = (phi_z_hi - phi_z_lo) / (coarse - 1);
    return golden_section_min(gap, best_z - h, best_z + h, tol);
}

}  // namespace csfq

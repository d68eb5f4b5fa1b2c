#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "csfq/bath.hpp"
#include "csfq/circuit.hpp"
#include "csfq/errors.hpp"
#include "csfq/lindblad.hpp"
#include "csfq/operators.hpp"
#include "csfq/path.hpp"

namespace csfq {

struct SolverConfig {
    int levels = 10;           // K retained eigenlevels
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step_ns = 1.0;
    double min_step_ns = 1e-7;
    double positivity_tol = 1e-6;
    int output_points = 201;

    void validate() const {
        if (levels < 2) throw config_error("SolverConfig: levels must be >= 2");
        if (!(rel_tol > 0) || !(abs_tol > 0))
            throw config_error("SolverConfig: tolerances must be > 0");
        if (output_points < 2) throw config_error("SolverConfig: output_points must be >= 2");
    }
};

// Instantaneous eigendata of the truncated system at one time: the K lowest
// eigenvalues (GHz), their eigenvectors as columns in the full basis, and
// the system-bath coupling operator projected into that eigenbasis (nA).
struct Frame {
    Eigen::VectorXd eps;
    Matrix basis;
    Matrix ip;
};

using FrameFn = std::function<Frame(double t_ns)>;

// Open- or closed-system density matrix in a declared basis.
struct DensityMatrix {
    Matrix rho;
    std::string basis_tag = "instantaneous-eigenbasis";

    void validate(double trace_tol = 1e-9, double positivity_tol = 1e-8) const {
        if (hermiticity_defect(rho) > 1e-10)
            throw numerical_error("DensityMatrix: not Hermitian");
        if (std::abs(std::real(rho.trace()) - 1.0) > trace_tol)
            throw numerical_error("DensityMatrix: trace deviates from 1");
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
        if (es.eigenvalues().minCoeff() < -positivity_tol)
            throw numerical_error("DensityMatrix: negative eigenvalue beyond tolerance");
    }
};

struct EvolutionResult {
    std::vector<double> times_ns;
    Eigen::MatrixXd populations;  // output index x level, instantaneous eigenbasis
    DensityMatrix rho_final;      // K x K in the final instantaneous eigenbasis
    Eigen::VectorXd eps_final;    // GHz
    Matrix basis_final;           // full-basis eigenvectors of the final frame
    Matrix ip_final;              // coupling/persistent current in the final eigenbasis (nA)
    double max_trace_dev = 0.0;
    double min_rho_eigenvalue = 0.0;
    double max_transport_defect = 0.0;  // worst subspace-overlap singular value deviation
    double norm_drift = 0.0;            // closed-system only
    size_t accepted_steps = 0;
    size_t rejected_steps = 0;
};

namespace detail {

// Closest unitary to a square matrix (polar factor); the singular values'
// deviation from 1 measures how much of the evolved subspace leaks outside
// the span of the target frame.
inline Matrix unitarize(const Matrix& o, double* defect = nullptr) {
    Eigen::JacobiSVD<Matrix> svd(o, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (defect) {
        double dev = 0.0;
        for (int i = 0; i < svd.singularValues().size(); ++i)
            dev = std::max(dev, std::abs(svd.singularValues()(i) - 1.0));
        *defect = dev;
    }
    return svd.matrixU() * svd.matrixV().adjoint();
}

inline Matrix transport(const Frame& to, const Frame& from, double* defect = nullptr) {
    return unitarize(to.basis.adjoint() * from.basis, defect);
}

// exp(-i H_ang h) for Hermitian H_ang (rad/ns).
inline Matrix hermitian_propagator(const Matrix& h_ang, double h_ns) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h_ang);
    Vector phases(es.eigenvalues().size());
    for (int i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(Complex(0.0, -es.eigenvalues()(i) * h_ns));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Cubic Catmull-Rom table for the Lamb-shift integral over the Bohr
// frequency range of an evolution; exact lamb_shift_S is used to fill it.
struct LambShiftTable {
    double w_min = 0.0, dw = 1.0;
    std::vector<double> values;

    double operator()(double w_ghz) const {
        const double x = (w_ghz - w_min) / dw;
        const long n = static_cast<long>(values.size());
        long i = static_cast<long>(std::floor(x));
        i = std::max(1L, std::min(n - 3, i));
        const double t = x - i;
        const double p0 = values[i - 1], p1 = values[i], p2 = values[i + 1],
                     p3 = values[i + 2];
        return p1 + 0.5 * t * (p2 - p0 +
                               t * (2 * p0 - 5 * p1 + 4 * p2 - p3 +
                                    t * (3 * (p1 - p2) + p3 - p0)));
    }
};

inline LambShiftTable build_lamb_shift_table(const BathParams& bath, double w_max_ghz,
                                             int n_points = 2049) {
    LambShiftTable tab;
    const double span = std::max(w_max_ghz, 1.0) * 1.3 + 5.0;
    tab.w_min = -span;
    tab.dw = 2.0 * span / (n_points - 1);
    tab.values.resize(n_points);
    for (int i = 0; i < n_points; ++i)
        tab.values[i] = lamb_shift_S(bath, tab.w_min + i * tab.dw);
    return tab;
}

struct AmeGenerator {
    std::vector<double> rates;
    std::vector<Matrix> jump_ops;   // L_w
    std::vector<Matrix> jump_sq;    // L_w^dag L_w
    Matrix h_ang;                   // 2 pi (diag(eps - eps0) + H_LS), rad/ns

    Matrix dissipator(const Matrix& rho) const {
        Matrix out = Matrix::Zero(rho.rows(), rho.cols());
        for (size_t r = 0; r < rates.size(); ++r) {
            if (rates[r] == 0.0) continue;
            const Matrix lr = jump_ops[r] * rho;
            out += rates[r] * (lr * jump_ops[r].adjoint() -
                               0.5 * (jump_sq[r] * rho + rho * jump_sq[r]));
        }
        return out;
    }

    // second-order Taylor of exp(h D); D annihilates the trace at every
    // order, so the trace is preserved exactly.
    Matrix dissipative_kick(const Matrix& rho, double h) const {
        if (rates.empty()) return rho;
        const Matrix d1 = dissipator(rho);
        const Matrix d2 = dissipator(d1);
        return rho + h * d1 + 0.5 * h * h * d2;
    }
};

inline AmeGenerator build_ame_generator(const Frame& f, const BathParams& bath,
                                        const LambShiftTable* ls_table) {
    AmeGenerator g;
    const auto ops = lindblad_ops_from_projected(f.eps, f.ip, bath.bohr_bin_tol_ghz);
    const int k = static_cast<int>(f.eps.size());
    Matrix h_ls = Matrix::Zero(k, k);
    g.rates.reserve(ops.size());
    for (const auto& op : ops) {
        g.rates.push_back(bath_gamma(bath, op.omega_ghz));
        g.jump_ops.push_back(op.l);
        g.jump_sq.push_back(op.l.adjoint() * op.l);
        if (bath.lamb_shift && ls_table)
            h_ls += (*ls_table)(op.omega_ghz) * g.jump_sq.back();
    }
    Eigen::VectorXd shifted = f.eps.array() - f.eps(0);
    g.h_ang = two_pi * (Matrix(shifted.cast<Complex>().asDiagonal()) + h_ls);
    return g;
}

}  // namespace detail

namespace detail {

// Eigen-frame provider along a path. Consecutive requests differ by small
// time increments, so the lowest-K eigenspace is tracked with a warm-started
// block Rayleigh-Ritz refinement (guard levels included); residuals are
// verified against the operator norm every call and anything unconverged
// falls back to a dense solve. The first call is always dense.
class FrameTracker {
  public:
    FrameTracker(CircuitParams p, AnnealPath path, Model model, int levels,
                 TruncationConfig tc)
        : p_(std::move(p)), path_(std::move(path)), model_(model), levels_(levels), tc_(tc) {
        if (levels_ < 2) throw config_error("FrameTracker: levels must be >= 2");
    }

    Frame operator()(double t_ns) {
        const FluxPoint flux = sample(path_, t_ns);
        const SparseMatrixC h = build_hamiltonian_sparse(p_, flux, model_, tc_);
        const int dim = static_cast<int>(h.rows());
        if (levels_ > dim) throw config_error("FrameTracker: levels exceed basis dimension");
        const int m = std::min(dim, levels_ + 4);
        norm_scale_ = infinity_norm(h);

        if (!(warm_ && block_.rows() == dim && refine(h, m))) dense_solve(h, m);
        warm_ = true;

        Frame f;
        f.eps = ritz_.head(levels_);
        Matrix v = block_.leftCols(levels_);
        fix_eigenvector_phases(v);
        f.basis = v;
        const SparseMatrixC ip = persistent_current_sparse(p_, flux, model_, tc_);
        f.ip = v.adjoint() * (ip * v);
        f.ip = (0.5 * (f.ip + f.ip.adjoint())).eval();
        return f;
    }

    size_t dense_solves = 0;

  private:
    static double infinity_norm(const SparseMatrixC& h) {
        double mx = 0.0;
        Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(h.rows());
        for (int k = 0; k < h.outerSize(); ++k)
            for (SparseMatrixC::InnerIterator it(h, k); it; ++it)
                row_sum(it.row()) += std::abs(it.value());
        for (int i = 0; i < row_sum.size(); ++i) mx = std::max(mx, row_sum(i));
        return mx;
    }

    bool refine(const SparseMatrixC& h, int m) {
        // Residual tolerance 1e-8 ||H||: eigenvalue error ~ resid^2 / gap and
        // subspace error ~ resid / gap are then far below the propagator's
        // own step error.
        const double tol = 1e-8 * norm_scale_;
        const int dim = static_cast<int>(h.rows());
        const int cap = std::min(dim, 4 * m);
        Matrix w = block_;
        for (int iter = 0; iter < 8; ++iter) {
            const Matrix hw = h * w;
            const Matrix t = w.adjoint() * hw;
            Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (t + t.adjoint()));
            if (es.info() != Eigen::Success) return false;
            const Matrix s = es.eigenvectors().leftCols(m);
            Matrix v = w * s;
            const Matrix hv = hw * s;

            double max_resid = 0.0;
            for (int k = 0; k < std::min(levels_ + 1, m); ++k)
                max_resid = std::max(
                    max_resid, (hv.col(k) - es.eigenvalues()(k) * v.col(k)).norm());
            if (max_resid < tol) {
                block_ = v;
                ritz_ = es.eigenvalues().head(m);
                return true;
            }

            // expand with orthonormalized residual directions, keeping the
            // accumulated subspace until it hits the cap
            Matrix resid = hv - v * es.eigenvalues().head(m).cast<Complex>().asDiagonal();
            const Matrix& base = (w.cols() + m <= cap) ? w : v;
            w = expand_basis(base, resid);
            if (w.cols() == base.cols()) return false;  // nothing left to add
        }
        return false;
    }

    static Matrix expand_basis(const Matrix& v, Matrix resid) {
        const double drop = 1e-8;
        std::vector<int> keep;
        for (int c = 0; c < resid.cols(); ++c) {
            resid.col(c) -= v * (v.adjoint() * resid.col(c)).eval();
            for (int k : keep)
                resid.col(c) -= resid.col(k) * (resid.col(k).dot(resid.col(c)));
            // second pass for numerical orthogonality
            resid.col(c) -= v * (v.adjoint() * resid.col(c)).eval();
            const double nrm = resid.col(c).norm();
            if (nrm > drop) {
                resid.col(c) /= nrm;
                keep.push_back(c);
            }
        }
        Matrix w(v.rows(), v.cols() + static_cast<int>(keep.size()));
        w.leftCols(v.cols()) = v;
        for (size_t i = 0; i < keep.size(); ++i)
            w.col(v.cols() + static_cast<int>(i)) = resid.col(keep[i]);
        return w;
    }

    void dense_solve(const SparseMatrixC& h, int m) {
        ++dense_solves;
        OperatorMatrix op;
        op.m = Matrix(h);
        op.basis = subspace_basis(static_cast<int>(h.rows()));
        const auto spec = eigensolve(op, m);
        block_ = spec.vectors;
        ritz_ = spec.values;
    }

    CircuitParams p_;
    AnnealPath path_;
    Model model_;
    int levels_;
    TruncationConfig tc_;
    bool warm_ = false;
    Matrix block_;
    Eigen::VectorXd ritz_;
    double norm_scale_ = 1.0;
};

}  // namespace detail

// Frame provider for the circuit models: diagonalize H(phi(t)) along the
// path and project the persistent-current operator into the kept levels.
inline FrameFn circuit_frame_fn(const CircuitParams& p, const AnnealPath& path, Model model,
                                int levels, const TruncationConfig& tc = {}) {
    auto tracker = std::make_shared<detail::FrameTracker>(p, path, model, levels, tc);
    return [tracker](double t_ns) { return (*tracker)(t_ns); };
}

// Frame provider from analytic matrices (test oracles, Landau-Zener sweeps).
inline FrameFn matrix_frame_fn(std::function<Matrix(double)> h_ghz,
                               std::function<Matrix(double)> coupling, int levels) {
    return [=](double t_ns) {
        OperatorMatrix op;
        op.m = h_ghz(t_ns);
        op.basis = subspace_basis(static_cast<int>(op.m.rows()));
        const auto spec = eigensolve(op, levels);
        Frame f;
        f.eps = spec.values;
        f.basis = spec.vectors;
        const Matrix c = coupling ? coupling(t_ns) : Matrix::Zero(op.m.rows(), op.m.cols());
        f.ip = spec.vectors.adjoint() * c * spec.vectors;
        return f;
    };
}

namespace detail {

// Shared adaptive driver: steps a state through [0, duration] with local
// Richardson (step-doubling) error control, landing exactly on the uniform
// output grid. StepFn advances state in-place from `from` to `to` frames
// given the midpoint frame; StateOps supplies norm/diff metrics.
template <class State, class StepFn, class Record>
void adaptive_propagate(const FrameFn& frame_fn, double duration, const SolverConfig& cfg,
                        State& state, Frame& cur_frame, const StepFn& do_step,
                        const Record& record, EvolutionResult& result,
                        const std::function<double(const State&, const State&)>& diff_norm) {
    const int n_out = cfg.output_points;
    double t = 0.0;
    record(0.0, state, cur_frame);

    double h = std::min(cfg.max_step_ns, duration / 256.0);
    int out_idx = 1;
    while (out_idx < n_out) {
        const double t_target = duration * out_idx / (n_out - 1);
        while (t < t_target - 1e-12) {
            const double h_try = std::min(h, t_target - t);
            const Frame f_mid = frame_fn(t + 0.5 * h_try);
            const Frame f_end = frame_fn(t + h_try);

            // one full step
            State big = state;
            do_step(big, cur_frame, f_mid, f_end, h_try, result);

            // two half steps
            const Frame f_q1 = frame_fn(t + 0.25 * h_try);
            const Frame f_q3 = frame_fn(t + 0.75 * h_try);
            State small = state;
            do_step(small, cur_frame, f_q1, f_mid, 0.5 * h_try, result);
            do_step(small, f_mid, f_q3, f_end, 0.5 * h_try, result);

            const double err = diff_norm(big, small) / 3.0;
            const double tol = cfg.abs_tol + cfg.rel_tol;
            if (err <= tol || h_try <= cfg.min_step_ns * 1.0001) {
                if (err > tol)
                    throw numerical_error("evolve: step-size underflow at t = " +
                                          std::to_string(t) + " ns");
                state = std::move(small);
                cur_frame = f_end;
                t += h_try;
                ++result.accepted_steps;
            } else {
                ++result.rejected_steps;
            }
            const double grow = 0.85 * std::pow(tol / (err + 1e-300), 1.0 / 3.0);
            h = std::clamp(h_try * std::clamp(grow, 0.2, 4.0), cfg.min_step_ns,
                           cfg.max_step_ns);
        }
        t = t_target;
        record(t, state, cur_frame);
        ++out_idx;
    }
}

}  // namespace detail

// Closed-system propagation of the truncated state. The state is carried in
// the instantaneous eigenbasis; each step applies the exact phase propagator
// of the midpoint frame with unitary subspace transports on both sides, so
// the norm is preserved to machine precision.
inline EvolutionResult evolve_schrodinger(const FrameFn& frame_fn, double duration_ns,
                                          const SolverConfig& cfg = {}) {
    cfg.validate();
    if (!(duration_ns > 0)) throw config_error("evolve_schrodinger: duration must be > 0");

    EvolutionResult result;
    Frame cur = frame_fn(0.0);
    const int k = static_cast<int>(cur.eps.size());
    Vector psi = Vector::Zero(k);
    psi(0) = 1.0;  // ground state at the path start

    result.populations.resize(cfg.output_points, k);
    result.times_ns.reserve(cfg.output_points);

    auto record = [&](double t, const Vector& state, const Frame&) {
        const int row = static_cast<int>(result.times_ns.size());
        result.times_ns.push_back(t);
        for (int i = 0; i < k; ++i) result.populations(row, i) = std::norm(state(i));
        result.norm_drift = std::max(result.norm_drift, std::abs(state.norm() - 1.0));
    };

    auto do_step = [&](Vector& state, const Frame& from, const Frame& mid, const Frame& to,
                       double h, EvolutionResult& res) {
        double defect = 0.0;
        const Matrix o_in = detail::transport(mid, from, &defect);
        res.max_transport_defect = std::max(res.max_transport_defect, defect);
        state = o_in * state;
        for (int i = 0; i < k; ++i)
            state(i) *= std::exp(Complex(0.0, -two_pi * (mid.eps(i) - mid.eps(0)) * h));
        const Matrix o_out = detail::transport(to, mid, &defect);
        res.max_transport_defect = std::max(res.max_transport_defect, defect);
        state = o_out * state;
    };

    std::function<double(const Vector&, const Vector&)> diff =
        [](const Vector& a, const Vector& b) { return (a - b).norm(); };

    detail::adaptive_propagate(frame_fn, duration_ns, cfg, psi, cur, do_step, record, result,
                               diff);

    result.rho_final.rho = psi * psi.adjoint();
    result.eps_final = cur.eps;
    result.basis_final = cur.basis;
    result.ip_final = cur.ip;
    result.max_trace_dev = std::abs(psi.squaredNorm() - 1.0);
    result.min_rho_eigenvalue = 0.0;
    return result;
}

// Adiabatic master equation propagation: at every step the density matrix is
// rotated into the instantaneous truncated eigenbasis, the Davies generator
// (Lindblad dissipator + Lamb shift) is built and applied there via Strang
// splitting around the exact phase propagator, and the state is rotated on
// to the next frame. Idle path segments evolve at fixed flux automatically.
inline EvolutionResult evolve_ame(const FrameFn& frame_fn, double duration_ns,
                                  const BathParams& bath, const SolverConfig& cfg = {}) {
    cfg.validate();
    bath.validate();
    if (!(duration_ns > 0)) throw config_error("evolve_ame: duration must be > 0");

    EvolutionResult result;
    Frame cur = frame_fn(0.0);
    const int k = static_cast<int>(cur.eps.size());
    Matrix rho = Matrix::Zero(k, k);
    rho(0, 0) = 1.0;

    // Lamb-shift lookup spanning the Bohr frequencies seen along the path.
    detail::LambShiftTable ls_table;
    if (bath.lamb_shift && bath.eta_g2 > 0.0) {
        double w_max = cur.eps(k - 1) - cur.eps(0);
        for (int i = 1; i <= 32; ++i) {
            const Frame f = frame_fn(duration_ns * i / 32.0);
            w_max = std::max(w_max, f.eps(k - 1) - f.eps(0));
        }
        ls_table = detail::build_lamb_shift_table(bath, w_max);
    }
    const detail::LambShiftTable* table_ptr =
        (bath.lamb_shift && bath.eta_g2 > 0.0) ? &ls_table : nullptr;

    result.populations.resize(cfg.output_points, k);
    result.times_ns.reserve(cfg.output_points);

    auto record = [&](double t, const Matrix& state, const Frame&) {
        const int row = static_cast<int>(result.times_ns.size());
        result.times_ns.push_back(t);
        for (int i = 0; i < k; ++i) result.populations(row, i) = std::real(state(i, i));
        result.max_trace_dev =
            std::max(result.max_trace_dev, std::abs(std::real(state.trace()) - 1.0));
        Eigen::SelfAdjointEigenSolver<Matrix> es(state);
        const double mn = es.eigenvalues().minCoeff();
        result.min_rho_eigenvalue = std::min(result.min_rho_eigenvalue, mn);
        if (mn < -cfg.positivity_tol)
            throw numerical_error("evolve_ame: density matrix eigenvalue " +
                                  std::to_string(mn) + " below -positivity_tol at t = " +
                                  std::to_string(t) + " ns");
    };

    auto do_step = [&](Matrix& state, const Frame& from, const Frame& mid, const Frame& to,
                       double h, EvolutionResult& res) {
        double defect = 0.0;
        const Matrix o_in = detail::transport(mid, from, &defect);
        res.max_transport_defect = std::max(res.max_transport_defect, defect);
        state = (o_in * state * o_in.adjoint()).eval();

        const auto gen = detail::build_ame_generator(mid, bath, table_ptr);
        state = gen.dissipative_kick(state, 0.5 * h);
        const Matrix u = detail::hermitian_propagator(gen.h_ang, h);
        state = (u * state * u.adjoint()).eval();
        state = gen.dissipative_kick(state, 0.5 * h);

        const Matrix o_out = detail::transport(to, mid, &defect);
        res.max_transport_defect = std::max(res.max_transport_defect, defect);
        state = (o_out * state * o_out.adjoint()).eval();
        state = (0.5 * (state + state.adjoint())).eval();
    };

    std::function<double(const Matrix&, const Matrix&)> diff =
        [](const Matrix& a, const Matrix& b) { return (a - b).norm(); };

    detail::adaptive_propagate(frame_fn, duration_ns, cfg, rho, cur, do_step, record, result,
                               diff);

    result.rho_final.rho = rho;
    result.eps_final = cur.eps;
    result.basis_final = cur.basis;
    result.ip_final = cur.ip;
    return result;
}

// Convenience wrappers operating on circuit + path.
inline EvolutionResult evolve_schrodinger(const CircuitParams& p, const AnnealPath& path,
                                          Model model, const SolverConfig& cfg = {},
                                          const TruncationConfig& tc = {}) {
    return evolve_schrodinger(circuit_frame_fn(p, path, model, cfg.levels, tc),
                              path.duration_ns(), cfg);
}

inline EvolutionResult evolve_ame(const CircuitParams& p, const AnnealPath& path, Model model,
                                  const BathParams& bath, const SolverConfig& cfg = {},
                                  const TruncationConfig& tc = {}) {
    return evolve_ame(circuit_frame_fn(p, path, model, cfg.levels, tc), path.duration_ns(),
                      bath, cfg);
}

}  // namespace csfq

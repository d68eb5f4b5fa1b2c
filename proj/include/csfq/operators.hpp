#pragma once

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "csfq/errors.hpp"

namespace csfq {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

enum class BasisKind { Charge1D, Charge2D, Subspace };
enum class OpUnit { GHz, nA };

// Descriptor of the truncated basis an operator lives in. Charge1D keeps
// Cooper-pair numbers n in [-N, N]. Charge2D keeps (n0', n1') in
// [-N0, N0] x [-N1, N1] restricted to the physical sublattice
// n0' == n1' (mod 2): the coordinate transform n0' = n1, n1' = 2 n0 + n1
// only reaches same-parity pairs, and dropping the constraint doubles the
// spectrum with a spurious near-degenerate copy. States are enumerated
// n0'-major, ascending n1' within each n0'.
struct BasisDesc {
    BasisKind kind = BasisKind::Charge1D;
    int n = 0;       // 1D truncation
    int n0 = 0;      // 2D mode-0 truncation
    int n1 = 0;      // 2D mode-1 truncation
    int sub_dim = 0; // Subspace dimension

    int dim() const {
        switch (kind) {
            case BasisKind::Charge1D: return 2 * n + 1;
            case BasisKind::Charge2D: {
                int count = 0;
                for (int a = -n0; a <= n0; ++a)
                    for (int b = -n1; b <= n1; ++b)
                        if (((a + b) & 1) == 0) ++count;
                return count;
            }
            case BasisKind::Subspace: return sub_dim;
        }
        return 0;
    }
    bool operator==(const BasisDesc&) const = default;
};

// Enumeration of the physical 2D charge states and the reverse lookup.
struct Charge2DLayout {
    std::vector<std::pair<int, int>> states;  // (n0', n1') kept, in basis order
    std::vector<int> index;                   // (i0 * (2 n1 + 1) + i1) -> basis index or -1
    int n0 = 0, n1 = 0;

    int at(int q0, int q1) const {  // charge numbers, not offsets
        if (std::abs(q0) > n0 || std::abs(q1) > n1) return -1;
        return index[static_cast<size_t>(q0 + n0) * (2 * n1 + 1) + (q1 + n1)];
    }
};

inline Charge2DLayout charge_2d_layout(int n0, int n1) {
    Charge2DLayout lay;
    lay.n0 = n0;
    lay.n1 = n1;
    lay.index.assign(static_cast<size_t>(2 * n0 + 1) * (2 * n1 + 1), -1);
    for (int a = -n0; a <= n0; ++a)
        for (int b = -n1; b <= n1; ++b)
            if (((a + b) & 1) == 0) {
                lay.index[static_cast<size_t>(a + n0) * (2 * n1 + 1) + (b + n1)] =
                    static_cast<int>(lay.states.size());
                lay.states.emplace_back(a, b);
            }
    return lay;
}

inline BasisDesc charge_basis_1d(int n) { return BasisDesc{BasisKind::Charge1D, n, 0, 0, 0}; }
inline BasisDesc charge_basis_2d(int n0, int n1) {
    return BasisDesc{BasisKind::Charge2D, 0, n0, n1, 0};
}
inline BasisDesc subspace_basis(int k) { return BasisDesc{BasisKind::Subspace, 0, 0, 0, k}; }

struct OperatorMatrix {
    Matrix m;
    BasisDesc basis;
    OpUnit unit = OpUnit::GHz;

    int dim() const { return static_cast<int>(m.rows()); }
};

// max |M - M^dag| relative to max |M|.
inline double hermiticity_defect(const Matrix& m) {
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

inline void require_hermitian(const Matrix& m, double tol = 1e-12,
                              const std::string& what = "operator") {
    if (m.rows() != m.cols()) throw config_error(what + ": matrix not square");
    if (hermiticity_defect(m) > tol)
        throw numerical_error(what + ": matrix is not Hermitian within tolerance");
}

// Sorted eigenpairs of a Hermitian operator. Eigenvector phases are fixed
// so the largest-magnitude component of each column is real and positive,
// which makes matrix elements reproducible across runs and libraries.
struct Spectrum {
    RealVector values;  // ascending, same unit as the operator (GHz)
    Matrix vectors;     // orthonormal columns
    BasisDesc basis;

    int levels() const { return static_cast<int>(values.size()); }
};

inline void fix_eigenvector_phases(Matrix& vecs) {
    for (int c = 0; c < vecs.cols(); ++c) {
        int imax = 0;
        double amax = -1.0;
        for (int r = 0; r < vecs.rows(); ++r) {
            const double a = std::abs(vecs(r, c));
            if (a > amax + 1e-15) {
                amax = a;
                imax = r;
            }
        }
        const Complex z = vecs(imax, c);
        if (std::abs(z) > 0) vecs.col(c) *= std::conj(z) / std::abs(z);
    }
}

namespace detail {

// Deterministic pseudo-random start vector for the Lanczos iteration.
inline Vector lanczos_start_vector(int dim) {
    std::mt19937_64 rng(0x5eed0f00dULL + static_cast<unsigned long long>(dim));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = Complex(u(rng), u(rng));
    v.normalize();
    return v;
}

// Lanczos with full reorthogonalization for the lowest k eigenpairs of a
// large sparse Hermitian matrix. Returns false if the requested residual
// tolerance is not reached (caller falls back to the dense solver).
inline bool lanczos_lowest(const Eigen::SparseMatrix<Complex>& h, int k,
                           RealVector& values, Matrix& vectors, double tol) {
    const int dim = static_cast<int>(h.rows());
    const int m_max = std::min(dim, std::max(8 * k + 80, 140));
    Matrix basis(dim, m_max + 1);
    std::vector<double> alpha, beta;
    basis.col(0) = lanczos_start_vector(dim);

    Vector w(dim);
    int m = 0;
    for (int j = 0; j < m_max; ++j) {
        w = h * basis.col(j);
        const double a = std::real(basis.col(j).dot(w));
        alpha.push_back(a);
        w -= a * basis.col(j);
        if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
        // Full reorthogonalization, twice for safety.
        for (int pass = 0; pass < 2; ++pass)
            w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
        const double b = w.norm();
        beta.push_back(b);
        m = j + 1;
        if (b < 1e-14) break;  // invariant subspace found
        basis.col(j + 1) = w / b;
    }

    // Eigen-decompose the tridiagonal projection.
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    if (es.info() != Eigen::Success || m < k) return false;

    const double scale = std::max(1.0, t.cwiseAbs().maxCoeff());
    const double beta_last = beta.empty() ? 0.0 : beta[m - 1];
    for (int i = 0; i < k; ++i) {
        const double resid = std::abs(beta_last * es.eigenvectors()(m - 1, i));
        if (resid > tol * scale) return false;
    }

    values.resize(k);
    vectors.resize(dim, k);
    for (int i = 0; i < k; ++i) {
        values(i) = es.eigenvalues()(i);
        vectors.col(i) = basis.leftCols(m) * es.eigenvectors().col(i).cast<Complex>();
        vectors.col(i).normalize();
    }
    // Ritz vectors of close eigenvalues can lose orthogonality; re-orthonormalize.
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < i; ++j)
            vectors.col(i) -= vectors.col(j) * (vectors.col(j).dot(vectors.col(i)));
        const double nrm = vectors.col(i).norm();
        if (nrm < 0.5) return false;
        vectors.col(i) /= nrm;
    }
    return true;
}

}  // namespace detail

// Lowest k eigenpairs, ascending, orthonormal, phase-fixed. Dense solve by
// default; large sparse-structured operators (the 2D circuit model) go
// through Lanczos with a dense fallback.
inline Spectrum eigensolve(const OperatorMatrix& op, int k) {
    const int dim = op.dim();
    if (k < 1 || k > dim) throw config_error("eigensolve: k out of range");
    require_hermitian(op.m, 1e-12, "eigensolve");

    Spectrum out;
    out.basis = op.basis;

    const bool try_lanczos = dim > 420 && k <= dim / 8;
    if (try_lanczos) {
        Eigen::SparseMatrix<Complex> sp(dim, dim);
        std::vector<Eigen::Triplet<Complex>> trip;
        trip.reserve(static_cast<size_t>(dim) * 10);
        for (int c = 0; c < dim; ++c)
            for (int r = 0; r < dim; ++r)
                if (std::abs(op.m(r, c)) > 0.0) trip.emplace_back(r, c, op.m(r, c));
        sp.setFromTriplets(trip.begin(), trip.end());
        RealVector vals;
        Matrix vecs;
        if (detail::lanczos_lowest(sp, k, vals, vecs, 1e-11)) {
            out.values = vals;
            out.vectors = vecs;
            fix_eigenvector_phases(out.vectors);
            return out;
        }
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es(op.m);
    if (es.info() != Eigen::Success) throw numerical_error("eigensolve: dense solver failed");
    out.values = es.eigenvalues().head(k);
    out.vectors = es.eigenvectors().leftCols(k);
    fix_eigenvector_phases(out.vectors);
    return out;
}

}  // namespace csfq

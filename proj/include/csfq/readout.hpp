#pragma once

#include <cmath>

#include "csfq/errors.hpp"
#include "csfq/operators.hpp"

namespace csfq {

// Persistent-current readout sensitivity; the QFP-based readout in the
// modeled device resolves Delta_I = 10 nA.
struct ReadoutModel {
    double delta_i_na = 10.0;

    void validate() const {
        if (!(delta_i_na > 0)) throw config_error("ReadoutModel: delta_I must be > 0");
    }
};

// POVM element for measuring right circulating current:
// M_r = sum_lambda f(I_lambda / Delta_I) |lambda><lambda| with
// f(x) = (tanh x + 1)/2, over the eigenpairs of the persistent-current
// operator restricted to the retained subspace.
inline Matrix povm_right(const Matrix& ip_subspace, const ReadoutModel& model = {}) {
    model.validate();
    require_hermitian(ip_subspace, 1e-10, "povm_right");
    Eigen::SelfAdjointEigenSolver<Matrix> es(ip_subspace);
    const int k = static_cast<int>(ip_subspace.rows());
    Matrix m = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        const double f = 0.5 * (std::tanh(es.eigenvalues()(i) / model.delta_i_na) + 1.0);
        m += f * (es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint());
    }
    return m;
}

// Left-current complement, f(-x); M_r + M_l = identity.
inline Matrix povm_left(const Matrix& ip_subspace, const ReadoutModel& model = {}) {
    return Matrix::Identity(ip_subspace.rows(), ip_subspace.cols()) -
           povm_right(ip_subspace, model);
}

// P_r = Tr(rho M_r).
inline double p_right(const Matrix& rho, const Matrix& m_r) {
    if (rho.rows() != m_r.rows() || rho.cols() != m_r.cols())
        throw config_error("p_right: dimension mismatch between state and POVM");
    const double p = std::real((rho * m_r).trace());
    if (p < -1e-9 || p > 1.0 + 1e-9)
        throw numerical_error("p_right: probability outside [0, 1] beyond tolerance");
    return std::min(1.0, std::max(0.0, p));
}

}  // namespace csfq

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "csfq/bath.hpp"
#include "csfq/operators.hpp"

namespace csfq {

struct LindbladOp {
    double omega_ghz = 0.0;  // Bohr frequency eps_b - eps_a of the bin
    Matrix l;                // L_w = sum <a|Ip|b> |a><b| over pairs in the bin
};

namespace detail {

// Cluster a sorted list of Bohr frequencies: consecutive values within tol
// share a bin. A symmetric input yields mirror-symmetric bins, preserving
// L_w = L_{-w}^dagger exactly; a bin straddling zero snaps to omega = 0.
struct FreqBin {
    double omega = 0.0;
    double sum = 0.0;
    double last = 0.0;
    std::vector<std::pair<int, int>> pairs;  // (a, b) with eps_b - eps_a in bin
};

inline std::vector<FreqBin> bin_bohr_frequencies(const Eigen::VectorXd& eps, double tol) {
    const int k = static_cast<int>(eps.size());
    struct Entry {
        double w;
        int a, b;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<size_t>(k) * k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) entries.push_back({eps(b) - eps(a), a, b});
    std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
        if (x.w != y.w) return x.w < y.w;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });

    std::vector<FreqBin> bins;
    for (const auto& e : entries) {
        if (bins.empty() || e.w > bins.back().last + tol) bins.push_back({});
        auto& b = bins.back();
        b.last = e.w;
        b.sum += e.w;
        b.pairs.emplace_back(e.a, e.b);
    }
    for (auto& b : bins) {
        b.omega = b.sum / static_cast<double>(b.pairs.size());
        // the diagonal pairs are exactly zero frequency; snap their bin to 0
        bool has_diag = false;
        for (const auto& [a, bb] : b.pairs)
            if (a == bb) has_diag = true;
        if (has_diag || std::abs(b.omega) < 1e-12) b.omega = 0.0;
    }
    return bins;
}

}  // namespace detail

// Lindblad jump operators of the Davies generator: one per binned Bohr
// frequency, L_w = sum_{eps_b - eps_a = w} <eps_a|Ip|eps_b> |eps_a><eps_b|.
// `ip_eigen` is the coupling operator already expressed in the eigenbasis of
// the K retained levels; `eps` the matching eigenvalues in GHz.
inline std::vector<LindbladOp> lindblad_ops_from_projected(const Eigen::VectorXd& eps,
                                                           const Matrix& ip_eigen,
                                                           double bin_tol_ghz) {
    const int k = static_cast<int>(eps.size());
    if (ip_eigen.rows() != k || ip_eigen.cols() != k)
        throw config_error("lindblad_ops: coupling operator does not match level count");

    const auto bins = detail::bin_bohr_frequencies(eps, bin_tol_ghz);
    std::vector<LindbladOp> out;
    out.reserve(bins.size());
    for (const auto& bin : bins) {
        LindbladOp op;
        op.omega_ghz = bin.omega;
        op.l = Matrix::Zero(k, k);
        for (const auto& [a, b] : bin.pairs) op.l(a, b) = ip_eigen(a, b);
        out.push_back(std::move(op));
    }
    return out;
}

// Spec-facing variant: project a full-basis coupling operator through the
// spectrum's eigenvectors first.
inline std::vector<LindbladOp> lindblad_ops(const Spectrum& spectrum, const OperatorMatrix& ip,
                                            double bin_tol_ghz) {
    if (!(spectrum.basis == ip.basis))
        throw config_error("lindblad_ops: spectrum and operator bases differ");
    const Matrix ip_eigen = spectrum.vectors.adjoint() * ip.m * spectrum.vectors;
    return lindblad_ops_from_projected(spectrum.values, ip_eigen, bin_tol_ghz);
}

}  // namespace csfq

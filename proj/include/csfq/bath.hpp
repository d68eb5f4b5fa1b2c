#pragma once

#include <cmath>
#include <vector>

#include "csfq/constants.hpp"
#include "csfq/errors.hpp"

namespace csfq {

// Ohmic bath with exponential high-frequency cutoff, in thermal equilibrium.
// gamma(omega) multiplies |<a|Ip|b>|^2 (Ip in nA) to give a rate in 1/ns;
// eta_g2 is the dimensionless system-bath coupling strength against that
// normalization, and all thermal/cutoff factors use angular frequencies
// (rad/ns) so the Bose exponent is hbar omega / kB T.
struct BathParams {
    double eta_g2 = 3e-6;
    double temperature_mk = 10.0;
    double omega_c_ghz = 15.0;  // cutoff, omega_c / 2 pi
    bool lamb_shift = true;
    double bohr_bin_tol_ghz = 1e-3;

    void validate() const {
        if (eta_g2 < 0) throw config_error("BathParams: eta_g2 must be >= 0");
        if (!(temperature_mk > 0)) throw config_error("BathParams: temperature must be > 0");
        if (!(omega_c_ghz > 0)) throw config_error("BathParams: omega_c must be > 0");
        if (bohr_bin_tol_ghz < 0) throw config_error("BathParams: bohr_bin_tol must be >= 0");
    }
};

// gamma(omega) = eta g^2 * 2 pi w exp(-|w|/w_c) / (1 - exp(-beta w)) with
// w angular; the w -> 0 limit is 2 pi eta g^2 / beta. KMS detailed balance
// gamma(-w) = exp(-beta w) gamma(w) holds identically.
inline double bath_gamma(const BathParams& bath, double omega_ghz) {
    const double w = ghz_to_angular(omega_ghz);
    const double wc = ghz_to_angular(bath.omega_c_ghz);
    const double beta = thermal_beta_ns(bath.temperature_mk);
    if (omega_ghz == 0.0) return bath.eta_g2 * two_pi / beta;
    const double x = beta * w;
    // 1 - e^{-x} via expm1 keeps small-|x| accuracy; overflow-safe split for
    // large negative x where e^{-x} explodes: w/(1-e^{-x}) = -w e^{x}/(1-e^{x}).
    double thermal;
    if (x < -30.0)
        thermal = -w * std::exp(x);
    else
        thermal = w / (-std::expm1(-x));
    return bath.eta_g2 * two_pi * thermal * std::exp(-std::abs(w) / wc);
}

namespace detail {

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Newton iteration on Legendre polynomials; standard Golub-Welsch-free
// construction, deterministic.
inline GaussLegendreRule gauss_legendre(int n) {
    GaussLegendreRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

inline const GaussLegendreRule& gl48() {
    static const GaussLegendreRule rule = gauss_legendre(48);
    return rule;
}

template <class F>
double integrate_panel(const F& f, double a, double b) {
    const auto& r = gl48();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double acc = 0.0;
    for (size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * f(c + h * r.nodes[i]);
    return acc * h;
}

}  // namespace detail

struct LambShiftConfig {
    double window = 0.05;      // initial PV exclusion half-width delta, rad/ns
    double rel_tol = 0.05;     // Richardson disagreement tolerance
    double abs_tol = 1e-14;
};

// Lamb-shift integral S(omega) = PV int dw'/2pi gamma(w') / (w - w'),
// evaluated on a symmetric grid excluding [w - delta, w + delta] and
// Richardson-extrapolated in the window size (the excluded strip
// contributes ~ gamma'(w) delta / pi to first order). Returned divided by
// 2 pi so that H_LS entries come out in GHz alongside energies.
inline double lamb_shift_S(const BathParams& bath, double omega_ghz,
                           const LambShiftConfig& cfg = {}) {
    bath.validate();
    if (bath.eta_g2 == 0.0) return 0.0;
    const double w = ghz_to_angular(omega_ghz);
    const double wc = ghz_to_angular(bath.omega_c_ghz);
    const double upper = 45.0 * wc + std::abs(w);

    // S_ang(delta) = -(1/2pi) int_delta^U [gamma(w+u) - gamma(w-u)] / u du
    auto s_of_window = [&](double delta) {
        auto integrand = [&](double u) {
            return (bath_gamma(bath, angular_to_ghz(w + u)) -
                    bath_gamma(bath, angular_to_ghz(w - u))) /
                   u;
        };
        double acc = 0.0;
        // log-spaced panels resolve the near-window region
        const double edges[] = {delta, 4 * delta + 0.5, 10.0, 100.0, upper};
        for (int i = 0; i + 1 < 5; ++i) {
            const double a = edges[i], b = std::min(edges[i + 1], upper);
            if (b > a) acc += detail::integrate_panel(integrand, a, b);
        }
        return -acc / two_pi;
    };

    const double s_full = s_of_window(cfg.window);
    const double s_half = s_of_window(0.5 * cfg.window);
    const double s_ext = 2.0 * s_half - s_full;
    const double disagreement = std::abs(s_half - s_full);
    if (disagreement > std::max(cfg.rel_tol * std::abs(s_ext), cfg.abs_tol))
        throw numerical_error("lamb_shift_S: window extrapolation did not converge");
    return s_ext / two_pi;  // GHz-compatible normalization
}

}  // namespace csfq

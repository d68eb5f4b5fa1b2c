#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "csfq/circuit.hpp"
#include "csfq/errors.hpp"
#include "csfq/params.hpp"

namespace csfq {

enum class RiseShape { Linear, Gaussian };

// Time-parametrized flux trajectory request. The quoted "anneal time" of an
// experiment is the 5-95% rise duration, not the total pulse length.
struct PathSpec {
    FluxPoint start;
    FluxPoint end;
    double t_f_ns = 0.0;          // total pulse duration
    RiseShape rise_shape = RiseShape::Linear;
    double rise_time_ns = 0.0;    // 5-95% excursion duration (gaussian shape)
    double tilt_amplitude_rad = 0.0;  // crossing scans: phi_z excursion over [0, t_f]
    bool correction = false;          // intent flag; applied by the orchestration layer
    double idle_after_ns = 0.0;
    int samples_per_anneal = 1000;
    int samples_per_idle = 50;

    void validate() const {
        if (!(t_f_ns > 0)) throw config_error("PathSpec: t_f_ns must be > 0");
        if (idle_after_ns < 0) throw config_error("PathSpec: idle_after_ns must be >= 0");
        if (rise_shape == RiseShape::Gaussian) {
            if (!(rise_time_ns > 0))
                throw config_error("PathSpec: gaussian shape needs rise_time_ns > 0");
            if (rise_time_ns > t_f_ns)
                throw config_error("PathSpec: rise_time_ns must be <= t_f_ns");
        }
        if (samples_per_anneal < 2) throw config_error("PathSpec: need >= 2 anneal samples");
        if (!std::isfinite(start.phi_x) || !std::isfinite(start.phi_z) ||
            !std::isfinite(end.phi_x) || !std::isfinite(end.phi_z))
            throw config_error("PathSpec: fluxes must be finite");
    }
};

struct AnnealPath {
    std::vector<double> t_ns;
    std::vector<double> phi_x;
    std::vector<double> phi_z;
    PathSpec spec;

    size_t size() const { return t_ns.size(); }
    double duration_ns() const { return t_ns.empty() ? 0.0 : t_ns.back(); }
};

namespace detail {

inline double effective_phi_z_end(const PathSpec& spec) {
    return spec.tilt_amplitude_rad != 0.0 ? spec.start.phi_z + spec.tilt_amplitude_rad
                                          : spec.end.phi_z;
}

inline void append_idle(AnnealPath& path, const PathSpec& spec) {
    if (spec.idle_after_ns <= 0) return;
    const double x = path.phi_x.back();
    const double z = path.phi_z.back();
    for (int i = 1; i <= spec.samples_per_idle; ++i) {
        path.t_ns.push_back(spec.t_f_ns + spec.idle_after_ns * i / spec.samples_per_idle);
        path.phi_x.push_back(x);
        path.phi_z.push_back(z);
    }
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace detail

// Linear ramp in both fluxes over [0, t_f], held constant during the idle.
// With tilt_amplitude_rad set, phi_z(t) = phi_z(0) + amp * t/t_f and the
// spec's end.phi_z is ignored for the tilt.
inline AnnealPath make_linear_path(const PathSpec& spec) {
    spec.validate();
    AnnealPath path;
    path.spec = spec;
    const double z_end = detail::effective_phi_z_end(spec);
    const int n = spec.samples_per_anneal;
    path.t_ns.reserve(n + spec.samples_per_idle + 1);
    for (int i = 0; i < n; ++i) {
        const double s = double(i) / (n - 1);
        path.t_ns.push_back(spec.t_f_ns * s);
        path.phi_x.push_back(spec.start.phi_x + (spec.end.phi_x - spec.start.phi_x) * s);
        path.phi_z.push_back(spec.start.phi_z + (z_end - spec.start.phi_z) * s);
    }
    detail::append_idle(path, spec);
    return path;
}

namespace detail {

// Cumulative-Gaussian ramp profile on [0, 1] (normalized time), truncated at
// the window edges and renormalized so g(0) = 0, g(1) = 1 exactly. The
// renormalization removes the truncation hitch. sigma is in units of t_f.
inline double gaussian_ramp_profile(double u, double sigma_rel) {
    const double x0 = -0.5 / sigma_rel;
    const double x1 = +0.5 / sigma_rel;
    const double lo = std_normal_cdf(x0), hi = std_normal_cdf(x1);
    return (std_normal_cdf((u - 0.5) / sigma_rel) - lo) / (hi - lo);
}

// 5-95% span of the renormalized truncated ramp, in units of t_f.
inline double gaussian_ramp_span(double sigma_rel) {
    auto cross = [&](double level) {
        double a = 0.0, b = 1.0;
        for (int i = 0; i < 80; ++i) {
            const double m = 0.5 * (a + b);
            (gaussian_ramp_profile(m, sigma_rel) < level ? a : b) = m;
        }
        return 0.5 * (a + b);
    };
    return cross(0.95) - cross(0.05);
}

// sigma (relative to t_f) such that the 5-95% excursion takes rise/t_f.
inline double solve_gaussian_sigma(double rise_over_tf) {
    // span is monotone increasing in sigma, approaching the linear-ramp
    // limit 0.9 from below as sigma -> inf.
    if (rise_over_tf >= 0.89)
        throw config_error(
            "PathSpec: gaussian rise_time too close to t_f (max 0.89 t_f); "
            "use a longer t_f or a linear ramp");
    double lo = 1e-3, hi = 50.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gaussian_ramp_span(mid) < rise_over_tf ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Total pulse duration that truncates the ramp at +/- 2 sigma for a given
// 5-95% rise time (the default pulse framing).
inline double gaussian_pulse_t_f(double rise_time_ns) {
    // 5-95% span of the +/-2 sigma truncated, renormalized profile: solve
    // span(sigma_rel = 1/4) * t_f = rise_time.
    static const double span_quarter = detail::gaussian_ramp_span(0.25);
    return rise_time_ns / span_quarter;
}

// Gaussian (error-function) barrier ramp for phi_x; phi_z moves linearly
// (typically constant). The 5-95% traversal of the phi_x excursion takes
// rise_time_ns; endpoints are clamped to start/end exactly.
inline AnnealPath make_gaussian_x_pulse(const PathSpec& spec) {
    spec.validate();
    if (spec.rise_shape != RiseShape::Gaussian)
        throw config_error("make_gaussian_x_pulse: spec.rise_shape must be gaussian");
    const double sigma_rel = detail::solve_gaussian_sigma(spec.rise_time_ns / spec.t_f_ns);

    AnnealPath path;
    path.spec = spec;
    const double z_end = detail::effective_phi_z_end(spec);
    const int n = spec.samples_per_anneal;
    for (int i = 0; i < n; ++i) {
        const double u = double(i) / (n - 1);
        const double g = detail::gaussian_ramp_profile(u, sigma_rel);
        path.t_ns.push_back(spec.t_f_ns * u);
        path.phi_x.push_back(spec.start.phi_x + (spec.end.phi_x - spec.start.phi_x) * g);
        path.phi_z.push_back(spec.start.phi_z + (z_end - spec.start.phi_z) * u);
    }
    detail::append_idle(path, spec);
    return path;
}

inline AnnealPath make_path(const PathSpec& spec) {
    return spec.rise_shape == RiseShape::Gaussian ? make_gaussian_x_pulse(spec)
                                                  : make_linear_path(spec);
}

// Additive z-bias correction: every sample's phi_z gains +phi_d(d, phi_x).
// The applied d may differ from the device d (correction-parameter scans).
inline AnnealPath apply_asymmetry_correction(const AnnealPath& path, double applied_d) {
    CircuitParams tmp;
    tmp.d = applied_d;
    AnnealPath out = path;
    for (size_t i = 0; i < out.size(); ++i) out.phi_z[i] += phi_d(tmp, out.phi_x[i]);
    out.spec.correction = true;
    return out;
}

inline AnnealPath apply_asymmetry_correction(const AnnealPath& path, const CircuitParams& p) {
    return apply_asymmetry_correction(path, p.d);
}

// Linear interpolation between stored samples; exact on nodes.
inline FluxPoint sample(const AnnealPath& path, double t_ns) {
    if (path.size() < 2) throw config_error("sample: path has fewer than 2 samples");
    if (t_ns < path.t_ns.front() - 1e-12 || t_ns > path.t_ns.back() + 1e-12)
        throw config_error("sample: t out of path range");
    t_ns = std::clamp(t_ns, path.t_ns.front(), path.t_ns.back());
    const auto it = std::upper_bound(path.t_ns.begin(), path.t_ns.end(), t_ns);
    size_t hi = std::min<size_t>(path.t_ns.size() - 1,
                                 static_cast<size_t>(it - path.t_ns.begin()));
    if (hi == 0) hi = 1;
    const size_t lo = hi - 1;
    const double dt = path.t_ns[hi] - path.t_ns[lo];
    const double w = dt > 0 ? (t_ns - path.t_ns[lo]) / dt : 0.0;
    return {path.phi_x[lo] + (path.phi_x[hi] - path.phi_x[lo]) * w,
            path.phi_z[lo] + (path.phi_z[hi] - path.phi_z[lo]) * w};
}

}  // namespace csfq

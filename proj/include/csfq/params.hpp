#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "csfq/errors.hpp"

namespace csfq {

enum class Model { OneD, TwoD };

inline std::string to_string(Model m) { return m == Model::OneD ? "1d" : "2d"; }

inline Model model_from_string(const std::string& s) {
    if (s == "1d" || s == "1D") return Model::OneD;
    if (s == "2d" || s == "2D") return Model::TwoD;
    throw config_error("unknown model '" + s + "' (expected 1d or 2d)");
}

// Applied control fluxes in phase units, phi = 2 pi Phi / Phi0.
struct FluxPoint {
    double phi_x = 0.0;  // barrier bias, rad
    double phi_z = 0.0;  // tilt bias, rad
};

struct CircuitParams {
    double I_z_nA = 0.0;         // z-loop junction critical current
    double C_sh_fF = 0.0;        // shunt capacitance
    double C_z_fF = 0.0;         // z-junction capacitance (2D model only)
    double alpha = 0.0;          // x-loop junction size ratio
    double d = 0.0;              // x-loop junction asymmetry
    double phi_x_offset = 0.0;   // rad, added to applied phi_x
    double phi_z_offset = 0.0;   // rad, added to applied phi_z

    void validate(Model model = Model::OneD) const {
        if (!(I_z_nA > 0)) throw config_error("CircuitParams: I_z_nA must be > 0");
        if (!(C_sh_fF > 0)) throw config_error("CircuitParams: C_sh_fF must be > 0");
        if (model == Model::TwoD && !(C_z_fF > 0))
            throw config_error("CircuitParams: C_z_fF must be > 0 for the 2D model");
        if (!(alpha > 0 && alpha < 1)) throw config_error("CircuitParams: alpha must be in (0, 1)");
        if (!(std::abs(d) < 1)) throw config_error("CircuitParams: |d| must be < 1");
        if (!std::isfinite(phi_x_offset) || !std::isfinite(phi_z_offset))
            throw config_error("CircuitParams: flux offsets must be finite");
    }
};

// Table S1 fit values; the asymmetry d = 0.102 was fixed for both models.
inline CircuitParams table_s1_1d() {
    CircuitParams p;
    p.I_z_nA = 228.0;
    p.C_sh_fF = 70.0;
    p.alpha = 0.452;
    p.d = 0.102;
    return p;
}

inline CircuitParams table_s1_2d() {
    CircuitParams p;
    p.I_z_nA = 242.0;
    p.C_sh_fF = 62.0;
    p.C_z_fF = 4.85;
    p.alpha = 0.423;
    p.d = 0.102;
    return p;
}

inline nlohmann::json to_json(const CircuitParams& p) {
    return nlohmann::json{
        {"I_z_nA", p.I_z_nA},       {"C_sh_fF", p.C_sh_fF},
        {"C_z_fF", p.C_z_fF},       {"alpha", p.alpha},
        {"d", p.d},                 {"phi_x_offset_rad", p.phi_x_offset},
        {"phi_z_offset_rad", p.phi_z_offset}};
}

inline CircuitParams circuit_params_from_json(const nlohmann::json& j) {
    CircuitParams p;
    try {
        p.I_z_nA = j.at("I_z_nA").get<double>();
        p.C_sh_fF = j.at("C_sh_fF").get<double>();
        p.alpha = j.at("alpha").get<double>();
        p.d = j.at("d").get<double>();
        p.C_z_fF = j.value("C_z_fF", 0.0);
        p.phi_x_offset = j.value("phi_x_offset_rad", 0.0);
        p.phi_z_offset = j.value("phi_z_offset_rad", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("circuit params: ") + e.what());
    }
    return p;
}

}  // namespace csfq

#ifndef SHEARFLOW_CONFIG_HPP
#define SHEARFLOW_CONFIG_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "shearflow/geometry.hpp"
#include "shearflow/potential.hpp"
#include "shearflow/simulate.hpp"

namespace shearflow {

/// Fully resolved run configuration. Parsing is strict: unknown keys are
/// rejected with their path, the physics keys (nu, s, lambda, potential) have
/// no defaults, and only numerical-policy knobs are defaulted.
struct RunConfig {
    // geometry
    double L = 0.0;
    HeightProfile h;
    QuadratureSpec quadrature;
    // basis
    int K = 0;
    int M = 1;
    // physics
    double nu = 0.0;
    double s = 0.0;
    double lambda = 0.0;
    double lift_alpha = 1.0;
    // potential
    Superpotential potential;
    int n_mollify = 32;
    ScanSpec scan;
    double margin = 0.9;
    // integration
    double dt = 0.0;
    double t_end = 0.0;
    InitialCondition v0;
    std::uint64_t seed = 1;
    long checkpoint_every = 0;
    bool convection = true;
    bool boundary_law = true;
    int sample_stride = 1;
    double energy_tol_coeff = 10.0;
    double blowup_factor = 1e6;
    // attractor
    double window_stride = 0.0;  ///< 0 = 10 samples
    int ensemble = 8;
    double t_section = 8.0;
    double section_delta = 0.1;
    int section_samples = 4;
    double entry_kappa = 1.4142135623730951;
    double cloud_tol = 1e-2;
    // output
    std::string out_dir = ".";
    bool write_csv = true;
    bool write_json = true;
    bool plots = false;
    bool cache = false;

    nlohmann::json resolved() const;
    std::uint64_t content_hash() const;  ///< over the resolved echo text

    FlowParameters flow_parameters() const;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& j);

}  // namespace shearflow

#endif

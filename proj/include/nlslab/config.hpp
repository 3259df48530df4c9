#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "nlslab/dynamics.hpp"
#include "nlslab/grid.hpp"
#include "nlslab/nonlinearity.hpp"

namespace nlslab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key = value run configuration with [section] grouping.  Every key
/// has an explicit default except run.omega, which must be set; `defaults`
/// prints the complete effective configuration.
struct RunConfig {
    // [nonlinearity]
    std::string kind = "cubic_quintic";
    double p = 3.0;
    double a = 1.0;
    double b = 0.2;
    double kappa = 1.0;

    // [grid] bound states and dynamics
    int d = 3;
    double R = 40.0;
    int M = 4000;

    // [continuum] resolvent and FGR solves
    double cont_R = 80.0;
    int cont_M = 16000;

    // [run]
    double omega = std::numeric_limits<double>::quiet_NaN();  // required
    double omega_min = 0.0;
    double omega_max = 0.0;
    int omega_count = 1;

    // [spectrum]
    int coarse_size = 800;
    double gap_tol_rel = 1e-3;

    // [fgr]
    double eps0_factor = 0.05;
    double cap_fraction = 0.25;
    double cap_strength = 16.0;
    double gamma_threshold = 1e-4;
    double cross_tol = 0.05;

    // [evolution]
    std::string scheme = "crank_nicolson";
    double dt = 0.005;
    double T = 0.0;  // 0: auto, 200 / lambda
    int stride = 40;
    double absorber_fraction = 0.15;
    double absorber_strength = 1.0;
    int sweeps = 2;

    // [tracker]
    double z0_re = 0.05;
    double z0_im = 0.0;
    double s1 = 3.0;
    int fit_min_samples = 50;

    // [output]
    std::string out_dir = "out";

    std::map<std::string, double> tolerances;  // [tolerances] free-form overrides
    std::set<std::string> explicit_keys;

    static RunConfig load(const std::string& path);
    static RunConfig from_text(const std::string& text);
    void set(const std::string& dotted_key, const std::string& value);
    bool was_set(const std::string& dotted_key) const {
        return explicit_keys.count(dotted_key) > 0;
    }
    void require(const std::string& dotted_key) const;

    std::string serialize() const;
    uint64_t config_hash() const;

    NonlinearitySpec nonlinearity() const;
    RadialGrid bound_grid() const { return RadialGrid(d, R, M); }
    RadialGrid continuum_grid() const { return RadialGrid(d, cont_R, cont_M); }
    EvolutionConfig evolution() const;
    std::vector<double> omega_range() const;
};

std::string hash_hex(uint64_t h);
uint64_t fnv1a(const std::string& s);

}  // namespace nlslab

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlslab/normal_form.hpp"

namespace nlslab {

struct FgrOptions {
    ResolventOptions resolvent;
    double gamma_threshold = 1e-4;  // nondegeneracy bound on inf |Gamma|
    double cross_tol = 0.05;        // resolvent vs delta-form and bc vs eps
    double channel_margin = 1e-6;   // required relative margin of (N+1) lambda over omega
};

/// Fermi-golden-rule coefficient at one frequency, evaluated three ways:
/// the outgoing-resolvent pairing with both limiting-absorption methods and
/// the spectral (delta-function) form through the generalized eigenfunction.
struct FgrReport {
    double omega = 0.0;
    double lambda = 0.0;
    int N = 1;
    double mu = 0.0;              // (N+1) lambda
    double gamma_bc = 0.0;        // Im <R(mu+i0) Phi, gamma>, outgoing BC
    double gamma_eps = 0.0;       // same, eps-extrapolation
    double gamma_delta = 0.0;     // pi <delta(H - mu) Phi, gamma>
    double cross_bc_eps = 0.0;    // relative spread between the two methods
    double cross_res_delta = 0.0; // resolvent form vs delta form
    double noise_floor = 0.0;     // degeneracy floor
    bool degenerate = false;      // |Gamma| below the noise floor
    bool hypothesis_pass = false; // |Gamma| > threshold and cross-checks hold
    double threshold = 0.0;
    int sign = 0;                 // sign of gamma_bc (0 when degenerate)
};

FgrReport compute_gamma(const LinearizedSystem& system, const NormalFormPackage& package,
                        const FgrOptions& opts = {});

struct ScanEntry {
    double omega;
    std::optional<FgrReport> report;
    std::string error;  // per-frequency failure, scan continues
};

struct ScanResult {
    std::vector<ScanEntry> entries;
    double inf_abs_gamma = 0.0;
    bool hypothesis_pass = false;  // inf |Gamma| > threshold over the usable window
    int usable = 0;
};

/// Evaluate Gamma(omega, omega) across a frequency window.  Per-frequency
/// failures (no mode, channel preconditions, unresolved limiting absorption)
/// are recorded and skipped.
ScanResult gamma_scan(const NonlinearitySpec& spec, const RadialGrid& grid,
                      const std::vector<double>& omegas, const FgrOptions& opts = {});

}  // namespace nlslab

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/nonlinearity.hpp"
#include "nlslab/tridiag.hpp"

namespace nlslab {

struct GroundStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Symmetrized radial Schroedinger operator -d^2/dr^2 + centrifugal + pot,
/// acting on v = r^{(d-1)/2} u with Dirichlet ends.
SymTridiag radial_operator(const RadialGrid& grid, const RealField& pot);

/// L_+ = -Lap + omega - beta(phi^2) - 2 beta'(phi^2) phi^2 (symmetrized).
SymTridiag make_lplus(const NonlinearitySpec& spec, const RadialGrid& grid, double omega,
                      const RealField& phi);
/// L_- = -Lap + omega - beta(phi^2) (symmetrized).
SymTridiag make_lminus(const NonlinearitySpec& spec, const RadialGrid& grid, double omega,
                       const RealField& phi);

/// Relative L^2 residual of  Lap phi - omega phi + beta(phi^2) phi = 0.
double ground_state_residual(const NonlinearitySpec& spec, const RadialGrid& grid, double omega,
                             const RealField& phi);

struct GroundState {
    double omega;
    RealField phi;
    double residual;
    int newton_iterations;
    double shooting_amplitude;  // u(0) estimate from the shooting stage (0 if warm-started)
};

/// Positive nodeless decaying solution of the stationary equation.
/// Fails with GroundStateError when no bound state exists at omega; the
/// message distinguishes bisection evidence of a missing branch from plain
/// Newton divergence.
GroundState solve_ground_state(const NonlinearitySpec& spec, double omega,
                               const RadialGrid& grid,
                               const RealField* initial_guess = nullptr);

struct BranchSample {
    double omega;
    RealField phi;
    RealField dphi;  // d(phi)/d(omega), from L_+ dphi = -phi
    double mass;
    double dmass_pairing;   // 2 <phi, dphi>
    double dmass_fd;        // finite difference of mass across the branch
    double residual;        // stationary equation residual
    double dphi_residual;   // || L_+ dphi + phi || / || phi ||
    int h5_negative_count;
    double h5_kernel_gap;
};

struct GroundStateBranch {
    std::vector<BranchSample> samples;
    bool h4_pass = false;      // dM/domega > 0 throughout
    bool h5_pass = false;      // exactly one negative L_+ eigenvalue, no kernel
    bool truncated = false;
    std::string truncation_reason;
    double max_slope_disagreement = 0.0;  // pairing vs finite-difference dM/domega
};

/// Continue the ground-state family over the given omega samples (sorted
/// ascending).  Stops early with a reason when a solve fails.
GroundStateBranch continue_branch(const NonlinearitySpec& spec, const std::vector<double>& omegas,
                                  const RadialGrid& grid);

struct H5Report {
    int negative_count;
    double kernel_gap;        // |eigenvalue of L_+ closest to 0|
    double lowest_eigenvalue;
};

H5Report check_H5(const NonlinearitySpec& spec, const RadialGrid& grid, double omega,
                  const RealField& phi);

/// Fit the exponential decay rate of a positive field on [r_lo, r_hi].
double fit_tail_rate(const RadialGrid& grid, const RealField& f, double r_lo, double r_hi);

}  // namespace nlslab

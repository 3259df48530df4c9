#pragma once

#include <string>

#include "nlslab/linearization.hpp"

namespace nlslab {

struct ResolventError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class OutgoingMethod { OutgoingBC, EpsExtrapolation };

struct ResolventOptions {
    double eps0_factor = 0.05;     // eps0 = factor * (mu - omega)
    double cap_fraction = 0.25;    // absorbing-tail width for the eps method
    double cap_strength = 16.0;    // absorber amplitude in units of k / width
    double singular_tol = 1e-6;    // relative distance to the point spectrum
    double agree_tol = 0.05;       // hard cross-method error bound
};

/// Solve (H - mu) psi = g for real mu in the spectral gap with decaying
/// boundary conditions.  Relative residual <= 1e-10 is enforced.
Spinor solve_gap(const LinearizedSystem& system, double mu, const Spinor& g,
                 const ResolventOptions& opts = {});

/// Deflated gap solve for mu on the point spectrum with g in L^2_c: returns
/// the unique solution in L^2_c via a bordered sparse system.
Spinor solve_gap_deflated(const LinearizedSystem& system, double mu, const Spinor& g);

/// Limiting-absorption solve (H - mu - i0) psi = g for mu in the open
/// channel, omega < mu < 3 omega.  The outgoing_bc method imposes a
/// discrete-dispersion-matched radiation condition at r = R on the open
/// component and evanescent decay on the closed one; eps_extrapolation
/// solves at mu + i eps over eps0, eps0/2, eps0/4 behind an absorbing tail
/// and Richardson-extrapolates pointwise to eps -> 0.
Spinor solve_outgoing(const LinearizedSystem& system, double mu, const Spinor& g,
                      OutgoingMethod method, const ResolventOptions& opts = {});

/// Real bounded generalized eigenfunction of H at energy mu in the open
/// channel, with the open-channel tail amplitude data needed for spectral
/// (delta-function) evaluations:
///   v-space tail  Y1(r) ~ alpha sin(q r + delta0),  k_eff = sin(q h)/h.
struct GeneralizedEigenfunction {
    Spinor Y;
    double alpha2;  // squared amplitude of the symmetrized open-channel tail
    double k_eff;
    double q;
};

GeneralizedEigenfunction generalized_eigenfunction(const LinearizedSystem& system, double mu);

/// Im <R(mu+i0) g, w> evaluated through the generalized eigenfunction
/// (spectral-measure route); g and w must be real and localized.
double spectral_imag_pairing(const LinearizedSystem& system, double mu, const Spinor& g,
                             const Spinor& w);

}  // namespace nlslab

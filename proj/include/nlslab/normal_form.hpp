#pragma once

#include <map>
#include <string>

#include "nlslab/linearization.hpp"
#include "nlslab/resolvent.hpp"
#include "nlslab/taylor.hpp"

namespace nlslab {

struct NormalFormError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sources, correctors and ODE dual vectors of the normal-form expansion.
///
/// Level k carries the sources Phi^{(k)}_{m,n} (m+n = k+1) entering the
/// dispersive equation and the correctors Psi^{(k)}_{m,n} obtained from the
/// resolvent at energy (m-n) lambda.  The top-level pair (N+1,0)/(0,N+1)
/// sits in the continuous spectrum and is resolved by limiting absorption.
struct NormalFormPackage {
    int N = 1;
    double omega = 0.0;
    double lambda = 0.0;

    std::map<std::tuple<int, int, int>, Spinor> Phi;  // (level, m, n) -> source
    std::map<std::tuple<int, int, int>, Spinor> Psi;  // off-resonant correctors (real)
    Spinor Psi_resonant;        // Psi^{(N)}_{N+1,0}, complex
    Spinor Psi_resonant_conj;   // Psi^{(N)}_{0,N+1} = sigma1 conj(Psi^{(N)}_{N+1,0})

    // dual vectors of the modulation ODE (m+n = 1..N)
    std::map<std::pair<int, int>, Spinor> alpha;      // i d(omega)/dt row
    std::map<std::pair<int, int>, Spinor> beta_dual;  // d(gamma)/dt row
    std::map<std::pair<int, int>, Spinor> gamma;      // i dz/dt - lambda z row
    Spinor gamma_resonant;                            // gamma^{(N)}_{0,N} (leading term)

    // quadratic polynomial coefficients of the leading modulation ODE
    std::map<std::pair<int, int>, double> p2, q2, r2;

    const Spinor& phi_source(int level, int m, int n) const { return Phi.at({level, m, n}); }
    const Spinor& resonant_source() const { return Phi.at({N, N + 1, 0}); }
};

/// Build the sources Phi^{(k)} and correctors Psi^{(k)} up to level N
/// (N = 1 or 2) together with the resonant pair.  The Taylor coefficients
/// must carry order N+1.
NormalFormPackage build_sources(const LinearizedSystem& system, const TaylorCoefficients& taylor,
                                int N, OutgoingMethod method = OutgoingMethod::OutgoingBC,
                                const ResolventOptions& opts = {});

/// Attach the ODE dual vectors alpha/beta/gamma_{m,n} (m+n <= N) and the
/// resonant dual gamma^{(N)}_{0,N} (leading term) to the package.
void build_ode_duals(const LinearizedSystem& system, const TaylorCoefficients& taylor,
                     NormalFormPackage& package);

}  // namespace nlslab

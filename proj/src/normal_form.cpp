#include "nlslab/normal_form.hpp"

#include <cmath>

namespace nlslab {

namespace {

/// Distances from (m-n) lambda to the point spectrum {0, +-lambda}; the gap
/// resolvent must stay clear of these except for the handled m = n case.
void guard_off_resonance(const LinearizedSystem& sys, int m, int n) {
    const double mu = (m - n) * sys.lambda();
    if (m == n) return;  // solved in the deflated subspace
    const double omega = sys.omega();
    const double d0 = std::abs(mu);
    const double d1 = std::abs(std::abs(mu) - sys.lambda());
    if (d0 < 1e-8 * omega || d1 < 1e-8 * omega)
        throw NormalFormError("near-resonance at pair (" + std::to_string(m) + "," +
                              std::to_string(n) + "): (m-n) lambda hits the point spectrum");
}

}  // namespace

NormalFormPackage build_sources(const LinearizedSystem& system, const TaylorCoefficients& taylor,
                                int N, OutgoingMethod method, const ResolventOptions& opts) {
    if (N < 1 || N > 2)
        throw NormalFormError("normal-form levels implemented for N = 1 and N = 2 only");
    if (!system.has_mode()) throw NormalFormError("build_sources requires the internal mode");
    if (system.resonance_index() != N)
        throw NormalFormError("requested N does not match the resonance index of the system");
    if (taylor.order < N + 1)
        throw NormalFormError("Taylor coefficients do not carry order N+1");

    NormalFormPackage pkg;
    pkg.N = N;
    pkg.omega = system.omega();
    pkg.lambda = system.lambda();

    // ---- level 1: Phi^{(1)}_{m,n} = P_c Lambda_{m,n} -----------------------
    for (auto [m, n] : {std::pair{2, 0}, std::pair{1, 1}, std::pair{0, 2}}) {
        pkg.Phi[{1, m, n}] = system.project_continuous(taylor.lambda(m, n));
    }

    // leading quadratic coefficients of the modulation ODE
    const Spinor cPhi = system.Phi();
    const Spinor s3dPhi = sigma3(system.dPhi());
    const Spinor s3xi = sigma3(system.xi());
    const double mslope = system.mass_slope();
    for (auto [m, n] : {std::pair{2, 0}, std::pair{1, 1}, std::pair{0, 2}}) {
        const Spinor& lam = taylor.lambda(m, n);
        pkg.p2[{m, n}] = inner(system.grid(), lam, cPhi).real() / mslope;
        pkg.q2[{m, n}] = -inner(system.grid(), lam, s3dPhi).real() / mslope;
        pkg.r2[{m, n}] = inner(system.grid(), lam, s3xi).real();
    }

    const double lambda = system.lambda();
    if (N == 1) {
        pkg.Psi[{1, 1, 1}] = -1.0 * solve_gap_deflated(system, 0.0, pkg.Phi.at({1, 1, 1}));
    } else {
        // off-resonant correctors of level 1 (2 lambda lies in the gap)
        guard_off_resonance(system, 2, 0);
        Spinor psi20 = -1.0 * solve_gap(system, 2.0 * lambda, pkg.Phi.at({1, 2, 0}), opts);
        pkg.Psi[{1, 1, 1}] = -1.0 * solve_gap_deflated(system, 0.0, pkg.Phi.at({1, 1, 1}));
        pkg.Psi[{1, 0, 2}] = sigma1(psi20);
        pkg.Psi[{1, 2, 0}] = std::move(psi20);

        // ---- level 2 sources, leading modulation order ----------------------
        const Spinor xi = system.xi();
        const Spinor s1xi = sigma1(xi);
        const Spinor dxi = system.dxi();
        const Spinor s1dxi = sigma1(dxi);
        auto r2 = [&](int m, int n) { return pkg.r2.at({m, n}); };
        auto q2 = [&](int m, int n) { return pkg.q2.at({m, n}); };
        auto p2 = [&](int m, int n) { return pkg.p2.at({m, n}); };
        const Spinor& P20 = pkg.Psi.at({1, 2, 0});
        const Spinor& P11 = pkg.Psi.at({1, 1, 1});
        const Spinor& P02 = pkg.Psi.at({1, 0, 2});

        // (3,0): Lambda_{3,0} - A_{1,0} Psi_{2,0}
        //        + q_{2,0} s3 xi - p_{2,0} dxi - 2 r_{2,0} Psi_{2,0} + r_{0,2} Psi_{1,1}
        Spinor t30 = taylor.lambda(3, 0) - taylor.coupling(1, 0).apply(P20) +
                     q2(2, 0) * sigma3(xi) - p2(2, 0) * dxi - 2.0 * r2(2, 0) * P20 +
                     r2(0, 2) * P11;
        // (2,1): Lambda_{2,1} - A_{1,0} Psi_{1,1} - A_{0,1} Psi_{2,0}
        //        + q_{1,1} s3 xi + q_{2,0} s3 s1 xi - p_{1,1} dxi - p_{2,0} s1 dxi
        //        - 2 r_{1,1} Psi_{2,0} + (r_{1,1} - r_{2,0}) Psi_{1,1} + 2 r_{0,2} Psi_{0,2}
        Spinor t21 = taylor.lambda(2, 1) - taylor.coupling(1, 0).apply(P11) -
                     taylor.coupling(0, 1).apply(P20) + q2(1, 1) * sigma3(xi) +
                     q2(2, 0) * sigma3(s1xi) - p2(1, 1) * dxi - p2(2, 0) * s1dxi -
                     2.0 * r2(1, 1) * P20 + (r2(1, 1) - r2(2, 0)) * P11 + 2.0 * r2(0, 2) * P02;
        Spinor phi30 = system.project_continuous(t30);
        Spinor phi21 = system.project_continuous(t21);
        pkg.Phi[{2, 0, 3}] = -1.0 * sigma1(phi30);
        pkg.Phi[{2, 1, 2}] = -1.0 * sigma1(phi21);
        pkg.Phi[{2, 3, 0}] = std::move(phi30);
        pkg.Phi[{2, 2, 1}] = std::move(phi21);
    }

    // ---- resonant pair -----------------------------------------------------
    const double mu = (N + 1) * lambda;
    const Spinor& src = pkg.Phi.at({N, N + 1, 0});
    pkg.Psi_resonant = -1.0 * solve_outgoing(system, mu, src, method, opts);
    pkg.Psi_resonant_conj = sigma1(conj(pkg.Psi_resonant));
    return pkg;
}

void build_ode_duals(const LinearizedSystem& system, const TaylorCoefficients& taylor,
                     NormalFormPackage& package) {
    const int N = package.N;
    if (taylor.order < N + 1) throw NormalFormError("Taylor coefficients too shallow for duals");
    const double mslope = system.mass_slope();
    if (std::abs(mslope) < 1e-12 * norm(system.grid(), system.phi()))
        throw NormalFormError("modulation matrix near-singular: dM/domega vanishes");

    const Spinor cPhi = system.Phi();
    const Spinor s3dPhi = sigma3(system.dPhi());
    const Spinor s3xi = sigma3(system.xi());
    std::vector<std::pair<int, int>> idx = {{1, 0}, {0, 1}};
    if (N >= 2) idx.insert(idx.end(), {{2, 0}, {1, 1}, {0, 2}});
    for (auto [m, n] : idx) {
        const MatrixField& A = taylor.coupling(m, n);
        package.alpha[{m, n}] =
            system.project_continuous_adjoint((1.0 / mslope) * A.apply_transpose(cPhi));
        package.beta_dual[{m, n}] =
            system.project_continuous_adjoint((-1.0 / mslope) * A.apply_transpose(s3dPhi));
        package.gamma[{m, n}] = system.project_continuous_adjoint(A.apply_transpose(s3xi));
    }
    package.gamma_resonant = package.gamma.at({0, N});
}

}  // namespace nlslab

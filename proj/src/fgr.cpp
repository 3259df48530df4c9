#include "nlslab/fgr.hpp"

#include <cmath>
#include <limits>

namespace nlslab {

FgrReport compute_gamma(const LinearizedSystem& system, const NormalFormPackage& package,
                        const FgrOptions& opts) {
    if (!system.has_mode()) throw SpectralError("compute_gamma requires the internal mode");
    const int N = package.N;
    const double lambda = system.lambda();
    const double omega = system.omega();
    const double mu = (N + 1) * lambda;
    if (mu - omega <= opts.channel_margin * omega)
        throw ResolventError("below channel threshold: (N+1) lambda does not clear omega");

    FgrReport rep;
    rep.omega = omega;
    rep.lambda = lambda;
    rep.N = N;
    rep.mu = mu;
    rep.threshold = opts.gamma_threshold;

    const Spinor& src = package.resonant_source();
    const Spinor& dual = package.gamma_resonant;
    const RadialGrid& grid = system.grid();

    Spinor psi_bc = solve_outgoing(system, mu, src, OutgoingMethod::OutgoingBC, opts.resolvent);
    Spinor psi_eps =
        solve_outgoing(system, mu, src, OutgoingMethod::EpsExtrapolation, opts.resolvent);
    rep.gamma_bc = inner(grid, psi_bc, dual).imag();
    rep.gamma_eps = inner(grid, psi_eps, dual).imag();
    rep.gamma_delta = spectral_imag_pairing(system, mu, src, dual);

    // degeneracy floor: 1e-3 of the dimensional reference scale
    RealField asrc = (src.up.abs2() + src.dn.abs2()).sqrt();
    RealField adual = (dual.up.abs2() + dual.dn.abs2()).sqrt();
    rep.noise_floor = 1e-3 * (grid.weights() * asrc * adual).sum();

    const double mag = std::max({std::abs(rep.gamma_bc), std::abs(rep.gamma_eps),
                                 std::abs(rep.gamma_delta)});
    const double denom = std::max(mag, rep.noise_floor);
    rep.cross_bc_eps = std::abs(rep.gamma_bc - rep.gamma_eps) / denom;
    rep.cross_res_delta = std::abs(rep.gamma_bc - rep.gamma_delta) / denom;
    rep.degenerate = mag < rep.noise_floor;
    rep.sign = rep.degenerate ? 0 : (rep.gamma_bc > 0 ? 1 : -1);

    if (rep.cross_bc_eps > opts.cross_tol)
        throw ResolventError("limiting absorption unresolved, refine grid (method spread " +
                             std::to_string(rep.cross_bc_eps) + ")");
    rep.hypothesis_pass = !rep.degenerate && std::abs(rep.gamma_bc) > opts.gamma_threshold &&
                          rep.cross_res_delta <= opts.cross_tol;
    return rep;
}

ScanResult gamma_scan(const NonlinearitySpec& spec, const RadialGrid& grid,
                      const std::vector<double>& omegas, const FgrOptions& opts) {
    ScanResult result;
    result.inf_abs_gamma = std::numeric_limits<double>::infinity();
    RealField warm_phi;
    double warm_lambda2 = -1.0;
    for (double omega : omegas) {
        ScanEntry entry;
        entry.omega = omega;
        try {
            LinearizedSystem sys =
                assemble_system(spec, grid, omega, warm_phi.size() ? &warm_phi : nullptr);
            warm_phi = sys.phi();
            bool mode_set = false;
            if (warm_lambda2 > 0.0 && warm_lambda2 < omega * omega) {
                auto [l2, svec] = refine_product_eigen(sys, warm_lambda2);
                if (l2 > 1e-4 * omega * omega && l2 < omega * omega) {
                    ModeRefinement ref = mode_from_product(sys, std::sqrt(l2), svec);
                    if (ref.residual <= 1e-7 && ref.lambda > 0.0 && ref.lambda < omega) {
                        sys.set_mode(ref.lambda, ref.xi);
                        mode_set = true;
                    }
                }
            }
            if (!mode_set) {
                SpectrumReport sr = discrete_spectrum(sys);
                if (!sys.has_mode())
                    throw SpectralError(sr.modes.empty() ? "no internal mode in the gap"
                                                         : sr.note);
            }
            warm_lambda2 = sys.lambda() * sys.lambda();
            TaylorCoefficients tc =
                taylor_nonlinearity(spec, sys.phi(), sys.xi(), sys.resonance_index() + 1);
            NormalFormPackage pkg = build_sources(sys, tc, sys.resonance_index(),
                                                  OutgoingMethod::OutgoingBC, opts.resolvent);
            build_ode_duals(sys, tc, pkg);
            entry.report = compute_gamma(sys, pkg, opts);
        } catch (const std::exception& e) {
            entry.error = e.what();
        }
        if (entry.report && !entry.report->degenerate) {
            result.inf_abs_gamma = std::min(result.inf_abs_gamma,
                                            std::abs(entry.report->gamma_bc));
            ++result.usable;
        }
        result.entries.push_back(std::move(entry));
    }
    result.hypothesis_pass =
        result.usable > 0 && result.inf_abs_gamma > opts.gamma_threshold;
    return result;
}

}  // namespace nlslab

#include "nlslab/ground_state.hpp"

#include <algorithm>
#include <cmath>

namespace nlslab {

SymTridiag radial_operator(const RadialGrid& grid, const RealField& pot) {
    const int m = grid.size();
    const double ih2 = 1.0 / (grid.h() * grid.h());
    SymTridiag t;
    t.diag = 2.0 * ih2 + grid.centrifugal() + pot;
    t.off = Eigen::ArrayXd::Constant(m - 1, -ih2);
    return t;
}

SymTridiag make_lplus(const NonlinearitySpec& spec, const RadialGrid& grid, double omega,
                      const RealField& phi) {
    const int m = grid.size();
    RealField pot(m);
    for (int j = 0; j < m; ++j) {
        const double s = phi[j] * phi[j];
        pot[j] = omega - spec.eval(s, 0) - 2.0 * spec.eval(s, 1) * s;
    }
    return radial_operator(grid, pot);
}

SymTridiag make_lminus(const NonlinearitySpec& spec, const RadialGrid& grid, double omega,
                       const RealField& phi) {
    const int m = grid.size();
    RealField pot(m);
    for (int j = 0; j < m; ++j) pot[j] = omega - spec.eval(phi[j] * phi[j], 0);
    return radial_operator(grid, pot);
}

double ground_state_residual(const NonlinearitySpec& spec, const RadialGrid& grid, double omega,
                             const RealField& phi) {
    SymTridiag lm = make_lminus(spec, grid, omega, phi);
    RealField v = grid.sym_factor() * phi;
    RealField res = lm.apply(v) / grid.sym_factor();
    return norm(grid, res) / norm(grid, phi);
}

namespace {

enum class ShotOutcome { Node, DivergedPositive, Bounce, Undecided };

struct ShotResult {
    ShotOutcome outcome;
    double min_value;
    double final_value;
};

/// Integrate u'' + (d-1)/r u' = omega u - beta(u^2) u outward by RK4 and
/// classify the trajectory for bisection on u(0).
ShotResult shoot(const NonlinearitySpec& spec, int d, double omega, double u0, double rmax,
                 double step, std::vector<double>* profile_r = nullptr,
                 std::vector<double>* profile_u = nullptr) {
    auto rhs = [&](double r, double u, double p) {
        double f = omega * u - spec.eval(std::max(u * u, 0.0), 0) * u;
        return std::make_pair(p, f - (d - 1) / r * p);
    };
    // series start: u(r) = u0 + u''(0) r^2/2, Lap u(0) = d u''(0)
    double r = std::min(1e-3, step);
    double upp0 = (omega * u0 - spec.eval(u0 * u0, 0) * u0) / d;
    double u = u0 + 0.5 * upp0 * r * r;
    double p = upp0 * r;
    double umin = u0;
    const double diverge = 2.0 * std::abs(u0) + 1.0;
    while (r < rmax) {
        auto [k1u, k1p] = rhs(r, u, p);
        auto [k2u, k2p] = rhs(r + 0.5 * step, u + 0.5 * step * k1u, p + 0.5 * step * k1p);
        auto [k3u, k3p] = rhs(r + 0.5 * step, u + 0.5 * step * k2u, p + 0.5 * step * k2p);
        auto [k4u, k4p] = rhs(r + step, u + step * k3u, p + step * k3p);
        u += step / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        p += step / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        r += step;
        if (profile_r) {
            profile_r->push_back(r);
            profile_u->push_back(u);
        }
        umin = std::min(umin, u);
        if (u <= 0.0) return {ShotOutcome::Node, umin, u};
        if (u > diverge && p > 0.0) return {ShotOutcome::DivergedPositive, umin, u};
        // turned around while still positive, after a genuine decreasing phase
        if (p > 0.0 && umin < 0.7 * u0 && u > 1e-4 * u0 && u < diverge)
            return {ShotOutcome::Bounce, umin, u};
    }
    return {ShotOutcome::Undecided, umin, u};
}

RealField shoot_profile(const NonlinearitySpec& spec, const RadialGrid& grid, double omega,
                        double u0) {
    std::vector<double> rr, uu;
    rr.reserve(1 << 16);
    uu.reserve(1 << 16);
    const double step = std::min(grid.h() * 0.5, 0.01 / std::sqrt(std::max(omega, 0.25)));
    shoot(spec, grid.dim(), omega, u0, grid.radius(), step, &rr, &uu);
    RealField phi = RealField::Zero(grid.size());
    const double rate = std::sqrt(omega);
    size_t k = 0;
    double last_positive = u0;
    double last_r = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
        const double rj = grid.r()[j];
        while (k + 1 < rr.size() && rr[k + 1] < rj) ++k;
        if (k + 1 < rr.size() && uu[k] > 0.0 && uu[k + 1] > 0.0) {
            const double t = (rj - rr[k]) / (rr[k + 1] - rr[k]);
            phi[j] = (1 - t) * uu[k] + t * uu[k + 1];
            last_positive = phi[j];
            last_r = rj;
        } else {
            // extend with the exponential tail once the shot leaves the window
            phi[j] = last_positive * std::exp(-rate * (rj - last_r));
        }
        phi[j] = std::max(phi[j], 0.0);
    }
    return phi;
}

/// Bisection for the shooting amplitude.  The nodal window need not extend
/// to infinity (saturating nonlinearities re-diverge at large amplitude), so
/// bracket from a fine upward scan, then bisect over the first transition
/// from positive divergence to a node.
double shooting_amplitude(const NonlinearitySpec& spec, int d, double omega, double rmax,
                          double step) {
    const double scale = std::sqrt(std::max(omega, 1e-8));
    double lo = 0.0, hi = 0.0;
    double prev = 0.02 * scale;
    int bounce_count = 0;
    ShotOutcome prev_out = shoot(spec, d, omega, prev, rmax, step).outcome;
    for (double u0 = prev * 1.07; u0 < 3e4 * scale; u0 *= 1.07) {
        ShotResult s = shoot(spec, d, omega, u0, rmax, step);
        if (s.outcome == ShotOutcome::Bounce) ++bounce_count;
        if (s.outcome == ShotOutcome::Node && prev_out != ShotOutcome::Node) {
            lo = prev;
            hi = u0;
            break;
        }
        prev = u0;
        prev_out = s.outcome;
    }
    if (hi == 0.0) {
        std::string why = bounce_count > 3
                              ? "trajectories turn around without a nodal crossing "
                                "(no decaying positive solution)"
                              : "no nodal crossing over the scanned amplitude range";
        throw GroundStateError("no ground state found at omega=" + std::to_string(omega) + ": " +
                               why);
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        ShotResult s = shoot(spec, d, omega, mid, rmax, step);
        if (s.outcome == ShotOutcome::Node)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

GroundState solve_ground_state(const NonlinearitySpec& spec, double omega,
                               const RadialGrid& grid, const RealField* initial_guess) {
    if (omega <= 0.0) throw GroundStateError("solve_ground_state requires omega > 0");
    if (spec.is_linear())
        throw GroundStateError("no ground state found at omega=" + std::to_string(omega) +
                               ": linear equation has no positive decaying solution");

    RealField phi;
    double shot_amp = 0.0;
    if (initial_guess && initial_guess->size() == grid.size() && initial_guess->maxCoeff() > 0) {
        phi = *initial_guess;
    } else {
        const double rmax = std::min(grid.radius(), 25.0 / std::sqrt(omega) + 5.0);
        shot_amp = shooting_amplitude(spec, grid.dim(), omega, rmax, 2e-3);
        phi = shoot_profile(spec, grid, omega, shot_amp);
    }

    // damped Newton on the symmetrized equation; the Jacobian is L_+
    const RealField& s = grid.sym_factor();
    double res = ground_state_residual(spec, grid, omega, phi);
    int iters = 0;
    for (; iters < 60 && res > 1e-11; ++iters) {
        SymTridiag lp = make_lplus(spec, grid, omega, phi);
        SymTridiag lm = make_lminus(spec, grid, omega, phi);
        RealField f = lm.apply(RealField(s * phi));  // residual in v-space
        RealField dv = tridiag_solve_shifted(lp, 0.0, f);
        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 10; ++bt) {
            RealField cand = phi - step * dv / s;
            double cres = ground_state_residual(spec, grid, omega, cand);
            if (cres < res * (1.0 - 0.1 * step) || cres < 1e-12) {
                phi = cand;
                res = cres;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (res < 1e-10) break;  // at the roundoff floor of the stencil
            throw GroundStateError("Newton stalled at omega=" + std::to_string(omega) +
                                   " (residual " + std::to_string(res) + ")");
        }
    }
    if (res > 1e-10)
        throw GroundStateError("Newton did not reach tolerance at omega=" +
                               std::to_string(omega));
    if (phi.minCoeff() <= 0.0)
        throw GroundStateError("solution at omega=" + std::to_string(omega) +
                               " has nodes; not a ground state");
    return {omega, std::move(phi), res, iters, shot_amp};
}

H5Report check_H5(const NonlinearitySpec& spec, const RadialGrid& grid, double omega,
                  const RealField& phi) {
    SymTridiag lp = make_lplus(spec, grid, omega, phi);
    const int below = lp.count_below(0.0);
    double gap;
    if (below == 0) {
        gap = lp.eigenvalue_by_index(0);
    } else {
        const double under = lp.eigenvalue_by_index(below - 1);
        const double over = lp.eigenvalue_by_index(below);
        gap = std::min(std::abs(under), std::abs(over));
    }
    const double lowest = lp.eigenvalue_by_index(0);
    return {below, gap, lowest};
}

GroundStateBranch continue_branch(const NonlinearitySpec& spec,
                                  const std::vector<double>& omegas, const RadialGrid& grid) {
    GroundStateBranch branch;
    const RealField& s = grid.sym_factor();
    RealField guess;
    for (size_t i = 0; i < omegas.size(); ++i) {
        GroundState gs{};
        try {
            gs = solve_ground_state(spec, omegas[i], grid, guess.size() ? &guess : nullptr);
        } catch (const GroundStateError& e) {
            if (guess.size()) {
                // a warm start can mask a genuine fold; retry cold
                try {
                    gs = solve_ground_state(spec, omegas[i], grid, nullptr);
                } catch (const GroundStateError& e2) {
                    branch.truncated = true;
                    branch.truncation_reason = e2.what();
                    break;
                }
            } else {
                branch.truncated = true;
                branch.truncation_reason = e.what();
                break;
            }
        }
        guess = gs.phi;

        BranchSample sample;
        sample.omega = omegas[i];
        sample.phi = gs.phi;
        sample.residual = gs.residual;

        SymTridiag lp = make_lplus(spec, grid, omegas[i], gs.phi);
        RealField rhs = -(s * gs.phi);
        RealField dv = tridiag_solve_shifted(lp, 0.0, rhs);
        sample.dphi = dv / s;
        sample.dphi_residual =
            norm(grid, RealField((lp.apply(dv) + s * gs.phi) / s)) / norm(grid, gs.phi);

        sample.mass = norm(grid, gs.phi);
        sample.mass *= sample.mass;
        sample.dmass_pairing = 2.0 * (grid.weights() * gs.phi * sample.dphi).sum();

        H5Report h5 = check_H5(spec, grid, omegas[i], gs.phi);
        sample.h5_negative_count = h5.negative_count;
        sample.h5_kernel_gap = h5.kernel_gap;
        sample.dmass_fd = 0.0;  // filled below
        branch.samples.push_back(std::move(sample));
    }

    // centered finite differences of the mass curve
    auto& v = branch.samples;
    for (size_t i = 0; i < v.size(); ++i) {
        if (v.size() < 2) break;
        if (i == 0)
            v[i].dmass_fd = (v[1].mass - v[0].mass) / (v[1].omega - v[0].omega);
        else if (i + 1 == v.size())
            v[i].dmass_fd = (v[i].mass - v[i - 1].mass) / (v[i].omega - v[i - 1].omega);
        else
            v[i].dmass_fd = (v[i + 1].mass - v[i - 1].mass) / (v[i + 1].omega - v[i - 1].omega);
        if (i > 0 && i + 1 < v.size()) {
            double rel = std::abs(v[i].dmass_fd - v[i].dmass_pairing) /
                         std::max(std::abs(v[i].dmass_pairing), 1e-300);
            branch.max_slope_disagreement = std::max(branch.max_slope_disagreement, rel);
        }
    }
    branch.h4_pass = !v.empty();
    branch.h5_pass = !v.empty();
    for (auto& sm : v) {
        if (sm.dmass_pairing <= 0.0) branch.h4_pass = false;
        if (sm.h5_negative_count != 1) branch.h5_pass = false;
    }
    return branch;
}

double fit_tail_rate(const RadialGrid& grid, const RealField& f, double r_lo, double r_hi) {
    // least-squares slope of log f against r on [r_lo, r_hi]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int j = 0; j < grid.size(); ++j) {
        const double r = grid.r()[j];
        if (r < r_lo || r > r_hi) continue;
        const double v = std::abs(f[j]);
        if (v < 1e-280) continue;
        const double y = std::log(v);
        sx += r;
        sy += y;
        sxx += r * r;
        sxy += r * y;
        ++n;
    }
    if (n < 8) throw std::runtime_error("fit_tail_rate: window too small");
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

}  // namespace nlslab

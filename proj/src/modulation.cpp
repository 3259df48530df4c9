#include "nlslab/modulation.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "nlslab/ground_state.hpp"
#include "nlslab/tridiag.hpp"

namespace nlslab {

ModulationFamily::ModulationFamily(NonlinearitySpec spec, RadialGrid grid, double omega_ref)
    : spec_(std::move(spec)), grid_(std::move(grid)), omega_ref_(omega_ref) {
    LinearizedSystem sys = assemble_system(spec_, grid_, omega_ref_);
    discrete_spectrum(sys);
    if (!sys.has_mode())
        throw TubeError("modulation family requires an internal mode at the reference omega");
    ref_ = std::make_shared<LinearizedSystem>(std::move(sys));
    warm_phi_ = ref_->phi();
    warm_lambda2_ = ref_->lambda() * ref_->lambda();
    last_ = ref_;
}

ModulationFamily::GroundData ModulationFamily::ground(double omega) const {
    GroundState gs = solve_ground_state(spec_, omega, grid_,
                                        warm_phi_.size() ? &warm_phi_ : nullptr);
    warm_phi_ = gs.phi;
    GroundData d;
    d.omega = omega;
    d.phi = std::move(gs.phi);
    const RealField& sy = grid_.sym_factor();
    SymTridiag lp = make_lplus(spec_, grid_, omega, d.phi);
    RealField dv = tridiag_solve_shifted(lp, 0.0, RealField(-(sy * d.phi)));
    d.dphi = dv / sy;
    // L_+ d2phi = -dphi - (d_omega L_+) dphi,
    // d_omega L_+ = 1 - 2 phi dphi (3 beta' + 2 beta'' phi^2)
    RealField dlp(grid_.size());
    for (int j = 0; j < grid_.size(); ++j) {
        const double s = d.phi[j] * d.phi[j];
        dlp[j] = 1.0 - 2.0 * d.phi[j] * d.dphi[j] *
                           (3.0 * spec_.eval(s, 1) + 2.0 * spec_.eval(s, 2) * s);
    }
    RealField rhs2 = -(sy * d.dphi) - sy * (dlp * d.dphi);
    RealField d2v = tridiag_solve_shifted(lp, 0.0, rhs2);
    d.d2phi = d2v / sy;
    d.mass = (grid_.weights() * d.phi.square()).sum();
    d.mass_slope = 2.0 * (grid_.weights() * d.phi * d.dphi).sum();
    return d;
}

std::shared_ptr<const LinearizedSystem> ModulationFamily::system(double omega) const {
    if (last_ && last_->omega() == omega) return last_;
    LinearizedSystem sys = assemble_system(spec_, grid_, omega,
                                           warm_phi_.size() ? &warm_phi_ : nullptr);
    warm_phi_ = sys.phi();
    bool ok = false;
    if (warm_lambda2_ > 0.0) {
        auto [l2, svec] = refine_product_eigen(sys, warm_lambda2_);
        if (l2 > 0.0 && l2 < omega * omega) {
            ModeRefinement ref = mode_from_product(sys, std::sqrt(l2), svec);
            if (ref.residual <= 1e-7 && ref.lambda > 0.0 && ref.lambda < omega) {
                sys.set_mode(ref.lambda, ref.xi);
                ok = true;
            }
        }
    }
    if (!ok) {
        discrete_spectrum(sys);
        if (!sys.has_mode()) throw TubeError("internal mode lost along the continuation");
    }
    warm_lambda2_ = sys.lambda() * sys.lambda();
    last_ = std::make_shared<LinearizedSystem>(std::move(sys));
    return last_;
}

namespace {

struct Constraints {
    double c1, c2;
    double d1_th, d1_om, d2_th, d2_om;
};

Constraints eval_constraints(const RadialGrid& grid, const ComplexField& u,
                             const ModulationFamily::GroundData& gd, double theta) {
    ComplexField w = std::polar(1.0, -theta) * u;
    const RealField& wt = grid.weights();
    Constraints c;
    c.c1 = (wt * (w.real() - gd.phi) * gd.phi).sum();
    c.c2 = (wt * w.imag() * gd.dphi).sum();
    c.d1_th = (wt * w.imag() * gd.phi).sum();
    c.d1_om = (wt * (w.real() * gd.dphi - 2.0 * gd.phi * gd.dphi)).sum();
    c.d2_th = -(wt * w.real() * gd.dphi).sum();
    c.d2_om = (wt * w.imag() * gd.d2phi).sum();
    return c;
}

}  // namespace

ModulationState decompose(const ComplexField& u, const ModulationFamily& family,
                          double omega_guess, double theta_guess) {
    const RadialGrid& grid = family.grid();
    if (u.size() != grid.size()) throw TubeError("decompose: field/grid mismatch");
    double omega = omega_guess, theta = theta_guess;
    const double uscale = norm(grid, u);
    bool converged = false;
    ModulationFamily::GroundData gd = family.ground(omega);
    for (int it = 0; it < 40; ++it) {
        Constraints c = eval_constraints(grid, u, gd, theta);
        const double det = c.d1_om * c.d2_th - c.d1_th * c.d2_om;
        if (std::abs(det) < 1e-14 * uscale * uscale)
            throw TubeError("outside modulation tube: singular orthogonality Jacobian");
        const double dom = (-c.c1 * c.d2_th + c.c2 * c.d1_th) / det;
        const double dth = (-c.d1_om * c.c2 + c.d2_om * c.c1) / det;
        omega += dom;
        theta += dth;
        if (!(omega > 0.0)) throw TubeError("outside modulation tube: omega left the branch");
        gd = family.ground(omega);
        if (std::abs(dom) < 1e-13 * std::max(omega, 1.0) && std::abs(dth) < 1e-13) {
            converged = true;
            break;
        }
    }
    if (!converged) throw TubeError("outside modulation tube: Newton did not converge");

    auto sys = family.system(omega);
    ModulationState st;
    st.omega = omega;
    st.theta = theta;
    ComplexField r = std::polar(1.0, -theta) * u - gd.phi.cast<Complex>();
    Spinor R = lift(r);
    st.z = inner(grid, R, sigma3(sys->xi()));
    st.f = R - st.z * sys->xi() - std::conj(st.z) * sigma1(sys->xi());

    const double nr = std::max(norm(grid, R), 1e-300);
    double res = std::abs(inner(grid, R, sys->Phi())) / nr;
    res = std::max(res, std::abs(inner(grid, R, sigma3(sys->dPhi()))) / nr);
    res = std::max(res, std::abs(inner(grid, st.f, sigma3(sys->xi()))) / nr);
    res = std::max(res, std::abs(inner(grid, st.f, sigma3(sigma1(sys->xi())))) / nr);
    st.orthogonality_residual = res;

    // H^1 distance to the reference orbit (gauge-minimized)
    const LinearizedSystem& ref = family.reference();
    ComplexField phi0 = ref.phi().cast<Complex>();
    ComplexField du = radial_derivative(grid, u), dphi0 = radial_derivative(grid, phi0);
    Complex h1ip = (grid.weights() * (u * phi0.conjugate() + du * dphi0.conjugate())).sum();
    const double nu2 = (grid.weights() * (u.abs2() + du.abs2())).sum();
    const double np2 = (grid.weights() * (phi0.abs2() + dphi0.abs2())).sum();
    st.tube_distance = std::sqrt(std::max(0.0, nu2 + np2 - 2.0 * std::abs(h1ip)));
    return st;
}

ModulationRates modulation_rates(const ComplexField& u, const ModulationState& state,
                                 const ModulationFamily& family) {
    const RadialGrid& grid = family.grid();
    const NonlinearitySpec& spec = family.spec();
    const RealField& sy = grid.sym_factor();

    // discrete u_t = i (Lap u + beta(|u|^2) u), same stencil as the evolution
    SymTridiag kin = radial_operator(grid, RealField::Zero(grid.size()));
    ComplexField lap_u = -kin.apply(ComplexField(u * sy.cast<Complex>())) / sy.cast<Complex>();
    ComplexField udot(grid.size());
    for (int j = 0; j < grid.size(); ++j)
        udot[j] = Complex(0, 1) * (lap_u[j] + spec.eval(std::norm(u[j]), 0) * u[j]);

    ModulationFamily::GroundData gd = family.ground(state.omega);
    Constraints c = eval_constraints(grid, u, gd, state.theta);
    ComplexField wdot = std::polar(1.0, -state.theta) * udot;
    const RealField& wt = grid.weights();
    const double b1 = -(wt * wdot.real() * gd.phi).sum();
    const double b2 = -(wt * wdot.imag() * gd.dphi).sum();
    const double det = c.d1_om * c.d2_th - c.d1_th * c.d2_om;
    ModulationRates rates;
    rates.omega_dot = (b1 * c.d2_th - c.d1_th * b2) / det;
    const double theta_dot = (c.d1_om * b2 - b1 * c.d2_om) / det;
    rates.gamma_dot = theta_dot - state.omega;

    auto sys = family.system(state.omega);
    ComplexField r = std::polar(1.0, -state.theta) * u - gd.phi.cast<Complex>();
    ComplexField rdot = Complex(0, -1) * theta_dot * (std::polar(1.0, -state.theta) * u) + wdot -
                        rates.omega_dot * gd.dphi.cast<Complex>();
    Spinor R = lift(r), Rdot = lift(rdot);
    Complex zdot = inner(grid, Rdot, sigma3(sys->xi()));
    zdot += rates.omega_dot * inner(grid, R, sigma3(sys->dxi()));
    rates.z_dot = zdot;
    return rates;
}

DampingFit fit_damping(const std::vector<double>& times, const std::vector<double>& abs_z, int N,
                       double lambda, int min_samples) {
    DampingFit fit;
    const int n = static_cast<int>(times.size());
    if (n < min_samples) {
        fit.reason = "fit unreliable: window too short";
        return fit;
    }
    const double dt = times[1] - times[0];
    double zmax = 0.0;
    for (double z : abs_z) zmax = std::max(zmax, z);
    if (zmax < 1e-9) {
        fit.reason = "fit unreliable: no discrete-mode signal";
        return fit;
    }

    // zero-phase moving average over one mode period removes the |z|^2 ripple
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = abs_z[i] * abs_z[i];
    int half = std::max(1, static_cast<int>(std::lround(M_PI / (lambda * dt))));
    std::vector<double> ys(n, 0.0);
    for (int i = 0; i < n; ++i) {
        int a = std::max(0, i - half), b = std::min(n - 1, i + half);
        double acc = 0.0;
        for (int k = a; k <= b; ++k) acc += y[k];
        ys[i] = acc / (b - a + 1);
    }
    // centered derivative on the interior of the smoothed series
    const int lo = half + 1, hi = n - half - 2;
    if (hi - lo < min_samples) {
        fit.reason = "fit unreliable: window too short after smoothing";
        return fit;
    }
    std::vector<double> dy(n, 0.0);
    for (int i = lo; i <= hi; ++i) dy[i] = (ys[i + 1] - ys[i - 1]) / (2.0 * dt);

    // window scan: contiguous blocks, pick the minimal-residual power-law fit
    auto fit_window = [&](int a, int b, double& c_out, double& res_out) {
        double sxx = 0.0, sxy = 0.0;
        for (int i = a; i <= b; ++i) {
            const double x = std::pow(ys[i], N + 1);
            sxx += x * x;
            sxy += x * dy[i];
        }
        c_out = sxx > 0 ? sxy / sxx : 0.0;
        double num = 0.0, den = 0.0;
        for (int i = a; i <= b; ++i) {
            const double x = std::pow(ys[i], N + 1);
            num += (dy[i] - c_out * x) * (dy[i] - c_out * x);
            den += dy[i] * dy[i];
        }
        res_out = den > 0 ? std::sqrt(num / den) : 1.0;
    };

    const int nwin = 8;
    double best_res = 1e300, best_c = 0.0;
    int best_a = lo, best_b = hi;
    for (int wa = 0; wa < nwin; ++wa) {
        for (int wb = wa + 1; wb <= nwin; ++wb) {
            int a = lo + (hi - lo) * wa / nwin;
            int b = lo + (hi - lo) * wb / nwin;
            if (b - a < min_samples) continue;
            double cc, rr;
            fit_window(a, b, cc, rr);
            if (rr < best_res) {
                best_res = rr;
                best_c = cc;
                best_a = a;
                best_b = b;
            }
        }
    }
    fit.window_begin = best_a;
    fit.window_end = best_b;
    fit.rel_residual = best_res;
    fit.gamma_fit = 0.5 * best_c;
    fit.damping_sign = best_c < 0 ? 1 : -1;

    // free-exponent fit: log |dy| against log |z| over the chosen window
    double sx = 0, sy2 = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int i = best_a; i <= best_b; ++i) {
        if (std::abs(dy[i]) < 1e-300 || ys[i] < 1e-300) continue;
        const double X = 0.5 * std::log(ys[i]);  // log |z|
        const double Y = std::log(std::abs(dy[i]));
        sx += X;
        sy2 += Y;
        sxx += X * X;
        sxy += X * Y;
        ++cnt;
    }
    if (cnt > 10) fit.exponent = (cnt * sxy - sx * sy2) / (cnt * sxx - sx * sx);

    if (best_b - best_a < min_samples) {
        fit.reason = "fit unreliable: window too short";
        return fit;
    }
    if (best_res > 0.2) {
        fit.reason = "fit unreliable: residual above 20%";
        return fit;
    }
    fit.reliable = true;
    return fit;
}

TrackResult track(const Trajectory& traj, const ModulationFamily& family,
                  const TrackOptions& opts) {
    TrackResult out;
    const LinearizedSystem& ref = family.reference();
    out.N = ref.resonance_index();
    out.lambda_ref = ref.lambda();
    out.s1 = opts.s1;
    const RadialGrid& grid = family.grid();

    double omega_guess = ref.omega();
    double theta_guess = 0.0;
    double t_prev = 0.0;
    double integral = 0.0;
    double prev_pow = 0.0;
    Complex z_prev{0.0, 0.0};
    bool have_prev = false;
    std::vector<double> theta_hist, omega_hist;

    for (size_t i = 0; i < traj.fields.size(); ++i) {
        const double t = traj.times[i];
        ModulationState st;
        try {
            st = decompose(traj.fields[i], family, omega_guess, theta_guess);
        } catch (const TubeError&) {
            out.tube_exited = true;
            out.tube_exit_time = t;
            break;
        }
        st.t = t;
        const double tube_max = opts.tube_radius * norm(grid, ref.phi());
        if (st.tube_distance > tube_max) {
            out.tube_exited = true;
            out.tube_exit_time = t;
            break;
        }
        // gamma = theta - int omega dt along the track
        if (i == 0) {
            st.gamma = st.theta;
        } else {
            const double dtseg = t - t_prev;
            st.gamma = out.states.back().gamma +
                       (st.theta - out.states.back().theta) -
                       0.5 * (st.omega + out.states.back().omega) * dtseg;
        }
        const double pw = std::pow(std::abs(st.z), 2 * out.N + 2);
        if (i > 0) integral += 0.5 * (pw + prev_pow) * (t - t_prev);
        prev_pow = pw;

        if (have_prev) {
            const double dtseg = t - t_prev;
            const double allowed =
                10.0 * (out.lambda_ref * std::abs(z_prev) + 1e-6) * dtseg + 1e-10;
            if (std::abs(st.z - z_prev) > allowed) ++out.smoothness_violations;
        }
        z_prev = st.z;
        have_prev = true;

        out.f_h1.push_back(std::sqrt(std::norm(norm_h1(grid, st.f.up))) );
        out.f_weighted.push_back(norm_weighted(grid, st.f.up, opts.s1));
        out.running_integral.push_back(integral);
        t_prev = t;
        omega_guess = st.omega;
        theta_guess = st.theta + st.omega * (i + 1 < traj.times.size()
                                                 ? traj.times[i + 1] - t
                                                 : 0.0);
        out.states.push_back(std::move(st));
    }

    std::vector<double> tt, zz;
    for (auto& s : out.states) {
        tt.push_back(s.t);
        zz.push_back(std::abs(s.z));
    }
    if (tt.size() > 2) out.fit = fit_damping(tt, zz, out.N, out.lambda_ref, opts.fit_min_samples);
    return out;
}

}  // namespace nlslab

#include "nlslab/dynamics.hpp"

#include <cmath>

#include "nlslab/tridiag.hpp"

namespace nlslab {

void EvolutionConfig::validate(const NonlinearitySpec& spec, const ComplexField& u0) const {
    if (dt <= 0.0 || T <= 0.0 || stride < 1) throw EvolutionError("bad time stepping parameters");
    if (absorber_fraction < 0.0 || absorber_fraction > 0.25)
        throw EvolutionError("absorber width must lie in [0, 0.25] of the radius");
    double bmax = 0.0;
    for (int j = 0; j < u0.size(); ++j)
        bmax = std::max(bmax, std::abs(spec.eval(std::norm(u0[j]), 0)));
    const double bound = (scheme == Scheme::CrankNicolson) ? 1.0 : 2.0;
    if (dt * bmax > bound)
        throw EvolutionError("dt * max|beta| = " + std::to_string(dt * bmax) +
                             " violates the scheme stability criterion");
    if (sweeps < 1 || sweeps > 8) throw EvolutionError("sweeps must be in 1..8");
}

double mass_functional(const RadialGrid& grid, const ComplexField& u) {
    return (grid.weights() * u.abs2()).sum();
}

double energy_functional(const NonlinearitySpec& spec, const RadialGrid& grid,
                         const ComplexField& u) {
    ComplexField du = radial_derivative(grid, u);
    double e = (grid.weights() * du.abs2()).sum();
    for (int j = 0; j < grid.size(); ++j)
        e -= grid.weights()[j] * spec.antiderivative(u.abs2()[j]);
    return e;
}

namespace {

RealField cap_profile(const RadialGrid& grid, double fraction, double strength) {
    RealField cap = RealField::Zero(grid.size());
    if (fraction <= 0.0) return cap;
    const double r1 = grid.radius();
    const double r0 = r1 * (1.0 - fraction);
    const double amp = strength * 3.0 / (fraction * r1);
    for (int j = 0; j < grid.size(); ++j) {
        const double r = grid.r()[j];
        if (r > r0) {
            const double x = (r - r0) / (r1 - r0);
            cap[j] = amp * x * x * (3.0 - 2.0 * x);  // smooth ramp to amp
        }
    }
    return cap;
}

struct Stepper {
    const NonlinearitySpec& spec;
    const RadialGrid& grid;
    const EvolutionConfig& cfg;
    RealField cap;        // absorber profile
    RealField kinetic;    // 2/h^2 + centrifugal, v-space diagonal
    double offdiag;       // -1/h^2

    Stepper(const NonlinearitySpec& s, const RadialGrid& g, const EvolutionConfig& c)
        : spec(s), grid(g), cfg(c), cap(cap_profile(g, c.absorber_fraction, c.absorber_strength)) {
        const double ih2 = 1.0 / (g.h() * g.h());
        kinetic = 2.0 * ih2 + g.centrifugal();
        offdiag = -ih2;
    }

    /// One Crank-Nicolson step on the symmetrized field v; returns the
    /// relative change between the last two fixed-point sweeps.
    double step_cn(ComplexField& v) const {
        const int m = grid.size();
        const double half = 0.5 * cfg.dt;
        const RealField& sy = grid.sym_factor();
        ComplexField vold = v;
        ComplexField vnew = v;
        double sweep_change = 0.0;
        for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
            // nonlinear potential at the midpoint of the previous iterate
            ComplexField vmid = 0.5 * (vold + vnew);
            RealField beta_mid(m);
            for (int j = 0; j < m; ++j) {
                const double amp = std::norm(vmid[j] / sy[j]);
                beta_mid[j] = spec.eval(amp, 0);
            }
            // (I + half (i L + cap)) v_new = (I - half (i L + cap)) v_old,
            // L = kinetic - beta_mid (v-space), cap acts as real damping
            std::vector<Complex> dl(m - 1), d(m), du(m - 1), rhs(m);
            const Complex ihalf(0.0, half);
            for (int j = 0; j < m; ++j) {
                const double lj = kinetic[j] - beta_mid[j];
                d[j] = 1.0 + ihalf * lj + half * cap[j];
            }
            for (int j = 0; j + 1 < m; ++j) dl[j] = du[j] = ihalf * offdiag;
            // rhs = (I - half(iL + cap)) v_old
            for (int j = 0; j < m; ++j) {
                Complex acc = (1.0 - ihalf * (kinetic[j] - beta_mid[j]) - half * cap[j]) * vold[j];
                if (j > 0) acc -= ihalf * offdiag * vold[j - 1];
                if (j + 1 < m) acc -= ihalf * offdiag * vold[j + 1];
                rhs[j] = acc;
            }
            TridiagLU<Complex> lu;
            lu.factor(std::move(dl), std::move(d), std::move(du));
            std::vector<Complex> sol = lu.solve(std::move(rhs));
            ComplexField vn = Eigen::Map<ComplexField>(sol.data(), m);
            sweep_change = std::sqrt((vn - vnew).abs2().sum() / std::max(vn.abs2().sum(), 1e-300));
            vnew = std::move(vn);
        }
        v = std::move(vnew);
        return sweep_change;
    }

    /// Strang splitting: half nonlinear phase rotation (exact), full linear
    /// Cayley step (unitary), half nonlinear rotation.
    void step_strang(ComplexField& v, const TridiagLU<Complex>& cayley_lhs,
                     const RealField& sy) const {
        const int m = grid.size();
        auto rotate_half = [&](ComplexField& w) {
            for (int j = 0; j < m; ++j) {
                const double amp = std::norm(w[j] / sy[j]);
                const double phase = 0.5 * cfg.dt * spec.eval(amp, 0);
                double damp = std::exp(-0.5 * cfg.dt * cap[j]);
                w[j] *= std::polar(damp, phase);
            }
        };
        rotate_half(v);
        // (I + i dt/2 T) v+ = (I - i dt/2 T) v
        const Complex ihalf(0.0, 0.5 * cfg.dt);
        std::vector<Complex> rhs(m);
        for (int j = 0; j < m; ++j) {
            Complex acc = (1.0 - ihalf * kinetic[j]) * v[j];
            if (j > 0) acc -= ihalf * offdiag * v[j - 1];
            if (j + 1 < m) acc -= ihalf * offdiag * v[j + 1];
            rhs[j] = acc;
        }
        std::vector<Complex> sol = cayley_lhs.solve(std::move(rhs));
        v = Eigen::Map<ComplexField>(sol.data(), m);
        rotate_half(v);
    }
};

}  // namespace

Trajectory evolve(const NonlinearitySpec& spec, const RadialGrid& grid, const ComplexField& u0,
                  const EvolutionConfig& cfg,
                  const std::function<void(double, const ComplexField&)>& on_snapshot) {
    if (u0.size() != grid.size()) throw EvolutionError("initial data does not match the grid");
    cfg.validate(spec, u0);
    Stepper st(spec, grid, cfg);
    const RealField& sy = grid.sym_factor();
    ComplexField v = u0 * sy.cast<Complex>();

    // inner region for conservation diagnostics (ahead of the absorber)
    const double r_inner = grid.radius() * (1.0 - cfg.absorber_fraction) * 0.98;
    auto inner_mass = [&](const ComplexField& u) {
        double acc = 0.0;
        for (int j = 0; j < grid.size() && grid.r()[j] <= r_inner; ++j)
            acc += grid.weights()[j] * std::norm(u[j]);
        return acc;
    };

    TridiagLU<Complex> cayley;
    if (cfg.scheme == Scheme::StrangSplit) {
        const int m = grid.size();
        const Complex ihalf(0.0, 0.5 * cfg.dt);
        std::vector<Complex> dl(m - 1), d(m), du(m - 1);
        for (int j = 0; j < m; ++j) d[j] = 1.0 + ihalf * st.kinetic[j];
        for (int j = 0; j + 1 < m; ++j) dl[j] = du[j] = ihalf * st.offdiag;
        cayley.factor(std::move(dl), std::move(d), std::move(du));
    }

    Trajectory out;
    const long nsteps = std::lround(cfg.T / cfg.dt);
    const double m0 = mass_functional(grid, u0);
    const double e0 = energy_functional(spec, grid, u0);
    const double mi0 = inner_mass(u0);

    auto store = [&](double t, const ComplexField& u) {
        out.times.push_back(t);
        out.fields.push_back(u);
        if (on_snapshot) on_snapshot(t, u);
        const bool absorbing = cfg.absorber_fraction > 0.0;
        const double mnow = absorbing ? inner_mass(u) : mass_functional(grid, u);
        const double mref = absorbing ? mi0 : m0;
        const double mdrift = (mnow - mref) / std::max(mref, 1e-300);
        // with an absorber mass only leaves; track growth as drift, decay as physics
        out.mass_drift = std::max(out.mass_drift, absorbing ? std::max(mdrift, 0.0)
                                                            : std::abs(mdrift));
        if (!absorbing) {
            const double ed = std::abs(energy_functional(spec, grid, u) - e0) /
                              std::max(std::abs(e0), 1e-300);
            out.energy_drift = std::max(out.energy_drift, ed);
        }
    };

    store(0.0, u0);
    for (long step = 1; step <= nsteps; ++step) {
        if (cfg.scheme == Scheme::CrankNicolson) {
            const double change = st.step_cn(v);
            if (change > 0.1)
                throw EvolutionError("nonlinear midpoint iteration diverged at step " +
                                     std::to_string(step));
        } else {
            st.step_strang(v, cayley, sy);
        }
        if (step % cfg.stride == 0 || step == nsteps) {
            ComplexField u = v / sy.cast<Complex>();
            store(step * cfg.dt, u);
        }
    }
    return out;
}

InitialData make_initial_data(const LinearizedSystem& system, Complex z0, const Spinor* f0) {
    const RadialGrid& grid = system.grid();
    InitialData out;
    ComplexField u = system.phi().cast<Complex>();
    if (system.has_mode()) {
        u += z0 * system.xi().up + std::conj(z0) * system.xi().dn;
        const double rel = std::abs(z0) * norm(grid, system.xi()) / norm(grid, system.phi());
        out.amplitude_warning = rel > 0.3;
    } else if (z0 != Complex(0.0)) {
        throw EvolutionError("make_initial_data: z0 != 0 requires the internal mode");
    }
    if (f0) {
        check_same_grid(grid, *f0);
        Spinor fc = system.project_continuous(*f0);
        const double defect = norm(grid, fc - *f0);
        if (defect > 1e-9 * std::max(norm(grid, *f0), 1e-300)) {
            out.projected_f0 = true;
            u += fc.up;
        } else {
            u += f0->up;
        }
    }
    out.u0 = std::move(u);
    return out;
}

}  // namespace nlslab

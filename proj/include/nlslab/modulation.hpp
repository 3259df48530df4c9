#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/dynamics.hpp"
#include "nlslab/linearization.hpp"

namespace nlslab {

struct TubeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Lazily solved ground-state family used by the tracker; keeps warm-start
/// state for the frequency continuation along a trajectory.
class ModulationFamily {
   public:
    ModulationFamily(NonlinearitySpec spec, RadialGrid grid, double omega_ref);

    const RadialGrid& grid() const { return grid_; }
    const NonlinearitySpec& spec() const { return spec_; }
    const LinearizedSystem& reference() const { return *ref_; }
    double omega_ref() const { return omega_ref_; }

    struct GroundData {
        double omega;
        RealField phi, dphi, d2phi;
        double mass, mass_slope;
    };
    /// Ground state and its first two omega-derivatives at omega.
    GroundData ground(double omega) const;

    /// Full linearized system with the internal mode at omega (warm-started
    /// eigensolve along the continuation).
    std::shared_ptr<const LinearizedSystem> system(double omega) const;

   private:
    NonlinearitySpec spec_;
    RadialGrid grid_;
    double omega_ref_;
    std::shared_ptr<LinearizedSystem> ref_;
    mutable RealField warm_phi_;
    mutable double warm_lambda2_ = -1.0;
    mutable std::shared_ptr<const LinearizedSystem> last_;
};

struct ModulationState {
    double t = 0.0;
    double omega = 0.0;
    double theta = 0.0;  // total phase; gamma = theta - int omega dt
    double gamma = 0.0;
    Complex z{0.0, 0.0};
    Spinor f;
    double orthogonality_residual = 0.0;  // worst of the four pairing conditions
    double tube_distance = 0.0;           // H^1 distance to the reference orbit
};

/// Solve the two orthogonality conditions for (omega, theta) by Newton from
/// the given guess and split off (z, f).
ModulationState decompose(const ComplexField& u, const ModulationFamily& family, double omega_guess,
                          double theta_guess);

/// Exact instantaneous modulation derivatives obtained by differentiating
/// the orthogonality constraints along the discrete flow.
struct ModulationRates {
    double omega_dot;
    double gamma_dot;  // theta_dot - omega
    Complex z_dot;
};
ModulationRates modulation_rates(const ComplexField& u, const ModulationState& state,
                                 const ModulationFamily& family);

struct DampingFit {
    double gamma_fit = 0.0;      // signed: d|z|^2/dt = 2 gamma_fit |z|^{2N+2}
    double exponent = 0.0;       // free exponent q in d|z|^2/dt ~ |z|^q
    double rel_residual = 1.0;
    int window_begin = 0, window_end = 0;
    bool reliable = false;
    std::string reason;
    int damping_sign = 0;  // +1 = decay, -1 = growth
};

/// Window-selected least-squares fit of the discrete-mode power law.
DampingFit fit_damping(const std::vector<double>& times, const std::vector<double>& abs_z, int N,
                       double lambda, int min_samples = 50);

struct TrackResult {
    std::vector<ModulationState> states;
    // per-sample diagnostics
    std::vector<double> f_h1, f_weighted, running_integral;
    int N = 1;
    double lambda_ref = 0.0;
    double s1 = 3.0;
    bool tube_exited = false;
    double tube_exit_time = -1.0;
    int smoothness_violations = 0;
    DampingFit fit;
};

struct TrackOptions {
    double s1 = 3.0;             // weight exponent of the local-decay norm
    double tube_radius = 1.0;    // H^1 tube radius guard (relative to ||phi||)
    int fit_min_samples = 50;
};

TrackResult track(const Trajectory& traj, const ModulationFamily& family,
                  const TrackOptions& opts = {});

}  // namespace nlslab

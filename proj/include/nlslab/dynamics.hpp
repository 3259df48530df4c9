#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/linearization.hpp"
#include "nlslab/nonlinearity.hpp"

namespace nlslab {

struct EvolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Scheme { CrankNicolson, StrangSplit };

struct EvolutionConfig {
    double dt = 0.005;
    double T = 100.0;
    int stride = 20;  // store every stride-th step
    Scheme scheme = Scheme::CrankNicolson;
    double absorber_fraction = 0.15;  // of the outer radius; 0 disables
    double absorber_strength = 1.0;
    int sweeps = 2;  // fixed-point sweeps for the nonlinear midpoint

    /// Stability / contraction criterion for the chosen scheme:
    /// dt * max|beta(|u0|^2)| must stay below 1 (Crank-Nicolson midpoint
    /// contraction) resp. 2 (splitting phase step).
    void validate(const NonlinearitySpec& spec, const ComplexField& u0) const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<ComplexField> fields;
    double mass_drift = 0.0;    // max relative |M(t)-M(0)|/M(0) over stored samples
    double energy_drift = 0.0;  // same for the energy
};

/// Mass and energy functionals under the volume measure,
/// E = int |grad u|^2 - B(|u|^2) with B the antiderivative of beta.
double mass_functional(const RadialGrid& grid, const ComplexField& u);
double energy_functional(const NonlinearitySpec& spec, const RadialGrid& grid,
                         const ComplexField& u);

/// Evolve i u_t + Lap u + beta(|u|^2) u = 0 radially.  The absorbing layer
/// adds -i G(r) u on the outer fraction of the grid so outgoing radiation
/// exits; conservation statements apply to absorber-free runs or before
/// first arrival at the layer.
Trajectory evolve(const NonlinearitySpec& spec, const RadialGrid& grid, const ComplexField& u0,
                  const EvolutionConfig& cfg,
                  const std::function<void(double, const ComplexField&)>& on_snapshot = {});

struct InitialData {
    ComplexField u0;
    bool projected_f0 = false;  // f0 was not in L^2_c and has been projected
    bool amplitude_warning = false;
};

/// u0 = phi + first component of (z0 xi + conj(z0) sigma1 xi + f0).
InitialData make_initial_data(const LinearizedSystem& system, Complex z0,
                              const Spinor* f0 = nullptr);

}  // namespace nlslab

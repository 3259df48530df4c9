#pragma once

// Shared fixtures for the test suites: the shipped example configuration and
// a few deterministic pseudo-random field generators.

#include <random>

#include "nlslab/grid.hpp"
#include "nlslab/nonlinearity.hpp"

namespace testutil {

using namespace nlslab;

// Shipped cubic-quintic example: mass slope positive, one internal mode with
// N = 1 and a clear channel margin (see configs/reference.cfg).
inline NonlinearitySpec shipped_spec() { return NonlinearitySpec::cubic_quintic(1.0, 0.08); }
inline double shipped_omega() { return 0.70; }

inline RadialGrid test_grid(int m = 2000, double radius = 40.0, int d = 3) {
    return RadialGrid(d, radius, m);
}

// golden value from the independent high-resolution shooting oracle
// (RK4 bisection at step 1e-5, recorded before the grid solver existed)
inline constexpr double kCubicGroundStateAmplitude = 4.337387679981;

inline RealField localized_bump(const RadialGrid& g, double center, double width,
                                double amp = 1.0) {
    RealField f(g.size());
    for (int j = 0; j < g.size(); ++j) {
        const double x = (g.r()[j] - center) / width;
        f[j] = amp * std::exp(-x * x);
    }
    return f;
}

inline ComplexField random_complex_field(const RadialGrid& g, unsigned seed, double decay = 0.3) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexField f(g.size());
    for (int j = 0; j < g.size(); ++j)
        f[j] = Complex(n(rng), n(rng)) * std::exp(-decay * g.r()[j]);
    return f;
}

inline Spinor random_spinor(const RadialGrid& g, unsigned seed, double decay = 0.3) {
    return Spinor(random_complex_field(g, seed, decay),
                  random_complex_field(g, seed + 1000, decay));
}

/// physical-class spinor: sigma1 F = conj(F)
inline Spinor random_symmetric_spinor(const RadialGrid& g, unsigned seed, double decay = 0.3) {
    ComplexField f = random_complex_field(g, seed, decay);
    return lift(f);
}

/// real two-component spinor with independent components, the structure of
/// the internal mode
inline Spinor random_real_spinor(const RadialGrid& g, unsigned seed, double decay = 0.3) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Spinor f(g.size());
    for (int j = 0; j < g.size(); ++j) {
        const double damp = std::exp(-decay * g.r()[j]);
        f.up[j] = Complex(n(rng) * damp, 0.0);
        f.dn[j] = Complex(n(rng) * damp, 0.0);
    }
    return f;
}

}  // namespace testutil

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlslab/ground_state.hpp"
#include "test_helpers.hpp"

using namespace nlslab;
using namespace testutil;
using doctest::Approx;

namespace {

double amplitude_at_origin(const RadialGrid& g, const RealField& phi) {
    // quadratic extrapolation from the first three nodes to r = 0
    return 3.0 * phi[0] - 3.0 * phi[1] + phi[2];
}

}  // namespace

TEST_CASE("pure-power scaling law and shooting golden value") {
    NonlinearitySpec spec = NonlinearitySpec::pure_power(3.0);
    RadialGrid g1(3, 30.0, 6000);
    RadialGrid g4(3, 15.0, 6000);
    GroundState s1 = solve_ground_state(spec, 1.0, g1);
    GroundState s4 = solve_ground_state(spec, 4.0, g4);
    CHECK(s1.residual < 1e-10);
    CHECK(s4.residual < 1e-10);

    const double a1 = amplitude_at_origin(g1, s1.phi);
    const double a4 = amplitude_at_origin(g4, s4.phi);
    // phi_omega(x) = omega^{1/(p-1)} phi_1(sqrt(omega) x):  a4/a1 = 2
    CHECK(a4 / a1 == Approx(2.0).epsilon(1e-4));
    // golden value from the independent shooting oracle
    CHECK(a1 == Approx(kCubicGroundStateAmplitude).epsilon(2e-4));

    const double m1 = (g1.weights() * s1.phi.square()).sum();
    const double m4 = (g4.weights() * s4.phi.square()).sum();
    CHECK(m4 / m1 == Approx(0.5).epsilon(1e-4));
}

TEST_CASE("profile is positive, decreasing, with sqrt(omega) tail") {
    NonlinearitySpec spec = shipped_spec();
    const double omega = shipped_omega();
    RadialGrid g = test_grid(4000, 40.0);
    GroundState gs = solve_ground_state(spec, omega, g);
    CHECK(gs.phi.minCoeff() > 0.0);
    int increases = 0;
    for (int j = 0; j + 1 < g.size(); ++j)
        if (gs.phi[j + 1] >= gs.phi[j]) ++increases;
    CHECK(increases == 0);
    const double rate = fit_tail_rate(g, RealField(g.sym_factor() * gs.phi), 20.0, 30.0);
    CHECK(rate == Approx(std::sqrt(omega)).epsilon(0.02));
}

TEST_CASE("grid refinement: second-order amplitude convergence") {
    NonlinearitySpec spec = shipped_spec();
    const double omega = shipped_omega();
    auto amp = [&](int m) {
        RadialGrid g(3, 30.0, m);
        GroundState gs = solve_ground_state(spec, omega, g);
        return amplitude_at_origin(g, gs.phi);
    };
    const double a1 = amp(750), a2 = amp(1500), a4 = amp(3000);
    const double slope = std::log2(std::abs(a1 - a2) / std::abs(a2 - a4));
    CHECK(slope > 1.8);
    CHECK(slope < 2.2);
}

TEST_CASE("branch continuation: slopes agree and derivative solves hold") {
    NonlinearitySpec spec = shipped_spec();
    RadialGrid g = test_grid(2500, 35.0);
    std::vector<double> omegas;
    for (int i = 0; i < 7; ++i) omegas.push_back(0.66 + 0.008 * i);
    GroundStateBranch br = continue_branch(spec, omegas, g);
    REQUIRE(br.samples.size() == omegas.size());
    CHECK(!br.truncated);
    for (auto& s : br.samples) {
        CHECK(s.residual < 1e-10);
        CHECK(s.dphi_residual < 1e-8);  // L_+ dphi = -phi consistency
        CHECK(s.h5_negative_count == 1);
    }
    CHECK(br.max_slope_disagreement < 1e-4);
    CHECK(br.h5_pass);
}

TEST_CASE("pure-power p=3 d=3 branch fails the mass-slope condition") {
    NonlinearitySpec spec = NonlinearitySpec::pure_power(3.0);
    RadialGrid g = test_grid(12000, 30.0);
    GroundStateBranch br = continue_branch(spec, {0.8, 0.9, 1.0, 1.1}, g);
    REQUIRE(!br.samples.empty());
    CHECK(!br.h4_pass);  // M(omega) ~ omega^{-1/2}: slope negative
    for (auto& s : br.samples) CHECK(s.dmass_pairing < 0.0);
    // scaling law along the branch
    const double m1 = br.samples[0].mass, m2 = br.samples.back().mass;
    const double expected = std::pow(1.1 / 0.8, -0.5);
    CHECK(m2 / m1 == Approx(expected).epsilon(1e-5));
}

TEST_CASE("linear equation has no ground state") {
    RadialGrid g = test_grid(500, 20.0);
    CHECK_THROWS_AS(solve_ground_state(NonlinearitySpec::cubic_quintic(0.0, 0.0), 1.0, g),
                    GroundStateError);
}

TEST_CASE("missing branch is reported with bisection evidence") {
    // cubic-quintic ceiling: no soliton above omega_max = 3 a^2 / (16 b)
    NonlinearitySpec spec = NonlinearitySpec::cubic_quintic(1.0, 0.2);
    RadialGrid g = test_grid(1500, 30.0);
    const double omega_over = 1.2;  // ceiling is 3/(16*0.2) = 0.9375
    CHECK_THROWS_WITH_AS(solve_ground_state(spec, omega_over, g),
                         doctest::Contains("no ground state"), GroundStateError);
    GroundStateBranch br = continue_branch(spec, {0.8, 0.9, 1.0, 1.1}, g);
    CHECK(br.truncated);
    CHECK(br.samples.size() < 4);
}

TEST_CASE("H5 check: one negative direction, quadratic form negative on phi") {
    NonlinearitySpec spec = shipped_spec();
    RadialGrid g = test_grid(2500, 35.0);
    GroundState gs = solve_ground_state(spec, shipped_omega(), g);
    H5Report h5 = check_H5(spec, g, shipped_omega(), gs.phi);
    CHECK(h5.negative_count == 1);
    CHECK(h5.kernel_gap > 1e-4);
    // <phi, L_+ phi> < 0 through the discretized quadratic form
    SymTridiag lp = make_lplus(spec, g, shipped_omega(), gs.phi);
    RealField v = g.sym_factor() * gs.phi;
    RealField lv = lp.apply(v);
    const double quad = (g.h() * v * lv).sum();
    CHECK(quad < 0.0);
}

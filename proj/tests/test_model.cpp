#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlslab/taylor.hpp"
#include "test_helpers.hpp"

using namespace nlslab;
using namespace testutil;
using doctest::Approx;

TEST_CASE("beta closed forms") {
    CHECK(NonlinearitySpec::pure_power(3).eval(4.0, 0) == Approx(4.0));
    CHECK(NonlinearitySpec::saturable(1.0).eval(1.0, 0) == Approx(0.5));
    CHECK(NonlinearitySpec::cubic_quintic(1.0, 0.1).eval(2.0, 1) == Approx(0.6));
    for (auto spec : {NonlinearitySpec::pure_power(3.0), NonlinearitySpec::cubic_quintic(1, .1),
                      NonlinearitySpec::saturable(0.7)}) {
        CHECK(spec.eval(0.0, 0) == 0.0);  // beta(0) = 0
        CHECK(std::isfinite(spec.eval(3.7, 2)));
    }
    CHECK_THROWS_AS(NonlinearitySpec::saturable(1.0).eval(-0.5, 0), std::invalid_argument);
}

TEST_CASE("quadrature integrates gaussians to 1e-6 relative") {
    for (int d : {3, 4, 5}) {
        RadialGrid g(d, 40.0, 4000);
        // int_{R^d} exp(-|x|^2) = pi^{d/2}
        const double exact = std::pow(M_PI, 0.5 * d);
        const double got = (g.weights() * (-g.r().square()).exp()).sum();
        CHECK(std::abs(got - exact) / exact < 1e-6);
    }
}

TEST_CASE("pairing conventions") {
    RadialGrid g = test_grid();
    Spinor f = random_spinor(g, 7);
    Spinor h = random_spinor(g, 8);
    // normalization
    Spinor fn = (1.0 / norm(g, f)) * f;
    CHECK(inner(g, fn, fn).real() == Approx(1.0));
    CHECK(inner(g, fn, fn).imag() == Approx(0.0).epsilon(1e-14));
    // sesquilinearity: <f,h> = conj(<h,f>)
    Complex a = inner(g, f, h), b = std::conj(inner(g, h, f));
    CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
}

TEST_CASE("sigma operations preserve the conjugation class") {
    RadialGrid g = test_grid(500);
    Spinor f = random_symmetric_spinor(g, 21);
    CHECK(symmetry_defect(f) == 0.0);
    // sigma1 F = conj F is stable under the module maps that stay in class
    Spinor s = sigma1(conj(f));
    CHECK((s.up - f.up).abs().maxCoeff() == 0.0);
}

namespace {

/// finite-difference oracle: compare the collected polynomial against the
/// exact nonlinearity along a physical direction, slope of the remainder
double taylor_remainder_slope(const NonlinearitySpec& spec, const RadialGrid& g,
                              const RealField& phi, const Spinor& xi, int order) {
    TaylorCoefficients tc = taylor_nonlinearity(spec, phi, xi, order);
    auto remainder = [&](double eps) {
        const Complex z(0.7 * eps, 0.3 * eps);
        Spinor r(g.size());
        r.up = z * xi.up + std::conj(z) * xi.dn;
        r.dn = z * xi.dn + std::conj(z) * xi.up;
        Spinor exact = nonlinearity_exact(spec, phi, r);
        for (auto& [mn, lam] : tc.Lambda) {
            auto [m, n] = mn;
            if (m + n > order) continue;
            const Complex c = std::pow(z, m) * std::pow(std::conj(z), n);
            exact -= c * lam;
        }
        return norm(g, exact);
    };
    const double r1 = remainder(1e-2), r2 = remainder(5e-3);
    return std::log2(r1 / r2);
}

}  // namespace

TEST_CASE("taylor coefficients: linear case vanishes") {
    RadialGrid g = test_grid(600);
    NonlinearitySpec lin = NonlinearitySpec::cubic_quintic(0.0, 0.0);
    RealField phi = localized_bump(g, 0.0, 2.0);
    Spinor xi = random_real_spinor(g, 3, 0.8);
    TaylorCoefficients tc = taylor_nonlinearity(lin, phi, xi, 3);
    for (auto& [mn, lam] : tc.Lambda) CHECK(norm(g, lam) <= 1e-300);
    for (auto& [mn, A] : tc.A) CHECK(A.max_abs() <= 1e-300);
}

TEST_CASE("taylor symmetry sigma1 Lambda_{2,0} + Lambda_{0,2} = 0 nodewise") {
    RadialGrid g = test_grid(800);
    RealField phi = localized_bump(g, 0.0, 2.0, 1.3);
    Spinor xi = random_real_spinor(g, 5, 0.7);
    for (auto spec : {NonlinearitySpec::cubic_quintic(1.0, 0.08),
                      NonlinearitySpec::saturable(0.5), NonlinearitySpec::pure_power(3.0)}) {
        TaylorCoefficients tc = taylor_nonlinearity(spec, phi, xi, 3);
        Spinor defect = sigma1(tc.lambda(2, 0)) + tc.lambda(0, 2);
        const double scale = norm(g, tc.lambda(2, 0));
        CHECK(norm(g, defect) < 1e-12 * std::max(scale, 1e-30));
        // matrix symmetry A_{m,n} = -sigma1 A_{n,m} sigma1
        const MatrixField& a10 = tc.coupling(1, 0);
        const MatrixField& a01 = tc.coupling(0, 1);
        CHECK((a10.a11 + a01.a22).abs().maxCoeff() < 1e-12 * std::max(a10.max_abs(), 1e-30));
        CHECK((a10.a12 + a01.a21).abs().maxCoeff() < 1e-12 * std::max(a10.max_abs(), 1e-30));
    }
}

TEST_CASE("taylor reproduces the nonlinearity to third order (eps-halving)") {
    RadialGrid g = test_grid(800);
    RealField phi = localized_bump(g, 0.0, 2.0, 1.1);
    Spinor xi = random_real_spinor(g, 11, 0.7);
    for (auto spec : {NonlinearitySpec::pure_power(3.0),
                      NonlinearitySpec::cubic_quintic(1.0, 0.08),
                      NonlinearitySpec::saturable(0.5)}) {
        const double slope = taylor_remainder_slope(spec, g, phi, xi, 2);
        CHECK(slope >= 2.9);  // remainder O(eps^3)
    }
}

TEST_CASE("cubic-order collection leaves an O(eps^4) remainder") {
    RadialGrid g = test_grid(800);
    RealField phi = localized_bump(g, 0.0, 2.0, 1.1);
    Spinor xi = random_real_spinor(g, 13, 0.7);
    NonlinearitySpec spec = NonlinearitySpec::saturable(0.5);
    const double slope = taylor_remainder_slope(spec, g, phi, xi, 3);
    CHECK(slope >= 3.9);
}

TEST_CASE("f-linear coupling matches a directional derivative of the exact term") {
    RadialGrid g = test_grid(600);
    RealField phi = localized_bump(g, 0.0, 2.0, 1.2);
    Spinor xi = random_real_spinor(g, 17, 0.7);
    NonlinearitySpec spec = NonlinearitySpec::cubic_quintic(1.0, 0.08);
    TaylorCoefficients tc = taylor_nonlinearity(spec, phi, xi, 3);
    const Complex z(0.01, 0.004);
    Spinor rz(g.size());
    rz.up = z * xi.up + std::conj(z) * xi.dn;
    rz.dn = z * xi.dn + std::conj(z) * xi.up;
    Spinor f = random_symmetric_spinor(g, 19, 0.6);
    // directional derivative of N at rz along f, fourth-order differences
    auto eval = [&](double t) {
        Spinor r = rz;
        r.up += t * f.up;
        r.dn += t * f.dn;
        return nonlinearity_exact(spec, phi, r);
    };
    const double h = 1e-3;
    Spinor d1 = eval(h) - eval(-h);
    Spinor d2 = eval(2 * h) - eval(-2 * h);
    Spinor fd(g.size());
    fd.up = (8.0 * d1.up - d2.up) / (12.0 * h);
    fd.dn = (8.0 * d1.dn - d2.dn) / (12.0 * h);
    Spinor model(g.size());
    for (auto& [mn, A] : tc.A) {
        auto [m, n] = mn;
        const Complex c = std::pow(z, m) * std::pow(std::conj(z), n);
        model += c * A.apply(f);
    }
    CHECK(norm(g, fd - model) < 1e-4 * norm(g, model));  // cubic-in-z orders remain
}

#include "nlslab/taylor.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace nlslab {

namespace {

Complex beta_complex(const NonlinearitySpec& spec, Complex s) {
    switch (spec.kind) {
        case NonlinKind::PurePower: {
            const double q = 0.5 * (spec.p - 1.0);
            if (s == Complex(0.0)) return 0.0;
            return std::pow(s, q);
        }
        case NonlinKind::CubicQuintic:
            return spec.a * s - spec.b * s * s;
        case NonlinKind::Saturable:
            return s / (1.0 + spec.kappa * s);
    }
    throw std::logic_error("unreachable");
}

struct BetaAtPhi {
    RealField b0, b1, b2, b3;  // beta and derivatives at s = phi^2
    explicit BetaAtPhi(const NonlinearitySpec& spec, const RealField& phi) {
        const int m = static_cast<int>(phi.size());
        b0.resize(m);
        b1.resize(m);
        b2.resize(m);
        b3.resize(m);
        for (int j = 0; j < m; ++j) {
            // Clamp far-tail arguments: fractional-power kinds have singular
            // high derivatives at s = 0 and the tail contributes nothing.
            const double s = std::max(phi[j] * phi[j], 1e-60);
            b0[j] = spec.eval(s, 0);
            b1[j] = spec.eval(s, 1);
            b2[j] = spec.eval(s, 2);
            b3[j] = spec.eval(s, 3);
        }
    }
};

}  // namespace

Spinor nonlinearity_exact(const NonlinearitySpec& spec, const RealField& phi, const Spinor& R) {
    const int m = static_cast<int>(phi.size());
    Spinor out(m);
    for (int j = 0; j < m; ++j) {
        const double f = phi[j];
        const Complex r1 = R.up[j], r2 = R.dn[j];
        const Complex g = f * f + f * (r1 + r2) + r1 * r2;
        const double s = f * f;
        const double beta0 = spec.eval(s, 0);
        const double beta1 = spec.eval(s, 1);
        const Complex bg = beta_complex(spec, g);
        const Complex lin = beta1 * s * (r1 + r2);
        out.up[j] = bg * (f + r1) - beta0 * f - beta0 * r1 - lin;
        out.dn[j] = -(bg * (f + r2) - beta0 * f - beta0 * r2 - lin);
    }
    return out;
}

Spinor nonlinearity_quadratic(const NonlinearitySpec& spec, const RealField& phi,
                              const Spinor& R) {
    BetaAtPhi b(spec, phi);
    const Complex half(0.5, 0.0);
    ComplexField sum = R.up + R.dn;
    ComplexField s2 = sum * sum;
    RealField p3 = phi * phi * phi;
    Spinor out(static_cast<int>(phi.size()));
    out.up = b.b1 * phi * (R.up * R.up + 2.0 * R.up * R.dn) + half * b.b2 * p3 * s2;
    out.dn = -(b.b1 * phi * (R.dn * R.dn + 2.0 * R.up * R.dn) + half * b.b2 * p3 * s2);
    return out;
}

Spinor nonlinearity_cubic(const NonlinearitySpec& spec, const RealField& phi, const Spinor& R) {
    BetaAtPhi b(spec, phi);
    ComplexField sum = R.up + R.dn;
    ComplexField prod = R.up * R.dn;
    RealField p2 = phi * phi;
    RealField p4 = p2 * p2;
    ComplexField common = b.b2 * p2 * sum * prod + (1.0 / 6.0) * b.b3 * p4 * sum * sum * sum;
    Spinor out(static_cast<int>(phi.size()));
    out.up = b.b1 * R.up * R.up * R.dn + 0.5 * b.b2 * p2 * sum * sum * R.up + common;
    out.dn = -(b.b1 * R.dn * R.dn * R.up + 0.5 * b.b2 * p2 * sum * sum * R.dn + common);
    return out;
}

namespace {

Spinor polynomial_parts(const NonlinearitySpec& spec, const RealField& phi, const Spinor& R,
                        int order) {
    Spinor out = nonlinearity_quadratic(spec, phi, R);
    if (order >= 3) out += nonlinearity_cubic(spec, phi, R);
    return out;
}

/// Exact derivative at t = 0 of a polynomial of degree <= 3 sampled at
/// t = -2,-1,1,2.
Spinor poly_derivative(const Spinor& p1, const Spinor& m1, const Spinor& p2, const Spinor& m2) {
    Spinor out = p1;
    out.up = (8.0 * (p1.up - m1.up) - (p2.up - m2.up)) / 12.0;
    out.dn = (8.0 * (p1.dn - m1.dn) - (p2.dn - m2.dn)) / 12.0;
    return out;
}

}  // namespace

TaylorCoefficients taylor_nonlinearity(const NonlinearitySpec& spec, const RealField& phi,
                                       const Spinor& xi, int order) {
    if (order < 2 || order > 3)
        throw std::invalid_argument(
            "taylor_nonlinearity: expansion implemented for order 2 and 3 only");
    // the coefficients are real exactly when the internal mode is real
    const double xi_scale = std::max(xi.up.abs().maxCoeff(), xi.dn.abs().maxCoeff());
    if (std::max(xi.up.imag().abs().maxCoeff(), xi.dn.imag().abs().maxCoeff()) >
        1e-10 * xi_scale)
        throw std::invalid_argument("taylor_nonlinearity requires a real internal mode");
    const int m = static_cast<int>(phi.size());
    TaylorCoefficients out;
    out.order = order;

    const int L = 8;  // phase samples; separates frequencies m-n in -3..3
    std::vector<Spinor> fz;
    fz.reserve(L);
    std::vector<std::array<Spinor, 2>> dfz;  // f-linear parts, unit direction per slot
    dfz.reserve(L);
    for (int l = 0; l < L; ++l) {
        const double th = 2.0 * M_PI * l / L;
        const Complex z = std::polar(1.0, th);
        Spinor rz(m);
        rz.up = z * xi.up + std::conj(z) * xi.dn;
        rz.dn = z * xi.dn + std::conj(z) * xi.up;
        fz.push_back(polynomial_parts(spec, phi, rz, order));

        std::array<Spinor, 2> cols = {Spinor(m), Spinor(m)};
        for (int c = 0; c < 2; ++c) {
            auto shifted = [&](double t) {
                Spinor rt = rz;
                if (c == 0)
                    rt.up += ComplexField::Constant(m, t);
                else
                    rt.dn += ComplexField::Constant(m, t);
                return polynomial_parts(spec, phi, rt, order);
            };
            cols[c] = poly_derivative(shifted(1.0), shifted(-1.0), shifted(2.0), shifted(-2.0));
        }
        dfz.push_back(std::move(cols));
    }

    auto dft = [&](const std::vector<Spinor>& samples, int nu) {
        Spinor acc(m);
        for (int l = 0; l < L; ++l) {
            const double th = 2.0 * M_PI * l / L;
            const Complex w = std::polar(1.0 / L, -nu * th);
            acc.up += w * samples[l].up;
            acc.dn += w * samples[l].dn;
        }
        return acc;
    };

    // Lambda: each frequency nu = m-n in the carried range corresponds to a
    // unique monomial (orders 2 and 3 only).
    std::vector<std::pair<int, int>> lambda_idx = {{2, 0}, {1, 1}, {0, 2}};
    if (order >= 3) {
        lambda_idx.insert(lambda_idx.end(), {{3, 0}, {2, 1}, {1, 2}, {0, 3}});
    }
    for (auto [mm, nn] : lambda_idx) {
        out.Lambda.emplace(std::make_pair(mm, nn), dft(fz, mm - nn));
    }

    // A: f-linear coefficients; z-degree 1 from the quadratic form, degree 2
    // from the cubic form.
    std::vector<std::pair<int, int>> a_idx = {{1, 0}, {0, 1}};
    if (order >= 3) a_idx.insert(a_idx.end(), {{2, 0}, {1, 1}, {0, 2}});
    for (auto [mm, nn] : a_idx) {
        MatrixField A(m);
        for (int c = 0; c < 2; ++c) {
            std::vector<Spinor> col;
            col.reserve(L);
            for (int l = 0; l < L; ++l) col.push_back(dfz[l][c]);
            Spinor coef = dft(col, mm - nn);
            if (c == 0) {
                A.a11 = coef.up.real();
                A.a21 = coef.dn.real();
            } else {
                A.a12 = coef.up.real();
                A.a22 = coef.dn.real();
            }
        }
        out.A.emplace(std::make_pair(mm, nn), std::move(A));
    }
    return out;
}

}  // namespace nlslab

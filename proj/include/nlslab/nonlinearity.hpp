#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace nlslab {

enum class NonlinKind { PurePower, CubicQuintic, Saturable };

/// Smooth nonlinearity beta with beta(0) = 0, evaluated together with its
/// derivatives.  The PDE term is beta(|u|^2) u.
///
/// Supported kinds:
///   pure_power(p):      beta(s) = s^((p-1)/2)
///   cubic_quintic(a,b): beta(s) = a s - b s^2
///   saturable(kappa):   beta(s) = s / (1 + kappa s)
struct NonlinearitySpec {
    NonlinKind kind = NonlinKind::CubicQuintic;
    double p = 3.0;      // pure_power exponent
    double a = 1.0;      // cubic coefficient
    double b = 0.0;      // quintic coefficient
    double kappa = 1.0;  // saturation constant

    static NonlinearitySpec pure_power(double p) {
        NonlinearitySpec s;
        s.kind = NonlinKind::PurePower;
        s.p = p;
        return s;
    }
    static NonlinearitySpec cubic_quintic(double a, double b) {
        NonlinearitySpec s;
        s.kind = NonlinKind::CubicQuintic;
        s.a = a;
        s.b = b;
        return s;
    }
    static NonlinearitySpec saturable(double kappa) {
        NonlinearitySpec s;
        s.kind = NonlinKind::Saturable;
        s.kappa = kappa;
        return s;
    }

    /// True when beta vanishes identically (the linear Schroedinger case).
    bool is_linear() const {
        return kind == NonlinKind::CubicQuintic && a == 0.0 && b == 0.0;
    }

    /// beta(s) and derivatives up to order 3.  s must be >= 0.
    double eval(double s, int order) const {
        if (s < 0.0)
            throw std::invalid_argument("NonlinearitySpec::eval: negative argument s = " +
                                        std::to_string(s));
        if (order < 0 || order > 3)
            throw std::invalid_argument("NonlinearitySpec::eval: order must be in 0..3");
        switch (kind) {
            case NonlinKind::PurePower: {
                // beta(s) = s^q, q = (p-1)/2
                const double q = 0.5 * (p - 1.0);
                double c = 1.0, e = q;
                for (int k = 0; k < order; ++k) {
                    c *= e;
                    e -= 1.0;
                }
                if (c == 0.0) return 0.0;
                if (s == 0.0) {
                    if (q - order > 0.0) return 0.0;
                    if (q - order == 0.0) return c;
                    throw std::domain_error("pure_power beta derivative singular at s = 0");
                }
                return c * std::pow(s, q - order);
            }
            case NonlinKind::CubicQuintic:
                switch (order) {
                    case 0: return a * s - b * s * s;
                    case 1: return a - 2.0 * b * s;
                    case 2: return -2.0 * b;
                    default: return 0.0;
                }
            case NonlinKind::Saturable: {
                const double d = 1.0 + kappa * s;
                switch (order) {
                    case 0: return s / d;
                    case 1: return 1.0 / (d * d);
                    case 2: return -2.0 * kappa / (d * d * d);
                    default: return 6.0 * kappa * kappa / (d * d * d * d);
                }
            }
        }
        throw std::logic_error("unreachable");
    }

    double operator()(double s) const { return eval(s, 0); }

    /// Antiderivative B(s) = int_0^s beta, used by the energy functional.
    double antiderivative(double s) const {
        if (s < 0.0) throw std::invalid_argument("NonlinearitySpec::antiderivative: s < 0");
        switch (kind) {
            case NonlinKind::PurePower: {
                const double q = 0.5 * (p - 1.0) + 1.0;
                return std::pow(s, q) / q;
            }
            case NonlinKind::CubicQuintic:
                return 0.5 * a * s * s - b * s * s * s / 3.0;
            case NonlinKind::Saturable:
                return (kappa * s - std::log1p(kappa * s)) / (kappa * kappa);
        }
        throw std::logic_error("unreachable");
    }

    /// Growth exponent p with |beta(v^2)| ~ |v|^(p-1) for large v.
    double growth_exponent() const {
        switch (kind) {
            case NonlinKind::PurePower: return p;
            case NonlinKind::CubicQuintic: return b != 0.0 ? 5.0 : 3.0;
            case NonlinKind::Saturable: return 1.0;
        }
        throw std::logic_error("unreachable");
    }

    std::string describe() const {
        switch (kind) {
            case NonlinKind::PurePower: return "pure_power(p=" + std::to_string(p) + ")";
            case NonlinKind::CubicQuintic:
                return "cubic_quintic(a=" + std::to_string(a) + ",b=" + std::to_string(b) + ")";
            case NonlinKind::Saturable: return "saturable(kappa=" + std::to_string(kappa) + ")";
        }
        return "?";
    }
};

}  // namespace nlslab

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <stdexcept>

namespace nlslab {

using RealField = Eigen::ArrayXd;
using ComplexField = Eigen::ArrayXcd;
using Complex = std::complex<double>;

/// Uniform radial grid for radial functions on R^d, d >= 3.
/// Nodes r_j = j h, j = 1..M (the origin is excluded; regularity there is
/// handled by the symmetrized boundary stencil).  Quadrature weights
/// w_j = |S^{d-1}| r_j^{d-1} h realize the volume measure.
class RadialGrid {
   public:
    RadialGrid(int d, double R, int M) : d_(d), R_(R), M_(M) {
        if (d < 3) throw std::invalid_argument("RadialGrid: dimension must be >= 3");
        if (R <= 0.0 || M < 16) throw std::invalid_argument("RadialGrid: bad extent");
        h_ = R / M;
        r_.resize(M);
        w_.resize(M);
        sym_.resize(M);
        surface_ = 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
        for (int j = 0; j < M; ++j) {
            const double rj = (j + 1) * h_;
            r_[j] = rj;
            w_[j] = surface_ * std::pow(rj, d - 1) * h_;
            sym_[j] = std::pow(rj, 0.5 * (d - 1));
        }
    }

    int dim() const { return d_; }
    double radius() const { return R_; }
    int size() const { return M_; }
    double h() const { return h_; }
    double surface_area() const { return surface_; }

    const RealField& r() const { return r_; }
    const RealField& weights() const { return w_; }
    /// r^{(d-1)/2}, the symmetrization factor mapping u to v = r^{(d-1)/2} u.
    const RealField& sym_factor() const { return sym_; }

    /// Centrifugal term (d-1)(d-3)/(4 r^2) of the symmetrized radial Laplacian.
    RealField centrifugal() const {
        const double c = 0.25 * (d_ - 1) * (d_ - 3);
        return c / (r_ * r_);
    }

    bool same(const RadialGrid& o) const {
        return d_ == o.d_ && M_ == o.M_ && R_ == o.R_;
    }

    uint64_t hash() const {
        uint64_t h = 1469598103934665603ull;
        auto mix = [&h](uint64_t v) {
            for (int i = 0; i < 8; ++i) {
                h ^= (v >> (8 * i)) & 0xff;
                h *= 1099511628211ull;
            }
        };
        mix(static_cast<uint64_t>(d_));
        mix(static_cast<uint64_t>(M_));
        uint64_t rb;
        static_assert(sizeof(double) == sizeof(uint64_t));
        std::memcpy(&rb, &R_, 8);
        mix(rb);
        return h;
    }

   private:
    int d_;
    double R_;
    int M_;
    double h_ = 0.0;
    double surface_ = 0.0;
    RealField r_, w_, sym_;
};

/// Two-component field ^t(F1, F2) on the grid; the second slot plays the
/// role of the conjugate component.  A physical perturbation satisfies
/// sigma1 F = conj(F), i.e. F2 = conj(F1).
struct Spinor {
    ComplexField up, dn;

    Spinor() = default;
    explicit Spinor(int m) : up(ComplexField::Zero(m)), dn(ComplexField::Zero(m)) {}
    Spinor(ComplexField u, ComplexField d) : up(std::move(u)), dn(std::move(d)) {}

    int size() const { return static_cast<int>(up.size()); }

    Spinor& operator+=(const Spinor& o) {
        up += o.up;
        dn += o.dn;
        return *this;
    }
    Spinor& operator-=(const Spinor& o) {
        up -= o.up;
        dn -= o.dn;
        return *this;
    }
    Spinor& operator*=(Complex c) {
        up *= c;
        dn *= c;
        return *this;
    }
    friend Spinor operator+(Spinor x, const Spinor& y) { return x += y; }
    friend Spinor operator-(Spinor x, const Spinor& y) { return x -= y; }
    friend Spinor operator*(Complex c, Spinor x) { return x *= c; }
    friend Spinor operator*(double c, Spinor x) { return x *= Complex(c, 0.0); }
    Spinor operator-() const { return {-up, -dn}; }
};

inline Spinor sigma1(const Spinor& f) { return {f.dn, f.up}; }
inline Spinor sigma3(const Spinor& f) { return {f.up, -f.dn}; }
inline Spinor conj(const Spinor& f) { return {f.up.conjugate(), f.dn.conjugate()}; }

/// Lift a one-component field to the physical spinor ^t(f, conj f).
inline Spinor lift(const ComplexField& f) { return {f, f.conjugate()}; }
inline Spinor lift_real(const RealField& f) {
    ComplexField c = f.cast<Complex>();
    return {c, c};
}

/// Largest deviation from the conjugation symmetry sigma1 F = conj(F).
inline double symmetry_defect(const Spinor& f) {
    return (f.dn - f.up.conjugate()).abs().maxCoeff();
}

inline void check_same_grid(const RadialGrid& g, const Spinor& f) {
    if (f.size() != g.size()) throw std::invalid_argument("field/grid size mismatch");
}

/// Weighted pairing of one-component fields: sum_j w_j f_j conj(g_j).
inline Complex inner(const RadialGrid& g, const ComplexField& f, const ComplexField& h) {
    if (f.size() != g.size() || h.size() != g.size())
        throw std::invalid_argument("inner: field/grid size mismatch");
    return (g.weights() * (f * h.conjugate()).real()).sum() +
           Complex(0, 1) * (g.weights() * (f * h.conjugate()).imag()).sum();
}

/// Sesquilinear pairing <F,G> = sum_j w_j (F1 conj(G1) + F2 conj(G2));
/// conjugation sits on the second slot.
inline Complex inner(const RadialGrid& g, const Spinor& f, const Spinor& h) {
    check_same_grid(g, f);
    check_same_grid(g, h);
    return inner(g, f.up, h.up) + inner(g, f.dn, h.dn);
}

inline double norm(const RadialGrid& g, const ComplexField& f) {
    return std::sqrt((g.weights() * f.abs2()).sum());
}
inline double norm(const RadialGrid& g, const RealField& f) {
    return std::sqrt((g.weights() * f.square()).sum());
}
inline double norm(const RadialGrid& g, const Spinor& f) {
    check_same_grid(g, f);
    return std::sqrt((g.weights() * (f.up.abs2() + f.dn.abs2())).sum());
}

/// Radial derivative by centered differences (one-sided at the ends).
inline ComplexField radial_derivative(const RadialGrid& g, const ComplexField& f) {
    const int m = g.size();
    ComplexField df(m);
    const double h = g.h();
    df[0] = (f[1] - Complex(0.0)) / (2.0 * h);  // ghost value 0 at the origin side
    for (int j = 1; j + 1 < m; ++j) df[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
    df[m - 1] = (f[m - 1] - f[m - 2]) / h;
    return df;
}

/// H^1 norm of a one-component field under the volume measure.
inline double norm_h1(const RadialGrid& g, const ComplexField& f) {
    ComplexField df = radial_derivative(g, f);
    return std::sqrt((g.weights() * (f.abs2() + df.abs2())).sum());
}

/// Weighted L^2 norm with weight <r>^{-s1}; diagnostic for local decay.
inline double norm_weighted(const RadialGrid& g, const ComplexField& f, double s1) {
    RealField w = (1.0 + g.r().square()).pow(-s1);
    return std::sqrt((g.weights() * w * f.abs2()).sum());
}

}  // namespace nlslab

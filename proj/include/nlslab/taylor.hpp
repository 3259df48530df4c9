#pragma once

#include <map>
#include <utility>

#include "nlslab/grid.hpp"
#include "nlslab/nonlinearity.hpp"

namespace nlslab {

/// Pointwise real 2x2 matrix field, the coefficient of the f-linear terms in
/// the expansion of the nonlinearity.
struct MatrixField {
    RealField a11, a12, a21, a22;

    explicit MatrixField(int m)
        : a11(RealField::Zero(m)), a12(RealField::Zero(m)),
          a21(RealField::Zero(m)), a22(RealField::Zero(m)) {}

    Spinor apply(const Spinor& f) const {
        return {a11 * f.up + a12 * f.dn, a21 * f.up + a22 * f.dn};
    }
    Spinor apply_transpose(const Spinor& f) const {
        return {a11 * f.up + a21 * f.dn, a12 * f.up + a22 * f.dn};
    }
    double max_abs() const {
        return std::max(std::max(a11.abs().maxCoeff(), a12.abs().maxCoeff()),
                        std::max(a21.abs().maxCoeff(), a22.abs().maxCoeff()));
    }
};

/// Multivariate expansion of the nonlinear term around the ground state in
/// the internal-mode amplitude z and the radiation f:
///   N(z xi + conj(z) sigma1 xi + f) =
///       sum Lambda_{m,n} z^m conj(z)^n + sum z^m conj(z)^n A_{m,n} f + h.o.t.
struct TaylorCoefficients {
    int order = 2;  // largest m+n carried by Lambda; A carries m+n <= order-1
    std::map<std::pair<int, int>, Spinor> Lambda;
    std::map<std::pair<int, int>, MatrixField> A;

    const Spinor& lambda(int m, int n) const { return Lambda.at({m, n}); }
    const MatrixField& coupling(int m, int n) const { return A.at({m, n}); }
};

/// Exact nonlinear remainder N(R): the full nonlinearity minus its
/// linearization at the ground state, evaluated on a general two-slot field.
Spinor nonlinearity_exact(const NonlinearitySpec& spec, const RealField& phi, const Spinor& R);

/// Homogeneous quadratic / cubic parts of N(R).
Spinor nonlinearity_quadratic(const NonlinearitySpec& spec, const RealField& phi,
                              const Spinor& R);
Spinor nonlinearity_cubic(const NonlinearitySpec& spec, const RealField& phi, const Spinor& R);

/// Collect Lambda_{m,n} (2 <= m+n <= order) and A_{m,n} (1 <= m+n <= order-1)
/// by exact phase separation of the polynomial parts.  order is N+1 and must
/// be 2 or 3.
TaylorCoefficients taylor_nonlinearity(const NonlinearitySpec& spec, const RealField& phi,
                                       const Spinor& xi, int order);

}  // namespace nlslab

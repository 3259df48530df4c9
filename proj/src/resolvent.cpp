#include "nlslab/resolvent.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <array>
#include <cmath>
#include <type_traits>

#include "nlslab/banded.hpp"

namespace nlslab {

namespace {

/// Interleaved banded assembly of (H - z) in the symmetrized variable, with
/// ghost multipliers rho1, rho2 for the two channels at the outer boundary
/// (ghost value v_{M+1} = rho_c v_M; rho = 0 is a Dirichlet wall at R + h).
template <class S>
BandedMatrix<S> assemble_shifted(const LinearizedSystem& sys, S z, S rho1, S rho2,
                                 const RealField* cap = nullptr) {
    const RadialGrid& g = sys.grid();
    const int m = g.size();
    const double ih2 = 1.0 / (g.h() * g.h());
    RealField w = g.centrifugal();
    BandedMatrix<S> mat(2 * m, 2, 2);
    const RealField& b = sys.potential_b();
    const RealField& c = sys.potential_c();
    for (int j = 0; j < m; ++j) {
        S adiag = S(2.0 * ih2 + w[j] + sys.omega() - b[j]);
        S capj = S(0);
        if constexpr (std::is_same_v<S, Complex>) {
            if (cap) capj = Complex(0.0, (*cap)[j]);
        } else {
            if (cap) throw std::logic_error("absorbing tail requires complex assembly");
        }
        // row 2j:   (A - z - i cap) v1 - c v2
        mat.add(2 * j, 2 * j, adiag - z - capj);
        mat.add(2 * j, 2 * j + 1, S(-c[j]));
        // row 2j+1: c v1 + (-A - z - i cap) v2
        mat.add(2 * j + 1, 2 * j + 1, -adiag - z - capj);
        mat.add(2 * j + 1, 2 * j, S(c[j]));
        if (j + 1 < m) {
            mat.add(2 * j, 2 * (j + 1), S(-ih2));
            mat.add(2 * (j + 1), 2 * j, S(-ih2));
            mat.add(2 * j + 1, 2 * (j + 1) + 1, S(ih2));
            mat.add(2 * (j + 1) + 1, 2 * j + 1, S(ih2));
        }
    }
    // outer ghosts: v_{M+1} = rho_c v_M folded into the last diagonal
    mat.add(2 * (m - 1), 2 * (m - 1), S(ih2) * rho1 * S(-1.0));
    mat.add(2 * (m - 1) + 1, 2 * (m - 1) + 1, S(ih2) * rho2);
    return mat;
}

template <class S>
std::vector<S> to_vspace(const LinearizedSystem& sys, const Spinor& f) {
    const RealField& sy = sys.grid().sym_factor();
    const int m = sys.grid().size();
    std::vector<S> v(2 * m);
    for (int j = 0; j < m; ++j) {
        if constexpr (std::is_same_v<S, double>) {
            v[2 * j] = (sy[j] * f.up[j]).real();
            v[2 * j + 1] = (sy[j] * f.dn[j]).real();
        } else {
            v[2 * j] = sy[j] * f.up[j];
            v[2 * j + 1] = sy[j] * f.dn[j];
        }
    }
    return v;
}

template <class S>
Spinor from_vspace(const LinearizedSystem& sys, const std::vector<S>& v) {
    const RealField& sy = sys.grid().sym_factor();
    const int m = sys.grid().size();
    Spinor f(m);
    for (int j = 0; j < m; ++j) {
        f.up[j] = Complex(v[2 * j]) / sy[j];
        f.dn[j] = Complex(v[2 * j + 1]) / sy[j];
    }
    return f;
}

double point_spectrum_distance(const LinearizedSystem& sys, double mu) {
    double d = std::abs(mu);  // the 0 eigenvalue (generalized kernel)
    if (sys.has_mode()) {
        d = std::min(d, std::abs(mu - sys.lambda()));
        d = std::min(d, std::abs(mu + sys.lambda()));
    }
    return d;
}

}  // namespace

Spinor solve_gap(const LinearizedSystem& system, double mu, const Spinor& g,
                 const ResolventOptions& opts) {
    const double omega = system.omega();
    if (std::abs(mu) >= omega)
        throw ResolventError("solve_gap: mu is not inside the spectral gap");
    if (point_spectrum_distance(system, mu) < opts.singular_tol * omega)
        throw ResolventError("resolvent singular: mu within tolerance of the point spectrum");
    check_same_grid(system.grid(), g);

    BandedMatrix<double> mat = assemble_shifted<double>(system, mu, 0.0, 0.0);
    BandedLU<double> lu = mat.lu();
    const bool complex_rhs = g.up.imag().abs().maxCoeff() > 0 || g.dn.imag().abs().maxCoeff() > 0;

    auto solve_real = [&](const Spinor& gr) {
        std::vector<double> rhs = to_vspace<double>(system, gr);
        std::vector<double> sol = lu.solve(rhs);
        return from_vspace<double>(system, sol);
    };
    Spinor psi = solve_real({g.up.real().cast<Complex>(), g.dn.real().cast<Complex>()});
    if (complex_rhs) {
        Spinor pim = solve_real({g.up.imag().cast<Complex>(), g.dn.imag().cast<Complex>()});
        psi.up += Complex(0, 1) * pim.up;
        psi.dn += Complex(0, 1) * pim.dn;
    }
    Spinor res = system.apply(psi) - Complex(mu, 0.0) * psi - g;
    const double rel = norm(system.grid(), res) / std::max(norm(system.grid(), g), 1e-300);
    if (rel > 1e-10)
        throw ResolventError("solve_gap: residual " + std::to_string(rel) +
                             " exceeds tolerance (mu too close to spectrum?)");
    return psi;
}

Spinor solve_gap_deflated(const LinearizedSystem& system, double mu, const Spinor& g) {
    const RadialGrid& grid = system.grid();
    const RealField& sy = grid.sym_factor();
    const int m = grid.size();
    const int n = 2 * m + 4;
    const double ih2 = 1.0 / (grid.h() * grid.h());
    RealField w = grid.centrifugal();
    const RealField& b = system.potential_b();
    const RealField& c = system.potential_c();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(8 * m + 16 * m);
    for (int j = 0; j < m; ++j) {
        const double adiag = 2.0 * ih2 + w[j] + system.omega() - b[j];
        trip.emplace_back(2 * j, 2 * j, adiag - mu);
        trip.emplace_back(2 * j + 1, 2 * j + 1, -adiag - mu);
        trip.emplace_back(2 * j, 2 * j + 1, -c[j]);
        trip.emplace_back(2 * j + 1, 2 * j, c[j]);
        if (j + 1 < m) {
            trip.emplace_back(2 * j, 2 * (j + 1), -ih2);
            trip.emplace_back(2 * (j + 1), 2 * j, -ih2);
            trip.emplace_back(2 * j + 1, 2 * (j + 1) + 1, ih2);
            trip.emplace_back(2 * (j + 1) + 1, 2 * j + 1, ih2);
        }
    }
    // border with the discrete basis (columns) and dual pairings (rows):
    // the bordered system forces the solution into L^2_c and absorbs the
    // discrete components of the right-hand side into the multipliers.
    const auto& basis = system.discrete_basis();
    const auto& duals = system.dual_basis();
    for (int k = 0; k < 4; ++k) {
        for (int j = 0; j < m; ++j) {
            const double bu = basis[k].up[j].real() * sy[j];
            const double bd = basis[k].dn[j].real() * sy[j];
            if (bu != 0.0) trip.emplace_back(2 * j, 2 * m + k, bu);
            if (bd != 0.0) trip.emplace_back(2 * j + 1, 2 * m + k, bd);
            const double wf = grid.weights()[j] / sy[j];
            const double du = duals[k].up[j].real() * wf;
            const double dd = duals[k].dn[j].real() * wf;
            if (du != 0.0) trip.emplace_back(2 * m + k, 2 * j, du);
            if (dd != 0.0) trip.emplace_back(2 * m + k, 2 * j + 1, dd);
        }
    }
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success)
        throw ResolventError("solve_gap_deflated: bordered factorization failed");

    auto solve_part = [&](const RealField& gu, const RealField& gd) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
        for (int j = 0; j < m; ++j) {
            rhs[2 * j] = sy[j] * gu[j];
            rhs[2 * j + 1] = sy[j] * gd[j];
        }
        Eigen::VectorXd sol = lu.solve(rhs);
        std::vector<double> v(sol.data(), sol.data() + 2 * m);
        return from_vspace<double>(system, v);
    };
    Spinor psi = solve_part(g.up.real(), g.dn.real());
    if (g.up.imag().abs().maxCoeff() > 0 || g.dn.imag().abs().maxCoeff() > 0) {
        Spinor pim = solve_part(g.up.imag(), g.dn.imag());
        psi.up += Complex(0, 1) * pim.up;
        psi.dn += Complex(0, 1) * pim.dn;
    }
    return psi;
}

namespace {

struct ChannelData {
    double k;    // open-channel wavenumber sqrt(mu - omega)
    double kap;  // closed-channel decay rate  sqrt(mu + omega)
    double q;    // discrete wavenumber: cos(q h) = 1 - k^2 h^2 / 2
    double p;    // discrete decay rate:  cosh(p h) = 1 + kap^2 h^2 / 2
};

ChannelData channels(const LinearizedSystem& sys, double mu) {
    const double omega = sys.omega();
    if (!(mu > omega && mu < 3.0 * omega))
        throw ResolventError("channel precondition violated: need omega < mu < 3 omega");
    ChannelData ch;
    ch.k = std::sqrt(mu - omega);
    ch.kap = std::sqrt(mu + omega);
    const double h = sys.grid().h();
    const double ckh = 1.0 - 0.5 * ch.k * ch.k * h * h;
    if (ckh <= -1.0)
        throw ResolventError("grid too coarse for the open channel (k h >= 2)");
    ch.q = std::acos(ckh) / h;
    ch.p = std::acosh(1.0 + 0.5 * ch.kap * ch.kap * h * h) / h;
    return ch;
}

Spinor solve_outgoing_bc(const LinearizedSystem& system, double mu, const Spinor& g,
                         const ChannelData& ch) {
    const double h = system.grid().h();
    const Complex rho1 = std::polar(1.0, ch.q * h);
    const Complex rho2 = std::exp(-ch.p * h);
    BandedMatrix<Complex> mat =
        assemble_shifted<Complex>(system, Complex(mu, 0.0), rho1, rho2);
    BandedLU<Complex> lu = mat.lu();
    std::vector<Complex> rhs = to_vspace<Complex>(system, g);
    std::vector<Complex> sol = lu.solve(rhs);
    return from_vspace<Complex>(system, sol);
}

RealField absorber_profile(const RadialGrid& grid, double k, double fraction, double strength) {
    const double r1 = grid.radius();
    const double r0 = r1 * (1.0 - fraction);
    RealField cap = RealField::Zero(grid.size());
    const double amp = strength * std::max(k, 0.1) / (r1 - r0);
    for (int j = 0; j < grid.size(); ++j) {
        const double r = grid.r()[j];
        if (r > r0) {
            const double x = (r - r0) / (r1 - r0);
            cap[j] = amp * std::sin(0.5 * M_PI * x) * std::sin(0.5 * M_PI * x);
        }
    }
    return cap;
}

Spinor solve_eps(const LinearizedSystem& system, double mu, const Spinor& g,
                 const ChannelData& ch, const ResolventOptions& opts) {
    RealField cap =
        absorber_profile(system.grid(), ch.k, opts.cap_fraction, opts.cap_strength);
    const double eps0 = opts.eps0_factor * (mu - system.omega());
    std::array<Spinor, 3> sols;
    for (int i = 0; i < 3; ++i) {
        const double eps = eps0 / (1 << i);
        BandedMatrix<Complex> mat =
            assemble_shifted<Complex>(system, Complex(mu, eps), Complex(0), Complex(0), &cap);
        BandedLU<Complex> lu = mat.lu();
        std::vector<Complex> rhs = to_vspace<Complex>(system, g);
        std::vector<Complex> sol = lu.solve(rhs);
        sols[i] = from_vspace<Complex>(system, sol);
    }
    // Richardson to eps -> 0 through eps0, eps0/2, eps0/4 (kills eps, eps^2)
    Spinor out = sols[0];
    out.up = (1.0 / 3.0) * sols[0].up - 2.0 * sols[1].up + (8.0 / 3.0) * sols[2].up;
    out.dn = (1.0 / 3.0) * sols[0].dn - 2.0 * sols[1].dn + (8.0 / 3.0) * sols[2].dn;
    return out;
}

}  // namespace

Spinor solve_outgoing(const LinearizedSystem& system, double mu, const Spinor& g,
                      OutgoingMethod method, const ResolventOptions& opts) {
    check_same_grid(system.grid(), g);
    ChannelData ch = channels(system, mu);
    switch (method) {
        case OutgoingMethod::OutgoingBC: return solve_outgoing_bc(system, mu, g, ch);
        case OutgoingMethod::EpsExtrapolation: return solve_eps(system, mu, g, ch, opts);
    }
    throw std::logic_error("unreachable");
}

GeneralizedEigenfunction generalized_eigenfunction(const LinearizedSystem& system, double mu) {
    ChannelData ch = channels(system, mu);
    const RadialGrid& grid = system.grid();
    const int m = grid.size();
    const double h = grid.h();

    // The bounded solution space at an open-channel energy is one
    // dimensional: regularity at the origin (2 conditions) plus decay of the
    // closed channel (1 condition) in a 4-dimensional solution space.  Drop
    // the open-channel equation at the last node and replace it with a scale
    // normalization.  Two candidate functionals; they cannot both degenerate.
    auto build_and_solve = [&](bool cos_row) {
        BandedMatrix<double> mat =
            assemble_shifted<double>(system, mu, 0.0, std::exp(-ch.p * h));
        const int row = 2 * (m - 1);
        for (int dc = -2; dc <= 2; ++dc) {
            const int col = row + dc;
            if (col >= 0 && col < 2 * m) mat.at(row, col) = 0.0;
        }
        if (cos_row) {
            // Y1(R) - cos(qh) Y1(R-h) = alpha sin(qh) cos(q r_{M-1} + delta)
            mat.at(row, row) = 1.0;
            mat.at(row, row - 2) = -std::cos(ch.q * h);
        } else {
            mat.at(row, row) = 1.0;  // Y1(R) = alpha sin(q r_M + delta)
        }
        BandedLU<double> lu = mat.lu();
        std::vector<double> rhs(2 * m, 0.0);
        rhs[row] = 1.0;
        return lu.solve(rhs);
    };

    std::vector<double> sol = build_and_solve(false);
    double maxv = 0.0;
    for (double v : sol) maxv = std::max(maxv, std::abs(v));
    if (maxv > 1e7) sol = build_and_solve(true);  // tail zero under the sin functional

    GeneralizedEigenfunction ge;
    ge.q = ch.q;
    ge.k_eff = std::sin(ch.q * h) / h;
    ge.Y = from_vspace<double>(system, sol);
    // discrete two-point amplitude fit on the v-space open-channel tail
    const double y1 = sol[2 * (m - 2) - 2], y2 = sol[2 * (m - 2)];
    const double s = std::sin(ch.q * h), co = std::cos(ch.q * h);
    ge.alpha2 = (y1 * y1 + y2 * y2 - 2.0 * y1 * y2 * co) / (s * s);
    if (!(ge.alpha2 > 0.0))
        throw ResolventError("generalized eigenfunction: degenerate tail amplitude");
    return ge;
}

double spectral_imag_pairing(const LinearizedSystem& system, double mu, const Spinor& g,
                             const Spinor& w) {
    GeneralizedEigenfunction ge = generalized_eigenfunction(system, mu);
    const RadialGrid& grid = system.grid();
    const double a = inner(grid, ge.Y, sigma3(g)).real();
    const double b = inner(grid, ge.Y, w).real();
    return a * b / (grid.surface_area() * ge.alpha2 * ge.k_eff);
}

}  // namespace nlslab

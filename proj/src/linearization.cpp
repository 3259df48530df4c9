#include "nlslab/linearization.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

#include "nlslab/banded.hpp"

namespace nlslab {

LinearizedSystem::LinearizedSystem(NonlinearitySpec spec, RadialGrid grid, double omega,
                                   RealField phi, RealField dphi, double mass_slope)
    : spec_(std::move(spec)), grid_(std::move(grid)), omega_(omega), phi_(std::move(phi)),
      dphi_(std::move(dphi)), mass_slope_(mass_slope) {
    const int m = grid_.size();
    b_.resize(m);
    c_.resize(m);
    for (int j = 0; j < m; ++j) {
        const double s = phi_[j] * phi_[j];
        const double beta0 = spec_.eval(s, 0);
        const double beta1 = spec_.eval(s, 1);
        b_[j] = beta0 + beta1 * s;
        c_[j] = beta1 * s;
    }
    a_op_ = radial_operator(grid_, RealField(omega_ - b_));
    lplus_ = make_lplus(spec_, grid_, omega_, phi_);
    lminus_ = make_lminus(spec_, grid_, omega_, phi_);
}

Spinor LinearizedSystem::apply(const Spinor& f) const {
    const RealField& s = grid_.sym_factor();
    ComplexField au = a_op_.apply(ComplexField(s * f.up)) / s;
    ComplexField ad = a_op_.apply(ComplexField(s * f.dn)) / s;
    return {au - c_ * f.dn, c_ * f.up - ad};
}

Spinor LinearizedSystem::apply_adjoint(const Spinor& f) const { return sigma3(apply(sigma3(f))); }

Spinor LinearizedSystem::sigma3_Phi() const {
    ComplexField p = phi_.cast<Complex>();
    return {p, -p};
}
Spinor LinearizedSystem::Phi() const {
    ComplexField p = phi_.cast<Complex>();
    return {p, p};
}
Spinor LinearizedSystem::dPhi() const {
    ComplexField p = dphi_.cast<Complex>();
    return {p, p};
}

void LinearizedSystem::set_mode(double lambda, Spinor xi, double rel_tol_ratio) {
    if (lambda <= 0.0 || lambda >= omega_)
        throw SpectralError("internal mode must satisfy 0 < lambda < omega");
    const double pairing = inner(grid_, xi, sigma3(xi)).real();
    xi_pairing_raw_ = pairing;
    if (pairing <= 0.0)
        throw SpectralError("<xi, sigma3 xi> <= 0 for the positive-eigenvalue mode");
    Spinor scaled = (1.0 / std::sqrt(pairing)) * xi;
    Spinor res = apply(scaled) - Complex(lambda, 0.0) * scaled;
    mode_residual_ = norm(grid_, res) / norm(grid_, scaled);
    lambda_ = lambda;
    xi_ = std::move(scaled);
    has_mode_ = true;

    const double ratio = omega_ / lambda_;
    const double nearest = std::abs(ratio - std::round(ratio));
    if (nearest < rel_tol_ratio)
        throw SpectralError("resonant ratio: omega/lambda = " + std::to_string(ratio) +
                            " is an integer within tolerance");
    N_ = static_cast<int>(std::floor(ratio));
    margin_ = std::min(omega_ - N_ * lambda_, (N_ + 1) * lambda_ - omega_);
    build_projection();
}

void LinearizedSystem::build_projection() {
    basis_ = {sigma3_Phi(), dPhi(), xi_, sigma1(xi_)};
    duals_ = {Phi(), sigma3(dPhi()), sigma3(xi_), sigma3(sigma1(xi_))};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) gram_(i, j) = inner(grid_, basis_[j], duals_[i]).real();
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(gram_);
    gram_condition_ = svd.singularValues()(0) / svd.singularValues()(3);
    if (gram_condition_ > 1e8)
        throw SpectralError("ill-conditioned dual Gram matrix (condition " +
                            std::to_string(gram_condition_) + ")");
    gram_inv_ = gram_.inverse();
    projection_ready_ = true;
}

Spinor LinearizedSystem::project_continuous(const Spinor& f) const {
    if (!projection_ready_) throw SpectralError("projection requested before the mode is set");
    Eigen::Vector4cd m;
    for (int i = 0; i < 4; ++i) m(i) = inner(grid_, f, duals_[i]);
    Eigen::Vector4cd c = gram_inv_.cast<Complex>() * m;
    Spinor out = f;
    for (int j = 0; j < 4; ++j) out -= c(j) * basis_[j];
    return out;
}

Spinor LinearizedSystem::project_continuous_adjoint(const Spinor& f) const {
    if (!projection_ready_) throw SpectralError("projection requested before the mode is set");
    Eigen::Vector4cd m;
    for (int i = 0; i < 4; ++i) m(i) = inner(grid_, basis_[i], f);
    // <b_i, f - sum_k e_k d_k> = 0  with  <b_i, d_k> = G_{ki}
    Eigen::Vector4cd e = (gram_inv_.transpose().cast<Complex>() * m.conjugate()).conjugate();
    Spinor out = f;
    for (int k = 0; k < 4; ++k) out -= e(k) * duals_[k];
    return out;
}

const Spinor& LinearizedSystem::dxi() const {
    if (dxi_) return *dxi_;
    if (!has_mode_) throw SpectralError("dxi requires the internal mode");
    const int m = grid_.size();
    // dH/domega = [[1 - db, -dc], [dc, -(1 - db)]] with
    // db = (2 b' + b'' s) 2 phi dphi evaluated at s = phi^2.
    RealField db(m), dc(m);
    for (int j = 0; j < m; ++j) {
        const double s = phi_[j] * phi_[j];
        const double b1 = spec_.eval(s, 1), b2 = spec_.eval(s, 2);
        const double ds = 2.0 * phi_[j] * dphi_[j];
        db[j] = (2.0 * b1 + b2 * s) * ds;
        dc[j] = (b1 + b2 * s) * ds;
    }
    auto apply_hprime = [&](const Spinor& f) -> Spinor {
        return {(1.0 - db) * f.up - dc * f.dn, dc * f.up - (1.0 - db) * f.dn};
    };
    Spinor hpxi = apply_hprime(xi_);
    dlambda_ = inner(grid_, hpxi, sigma3(xi_)).real();  // <xi, s3 xi> = 1
    Spinor rhs = Complex(dlambda_, 0.0) * xi_ - hpxi;

    // bordered sparse solve in the symmetrized variable
    const RealField& sy = grid_.sym_factor();
    const int n = 2 * m + 1;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(8 * m);
    const double ih2 = 1.0 / (grid_.h() * grid_.h());
    RealField w = grid_.centrifugal();
    for (int j = 0; j < m; ++j) {
        const double adiag = 2.0 * ih2 + w[j] + omega_ - b_[j];
        trip.emplace_back(2 * j, 2 * j, adiag - lambda_);
        trip.emplace_back(2 * j + 1, 2 * j + 1, -adiag - lambda_);
        trip.emplace_back(2 * j, 2 * j + 1, -c_[j]);
        trip.emplace_back(2 * j + 1, 2 * j, c_[j]);
        if (j + 1 < m) {
            trip.emplace_back(2 * j, 2 * (j + 1), -ih2);
            trip.emplace_back(2 * (j + 1), 2 * j, -ih2);
            trip.emplace_back(2 * j + 1, 2 * (j + 1) + 1, ih2);
            trip.emplace_back(2 * (j + 1) + 1, 2 * j + 1, ih2);
        }
    }
    // border: column sigma3 xi (v-space), row <., sigma3 xi>_w
    for (int j = 0; j < m; ++j) {
        const double s3x_up = (sy[j] * xi_.up[j]).real();
        const double s3x_dn = (-sy[j] * xi_.dn[j]).real();
        trip.emplace_back(2 * j, 2 * m, s3x_up);
        trip.emplace_back(2 * j + 1, 2 * m, s3x_dn);
        const double wf = grid_.weights()[j] / sy[j];  // constraint <y, s3 xi>_w on v-unknowns
        trip.emplace_back(2 * m, 2 * j, wf * xi_.up[j].real());
        trip.emplace_back(2 * m, 2 * j + 1, -wf * xi_.dn[j].real());
    }
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) throw SpectralError("dxi: bordered solve failed");
    Eigen::VectorXd rb = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < m; ++j) {
        rb[2 * j] = (sy[j] * rhs.up[j]).real();
        rb[2 * j + 1] = (sy[j] * rhs.dn[j]).real();
    }
    Eigen::VectorXd sol = lu.solve(rb);
    Spinor y(m);
    for (int j = 0; j < m; ++j) {
        y.up[j] = sol[2 * j] / sy[j];
        y.dn[j] = sol[2 * j + 1] / sy[j];
    }
    dxi_ = std::move(y);
    return *dxi_;
}

double LinearizedSystem::dlambda() const {
    dxi();
    return dlambda_;
}

LinearizedSystem assemble_system(const NonlinearitySpec& spec, const RadialGrid& grid,
                                 double omega, const RealField* warm_phi) {
    GroundState gs = solve_ground_state(spec, omega, grid, warm_phi);
    SymTridiag lp = make_lplus(spec, grid, omega, gs.phi);
    const RealField& s = grid.sym_factor();
    RealField dv = tridiag_solve_shifted(lp, 0.0, RealField(-(s * gs.phi)));
    RealField dphi = dv / s;
    const double mass_slope = 2.0 * (grid.weights() * gs.phi * dphi).sum();
    return LinearizedSystem(spec, grid, omega, gs.phi, dphi, mass_slope);
}

namespace {

BandedMatrix<double> product_matrix(const SymTridiag& t1, const SymTridiag& t2) {
    const int n = t1.size();
    BandedMatrix<double> p(n, 2, 2);
    auto d1 = [&](int i) { return t1.diag[i]; };
    auto e1 = [&](int i) { return (i >= 0 && i + 1 < n) ? t1.off[i] : 0.0; };
    auto d2 = [&](int i) { return t2.diag[i]; };
    auto e2 = [&](int i) { return (i >= 0 && i + 1 < n) ? t2.off[i] : 0.0; };
    for (int i = 0; i < n; ++i) {
        if (i >= 2) p.add(i, i - 2, e1(i - 1) * e2(i - 2));
        if (i >= 1) p.add(i, i - 1, e1(i - 1) * d2(i - 1) + d1(i) * e2(i - 1));
        p.add(i, i, e1(i - 1) * e2(i - 1) + d1(i) * d2(i) + e1(i) * e2(i));
        if (i + 1 < n) p.add(i, i + 1, d1(i) * e2(i) + e1(i) * d2(i + 1));
        if (i + 2 < n) p.add(i, i + 2, e1(i) * e2(i + 1));
    }
    return p;
}

}  // namespace

std::pair<double, RealField> refine_product_eigen(const LinearizedSystem& system,
                                                  double lambda2_guess, int max_iter) {
    const SymTridiag& lm = system.lminus();
    const SymTridiag& lp = system.lplus();
    const int n = lm.size();
    BandedMatrix<double> prod = product_matrix(lm, lp);
    const double scale = std::abs(prod.at(n / 2, n / 2)) + std::abs(lambda2_guess);

    double sigma = lambda2_guess;
    Eigen::ArrayXd v = Eigen::ArrayXd::Constant(n, 1.0);
    for (int j = 0; j < n; ++j) v[j] = std::exp(-0.05 * j * system.grid().h());
    v /= std::sqrt(v.square().sum());

    double res = 1e300;
    for (int it = 0; it < max_iter; ++it) {
        BandedMatrix<double> shifted = prod;
        for (int j = 0; j < n; ++j) shifted.add(j, j, -sigma);
        BandedLU<double> lu = shifted.lu();
        std::vector<double> rhs(v.data(), v.data() + n);
        std::vector<double> sol;
        try {
            sol = lu.solve(rhs);
        } catch (const std::runtime_error&) {
            sigma *= 1.0 + 1e-9;
            continue;
        }
        Eigen::Map<Eigen::ArrayXd> x(sol.data(), n);
        v = x / std::sqrt(x.square().sum());
        // least-squares eigenvalue update and residual
        std::vector<double> vv(v.data(), v.data() + n);
        auto pv = prod.apply(vv);
        Eigen::Map<Eigen::ArrayXd> pva(pv.data(), n);
        const double num = (pva * v).sum();
        sigma = num;  // ||v|| = 1
        res = std::sqrt((pva - sigma * v).square().sum());
        if (res < 1e-12 * scale) break;
    }
    return {sigma, v};
}

namespace {

/// Interleaved banded (H - mu) in the symmetrized variable, Dirichlet ends.
BandedMatrix<double> shifted_h_banded(const LinearizedSystem& sys, double mu) {
    const RadialGrid& g = sys.grid();
    const int m = g.size();
    const double ih2 = 1.0 / (g.h() * g.h());
    RealField w = g.centrifugal();
    const RealField& b = sys.potential_b();
    const RealField& c = sys.potential_c();
    BandedMatrix<double> mat(2 * m, 2, 2);
    for (int j = 0; j < m; ++j) {
        const double adiag = 2.0 * ih2 + w[j] + sys.omega() - b[j];
        mat.add(2 * j, 2 * j, adiag - mu);
        mat.add(2 * j + 1, 2 * j + 1, -adiag - mu);
        mat.add(2 * j, 2 * j + 1, -c[j]);
        mat.add(2 * j + 1, 2 * j, c[j]);
        if (j + 1 < m) {
            mat.add(2 * j, 2 * (j + 1), -ih2);
            mat.add(2 * (j + 1), 2 * j, -ih2);
            mat.add(2 * j + 1, 2 * (j + 1) + 1, ih2);
            mat.add(2 * (j + 1) + 1, 2 * j + 1, ih2);
        }
    }
    return mat;
}

}  // namespace

ModeRefinement mode_from_product(const LinearizedSystem& system, double lambda,
                                 const RealField& s_vspace) {
    const RadialGrid& grid = system.grid();
    const RealField& sy = grid.sym_factor();
    RealField d_vspace = system.lplus().apply(s_vspace) / lambda;
    const int m = grid.size();
    Spinor xi(m);
    xi.up = (0.5 * (s_vspace + d_vspace) / sy).cast<Complex>();
    xi.dn = (0.5 * (s_vspace - d_vspace) / sy).cast<Complex>();

    // polish on the full two-component eigenproblem by inverse iteration
    // with a Rayleigh update; the product route fixes only ~7 digits
    auto rayleigh = [&](const Spinor& v) {
        const double num = inner(grid, system.apply(v), sigma3(v)).real();
        const double den = inner(grid, v, sigma3(v)).real();
        return num / den;
    };
    double lam = rayleigh(xi);
    double rel = 1e300;
    for (int it = 0; it < 6; ++it) {
        Spinor res = system.apply(xi) - Complex(lam, 0.0) * xi;
        rel = norm(grid, res) / norm(grid, xi);
        if (rel < 1e-11) break;
        const double detune = 1e-9 * std::max(1.0, std::abs(lam));
        BandedMatrix<double> mat = shifted_h_banded(system, lam + detune);
        BandedLU<double> lu = mat.lu();
        std::vector<double> rhs(2 * m);
        for (int j = 0; j < m; ++j) {
            rhs[2 * j] = (sy[j] * xi.up[j]).real();
            rhs[2 * j + 1] = (sy[j] * xi.dn[j]).real();
        }
        std::vector<double> sol = lu.solve(rhs);
        Spinor next(m);
        for (int j = 0; j < m; ++j) {
            next.up[j] = sol[2 * j] / sy[j];
            next.dn[j] = sol[2 * j + 1] / sy[j];
        }
        next *= Complex(1.0 / norm(grid, next), 0.0);
        xi = std::move(next);
        lam = rayleigh(xi);
    }
    Spinor res = system.apply(xi) - Complex(lam, 0.0) * xi;
    rel = norm(grid, res) / norm(grid, xi);
    return {std::move(xi), lam, rel};
}

SpectrumReport discrete_spectrum(LinearizedSystem& system, int coarse_size, double rel_tol) {
    SpectrumReport report;
    const RadialGrid& grid = system.grid();
    const double omega = system.omega();

    // kernel identities, known analytically
    Spinor k0 = system.apply(system.sigma3_Phi());
    Spinor k1 = system.apply(system.dPhi()) + system.sigma3_Phi();
    const double nphi = norm(grid, system.Phi());
    report.kernel_residual = norm(grid, k0) / nphi;
    report.chain_residual = norm(grid, k1) / nphi;

    // -- detection on a coarsened grid --------------------------------------
    int stride = std::max(1, grid.size() / coarse_size);
    int mc = grid.size() / stride;
    RadialGrid cgrid(grid.dim(), grid.r()[stride * mc - 1], mc);
    RealField cphi(mc);
    for (int j = 0; j < mc; ++j) cphi[j] = system.phi()[stride * (j + 1) - 1];
    SymTridiag clp = make_lplus(system.spec(), cgrid, omega, cphi);
    SymTridiag clm = make_lminus(system.spec(), cgrid, omega, cphi);

    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(mc, mc);
    {
        BandedMatrix<double> prod = product_matrix(clm, clp);
        for (int i = 0; i < mc; ++i)
            for (int j = std::max(0, i - 2); j <= std::min(mc - 1, i + 2); ++j)
                dense(i, j) = prod.at(i, j);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(dense, false);
    std::vector<double> candidates;
    const double om2 = omega * omega;
    for (int i = 0; i < mc; ++i) {
        const Complex ev = es.eigenvalues()(i);
        if (std::abs(ev.imag()) > 1e-8 * om2) continue;
        const double l2 = ev.real();
        if (l2 < 1e-4 * om2) continue;          // generalized-kernel cluster
        if (l2 > om2 * (1.0 + 1e-6)) continue;  // continuum representation
        candidates.push_back(l2);
    }
    std::sort(candidates.begin(), candidates.end());

    // -- refinement on the full grid ----------------------------------------
    std::vector<GapEigenvalue> found;
    for (double l2 : candidates) {
        if (l2 >= om2) continue;
        auto [l2f, svec] = refine_product_eigen(system, l2);
        if (!(l2f > 1e-4 * om2) || !(l2f < om2 * (1.0 + 1e-9))) continue;
        ModeRefinement ref = mode_from_product(system, std::sqrt(std::min(l2f, om2)), svec);
        if (ref.residual > 1e-7 || !(ref.lambda > 0.0) || !(ref.lambda < omega))
            continue;  // spurious coarse candidate
        bool dup = false;
        for (auto& g : found)
            if (std::abs(g.lambda - ref.lambda) < 1e-7 * omega) dup = true;
        if (dup) continue;
        GapEigenvalue g{ref.lambda, ref.residual, std::move(ref.xi),
                        std::abs(ref.lambda - omega) < rel_tol * omega};
        found.push_back(std::move(g));
    }
    std::sort(found.begin(), found.end(),
              [](const GapEigenvalue& a, const GapEigenvalue& b) { return a.lambda < b.lambda; });

    report.min_dist_to_edge = omega;
    for (auto& g : found) report.min_dist_to_edge = std::min(report.min_dist_to_edge,
                                                             std::abs(g.lambda - omega));
    report.h9_inconclusive = false;
    for (auto& g : found) report.h9_inconclusive |= g.near_threshold;
    report.h9_gap_only_pass = (found.size() == 1) && !report.h9_inconclusive;
    if (found.empty())
        report.note = "no gap eigenvalues beyond the generalized kernel";
    else if (found.size() > 1)
        report.note = "extra gap eigenvalues present: (H9) violated on the gap scan";
    if (report.h9_inconclusive)
        report.note = "possible resonance, (H9) check inconclusive";

    if (found.size() >= 1 && !found.front().near_threshold) {
        system.set_mode(found.front().lambda, found.front().xi, rel_tol);
        report.resonance_index = system.resonance_index();
        report.resonance_margin = system.resonance_margin();
    }
    report.modes = std::move(found);
    return report;
}

}  // namespace nlslab

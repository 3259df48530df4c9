#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace nlslab {

/// Symmetric tridiagonal operator (diag d_j, off-diagonal e_j between j and
/// j+1).  Used for the symmetrized radial Schroedinger operators.
struct SymTridiag {
    Eigen::ArrayXd diag;
    Eigen::ArrayXd off;  // size n-1

    int size() const { return static_cast<int>(diag.size()); }

    Eigen::ArrayXd apply(const Eigen::ArrayXd& x) const {
        const int n = size();
        Eigen::ArrayXd y(n);
        for (int j = 0; j < n; ++j) {
            double v = diag[j] * x[j];
            if (j > 0) v += off[j - 1] * x[j - 1];
            if (j + 1 < n) v += off[j] * x[j + 1];
            y[j] = v;
        }
        return y;
    }
    Eigen::ArrayXcd apply(const Eigen::ArrayXcd& x) const {
        Eigen::ArrayXd re = apply(Eigen::ArrayXd(x.real()));
        Eigen::ArrayXd im = apply(Eigen::ArrayXd(x.imag()));
        Eigen::ArrayXcd y(size());
        y.real() = re;
        y.imag() = im;
        return y;
    }

    /// Number of eigenvalues strictly below `shift` (Sturm sequence count).
    int count_below(double shift) const {
        const int n = size();
        int count = 0;
        double q = diag[0] - shift;
        if (q < 0) ++count;
        for (int j = 1; j < n; ++j) {
            double e = off[j - 1];
            if (q == 0.0) q = 1e-300;
            q = (diag[j] - shift) - e * e / q;
            if (q < 0) ++count;
        }
        return count;
    }

    /// k-th smallest eigenvalue (k = 0 based) by Sturm bisection.
    double eigenvalue_by_index(int k, double tol = 1e-13) const {
        // Gershgorin bounds
        double lo = diag[0], hi = diag[0];
        const int n = size();
        for (int j = 0; j < n; ++j) {
            double r = 0;
            if (j > 0) r += std::abs(off[j - 1]);
            if (j + 1 < n) r += std::abs(off[j]);
            lo = std::min(lo, diag[j] - r);
            hi = std::max(hi, diag[j] + r);
        }
        double scale = std::max(std::abs(lo), std::abs(hi));
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            if (count_below(mid) > k)
                hi = mid;
            else
                lo = mid;
            if (hi - lo < tol * scale) break;
        }
        return 0.5 * (lo + hi);
    }
};

/// LU factorization of a general (possibly non-symmetric) tridiagonal matrix
/// with partial pivoting.  Row j holds (dl_j, d_j, du_j).
template <class S>
class TridiagLU {
   public:
    TridiagLU() = default;
    /// Factor the matrix with subdiagonal dl (size n-1, entry j couples row
    /// j+1 to column j), diagonal d (size n), superdiagonal du (size n-1).
    void factor(std::vector<S> dl, std::vector<S> d, std::vector<S> du) {
        n_ = static_cast<int>(d.size());
        dl_ = std::move(dl);
        d_ = std::move(d);
        du_ = std::move(du);
        du2_.assign(std::max(0, n_ - 2), S(0));
        piv_.assign(n_, 0);
        for (int i = 0; i + 1 < n_; ++i) {
            if (std::abs(d_[i]) >= std::abs(dl_[i])) {
                piv_[i] = 0;
                if (d_[i] == S(0)) throw std::runtime_error("TridiagLU: singular matrix");
                S m = dl_[i] / d_[i];
                dl_[i] = m;
                d_[i + 1] -= m * du_[i];
            } else {
                piv_[i] = 1;
                S m = d_[i] / dl_[i];
                std::swap(d_[i], dl_[i]);
                S tmp = du_[i];
                du_[i] = d_[i + 1];
                d_[i + 1] = tmp - m * d_[i + 1];
                if (i + 2 < n_) {
                    du2_[i] = du_[i + 1];
                    du_[i + 1] = -m * du_[i + 1];
                }
                dl_[i] = m;
            }
        }
        if (d_[n_ - 1] == S(0)) throw std::runtime_error("TridiagLU: singular matrix");
    }

    std::vector<S> solve(std::vector<S> b) const {
        // forward elimination replaying the pivoting
        for (int i = 0; i + 1 < n_; ++i) {
            if (piv_[i] == 1) std::swap(b[i], b[i + 1]);
            b[i + 1] -= dl_[i] * b[i];
        }
        // back substitution
        b[n_ - 1] /= d_[n_ - 1];
        if (n_ >= 2) {
            int i = n_ - 2;
            b[i] = (b[i] - du_[i] * b[i + 1]) / d_[i];
            for (i = n_ - 3; i >= 0; --i)
                b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
        }
        return b;
    }

    /// Rough reciprocal pivot size; small values flag near-singularity.
    double min_pivot() const {
        double m = std::abs(d_[0]);
        for (int i = 1; i < n_; ++i) m = std::min(m, std::abs(d_[i]));
        return m;
    }

   private:
    int n_ = 0;
    std::vector<S> dl_, d_, du_, du2_;
    std::vector<int> piv_;
};

/// Solve (T - shift) x = b for symmetric tridiagonal T.
inline Eigen::ArrayXd tridiag_solve_shifted(const SymTridiag& t, double shift,
                                            const Eigen::ArrayXd& b) {
    const int n = t.size();
    std::vector<double> dl(n - 1), d(n), du(n - 1), rhs(n);
    for (int j = 0; j < n; ++j) d[j] = t.diag[j] - shift;
    for (int j = 0; j + 1 < n; ++j) dl[j] = du[j] = t.off[j];
    for (int j = 0; j < n; ++j) rhs[j] = b[j];
    TridiagLU<double> lu;
    lu.factor(std::move(dl), std::move(d), std::move(du));
    auto x = lu.solve(std::move(rhs));
    return Eigen::Map<Eigen::ArrayXd>(x.data(), n);
}

/// Eigenvector for an isolated eigenvalue of T found by bisection: a few
/// inverse-iteration sweeps at a slightly detuned shift.
inline Eigen::ArrayXd tridiag_eigenvector(const SymTridiag& t, double lambda, int iters = 4) {
    const int n = t.size();
    double scale = t.diag.abs().maxCoeff() + t.off.abs().maxCoeff();
    double detune = 1e-11 * std::max(1.0, scale);
    Eigen::ArrayXd v = Eigen::ArrayXd::Constant(n, 1.0 / std::sqrt(double(n)));
    for (int j = 0; j < n; ++j) v[j] *= (1.0 + 1e-3 * std::sin(7.0 * (j + 1)));
    for (int it = 0; it < iters; ++it) {
        v = tridiag_solve_shifted(t, lambda + detune, v);
        v /= std::sqrt(v.square().sum());
    }
    return v;
}

}  // namespace nlslab

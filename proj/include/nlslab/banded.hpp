#pragma once

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace nlslab {

/// Banded LU with partial pivoting, LAPACK gbtrf-style storage.
/// kl subdiagonals, ku superdiagonals; factorization fills ku + kl
/// superdiagonals.  Row/column indices are 0-based.
template <class S>
class BandedLU {
   public:
    BandedLU(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
          ab_(static_cast<size_t>(ldab_) * n, S(0)), piv_(n, 0) {}

    /// Assemble entry A(i,j) before factorization.
    void add(int i, int j, S v) {
        if (i < 0 || j < 0 || i >= n_ || j >= n_) throw std::out_of_range("BandedLU::add");
        if (j - i > ku_ || i - j > kl_) throw std::out_of_range("BandedLU::add: outside band");
        at(kl_ + ku_ + i - j, j) += v;
    }

    void factor() {
        const int kv = kl_ + ku_;
        int ju_run = 0;  // rightmost column carrying fill (cumulative)
        for (int j = 0; j < n_; ++j) {
            // pivot search in column j over rows j..min(j+kl, n-1)
            int km = std::min(kl_, n_ - 1 - j);
            int jp = 0;
            double best = std::abs(at(kv, j));
            for (int k = 1; k <= km; ++k) {
                double v = std::abs(at(kv + k, j));
                if (v > best) {
                    best = v;
                    jp = k;
                }
            }
            piv_[j] = j + jp;
            if (best == 0.0) throw std::runtime_error("BandedLU: singular matrix");
            ju_run = std::max(ju_run, std::min(n_ - 1, j + ku_ + jp));
            const int ju = ju_run;
            if (jp != 0) {
                for (int c = j; c <= ju; ++c) std::swap(at(kv + jp + j - c, c), at(kv + j - c, c));
            }
            if (km > 0) {
                S dinv = S(1) / at(kv, j);
                for (int k = 1; k <= km; ++k) at(kv + k, j) *= dinv;
                for (int c = j + 1; c <= ju; ++c) {
                    S ujc = at(kv + j - c, c);
                    if (ujc != S(0)) {
                        for (int k = 1; k <= km; ++k) at(kv + k + j - c, c) -= at(kv + k, j) * ujc;
                    }
                }
            }
        }
        factored_ = true;
    }

    std::vector<S> solve(std::vector<S> b) const {
        if (!factored_) throw std::logic_error("BandedLU::solve before factor");
        const int kv = kl_ + ku_;
        for (int j = 0; j < n_; ++j) {
            int pj = piv_[j];
            if (pj != j) std::swap(b[j], b[pj]);
            int km = std::min(kl_, n_ - 1 - j);
            for (int k = 1; k <= km; ++k) b[j + k] -= at(kv + k, j) * b[j];
        }
        for (int j = n_ - 1; j >= 0; --j) {
            b[j] /= at(kv, j);
            const int top = std::min(kl_ + ku_, j);
            for (int k = 1; k <= top; ++k) b[j - k] -= at(kv - k, j) * b[j];
        }
        return b;
    }

    double min_pivot() const {
        const int kv = kl_ + ku_;
        double m = std::abs(at(kv, 0));
        for (int j = 1; j < n_; ++j) m = std::min(m, std::abs(at(kv, j)));
        return m;
    }

   private:
    S& at(int r, int c) { return ab_[static_cast<size_t>(c) * ldab_ + r]; }
    const S& at(int r, int c) const { return ab_[static_cast<size_t>(c) * ldab_ + r]; }

    int n_, kl_, ku_, ldab_;
    std::vector<S> ab_;
    std::vector<int> piv_;
    bool factored_ = false;
};

/// Dense representation of a banded matrix-vector product (row-wise bands),
/// kept for residual checks without reassembling the LU.
template <class S>
struct BandedMatrix {
    int n, kl, ku;
    std::vector<S> data;  // (kl+ku+1) x n, row band index b = ku + i - j

    BandedMatrix(int n_, int kl_, int ku_)
        : n(n_), kl(kl_), ku(ku_), data(static_cast<size_t>(kl_ + ku_ + 1) * n_, S(0)) {}

    S& at(int i, int j) { return data[static_cast<size_t>(j) * (kl + ku + 1) + (ku + i - j)]; }
    const S& at(int i, int j) const {
        return data[static_cast<size_t>(j) * (kl + ku + 1) + (ku + i - j)];
    }
    void add(int i, int j, S v) {
        if (j - i > ku || i - j > kl) throw std::out_of_range("BandedMatrix::add");
        at(i, j) += v;
    }

    template <class T>
    std::vector<decltype(S() * T())> apply(const std::vector<T>& x) const {
        std::vector<decltype(S() * T())> y(n, decltype(S() * T())(0));
        for (int i = 0; i < n; ++i) {
            int j0 = std::max(0, i - kl), j1 = std::min(n - 1, i + ku);
            decltype(S() * T()) v(0);
            for (int j = j0; j <= j1; ++j) v += at(i, j) * x[j];
            y[i] = v;
        }
        return y;
    }

    BandedLU<S> lu() const {
        BandedLU<S> f(n, kl, ku);
        for (int j = 0; j < n; ++j) {
            int i0 = std::max(0, j - ku), i1 = std::min(n - 1, j + kl);
            for (int i = i0; i <= i1; ++i) {
                S v = at(i, j);
                if (v != S(0)) f.add(i, j, v);
            }
        }
        f.factor();
        return f;
    }
};

}  // namespace nlslab

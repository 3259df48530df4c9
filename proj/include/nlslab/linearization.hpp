#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/grid.hpp"
#include "nlslab/ground_state.hpp"
#include "nlslab/nonlinearity.hpp"
#include "nlslab/tridiag.hpp"

namespace nlslab {

struct SpectralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Discretization of the linearized operator H = sigma3(-Lap + omega) + V
/// around a ground state, together with its discrete spectral data.
///
/// In components (u-space):  H = [[A, -c], [c, -A]],
///   A = -Lap + omega - b,  b = beta(phi^2) + beta'(phi^2) phi^2,
///   c = beta'(phi^2) phi^2.
class LinearizedSystem {
   public:
    LinearizedSystem(NonlinearitySpec spec, RadialGrid grid, double omega, RealField phi,
                     RealField dphi, double mass_slope);

    const RadialGrid& grid() const { return grid_; }
    const NonlinearitySpec& spec() const { return spec_; }
    double omega() const { return omega_; }
    const RealField& phi() const { return phi_; }
    const RealField& dphi() const { return dphi_; }
    double mass_slope() const { return mass_slope_; }
    const RealField& potential_b() const { return b_; }
    const RealField& potential_c() const { return c_; }
    const SymTridiag& a_op() const { return a_op_; }  // symmetrized A

    /// Apply H (or H^* = sigma3 H sigma3) to a two-component field.
    Spinor apply(const Spinor& f) const;
    Spinor apply_adjoint(const Spinor& f) const;

    /// L_+ s = lambda d, L_- d = lambda s factorization operators.
    const SymTridiag& lplus() const { return lplus_; }
    const SymTridiag& lminus() const { return lminus_; }

    // -- internal mode ------------------------------------------------------
    bool has_mode() const { return has_mode_; }
    double lambda() const { return lambda_; }
    const Spinor& xi() const { return xi_; }
    double mode_residual() const { return mode_residual_; }
    double xi_pairing_raw() const { return xi_pairing_raw_; }  // <xi,s3 xi> before scaling
    int resonance_index() const { return N_; }
    double resonance_margin() const { return margin_; }

    /// Install a refined internal mode (normalizes <xi, sigma3 xi> = 1,
    /// fixes the resonance index N) and build the spectral projection.
    void set_mode(double lambda, Spinor xi, double rel_tol_ratio = 1e-6);

    // -- spectral projection -------------------------------------------------
    /// P_c: remove the components along the generalized kernel and the
    /// internal-mode pair, using the dual basis and a 4x4 Gram solve.
    Spinor project_continuous(const Spinor& f) const;
    /// Adjoint projection onto L^2_c(H^*).
    Spinor project_continuous_adjoint(const Spinor& f) const;
    double gram_condition() const { return gram_condition_; }

    const std::array<Spinor, 4>& discrete_basis() const { return basis_; }
    const std::array<Spinor, 4>& dual_basis() const { return duals_; }

    /// sigma3 Phi, d_omega Phi as spinors (available before the mode is set).
    Spinor sigma3_Phi() const;
    Spinor dPhi() const;
    Spinor Phi() const;

    /// Derivative of the internal mode along the branch; solved from the
    /// bordered system (H - lambda) y = lambda' xi - H' xi, <y, s3 xi> = 0.
    /// Requires d_omega phi.  Cached.
    const Spinor& dxi() const;
    double dlambda() const;

   private:
    void build_projection();

    NonlinearitySpec spec_;
    RadialGrid grid_;
    double omega_;
    RealField phi_, dphi_;
    double mass_slope_;
    RealField b_, c_;
    SymTridiag a_op_, lplus_, lminus_;

    bool has_mode_ = false;
    double lambda_ = 0.0;
    Spinor xi_;
    double mode_residual_ = 0.0;
    double xi_pairing_raw_ = 0.0;
    int N_ = 0;
    double margin_ = 0.0;

    std::array<Spinor, 4> basis_;
    std::array<Spinor, 4> duals_;
    Eigen::Matrix4d gram_, gram_inv_;
    double gram_condition_ = 0.0;
    bool projection_ready_ = false;

    mutable std::optional<Spinor> dxi_;
    mutable double dlambda_ = 0.0;
};

/// Convenience: ground state + d_omega phi + mass slope + operator assembly.
LinearizedSystem assemble_system(const NonlinearitySpec& spec, const RadialGrid& grid,
                                 double omega, const RealField* warm_phi = nullptr);

struct GapEigenvalue {
    double lambda;        // positive member of the +/- pair
    double residual;      // ||H xi - lambda xi|| / ||xi||
    Spinor xi;
    bool near_threshold;  // |lambda - omega| below tolerance: (H9) inconclusive
};

struct SpectrumReport {
    std::vector<GapEigenvalue> modes;   // gap eigenvalues beyond the kernel
    int kernel_dimension = 2;           // known analytically: sigma3 Phi, d_omega Phi chain
    double kernel_residual = 0.0;       // || H sigma3 Phi || / || Phi ||
    double chain_residual = 0.0;        // || H dPhi + sigma3 Phi || / || Phi ||
    bool h9_gap_only_pass = false;      // exactly one +/- pair in the gap
    bool h9_inconclusive = false;       // near-threshold candidate present
    double min_dist_to_edge = 0.0;      // min |lambda - omega| over found modes
    int resonance_index = 0;
    double resonance_margin = 0.0;
    std::string note;
};

/// Shift-invert sweep of the spectral gap (-omega, omega).  Detection runs a
/// dense solve of the L_- L_+ product on a coarsened copy of the grid,
/// refinement re-solves on the full grid.  Installs the internal mode into
/// `system` when exactly one pair is found.
SpectrumReport discrete_spectrum(LinearizedSystem& system, int coarse_size = 800,
                                 double rel_tol = 1e-3);

/// Refine one eigenvalue of the product L_- L_+ near lambda2_guess on the
/// full grid by shift-invert iteration; returns (lambda^2, s-vector).
std::pair<double, RealField> refine_product_eigen(const LinearizedSystem& system,
                                                  double lambda2_guess, int max_iter = 40);

/// Build the mode spinor from the s-solution of L_- L_+ s = lambda^2 s and
/// polish the pair on the full two-component eigenproblem.
struct ModeRefinement {
    Spinor xi;
    double lambda;
    double residual;
};
ModeRefinement mode_from_product(const LinearizedSystem& system, double lambda,
                                 const RealField& s_vspace);

}  // namespace nlslab

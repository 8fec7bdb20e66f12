#ifndef LPNF_NORMALFORM_HPP
#define LPNF_NORMALFORM_HPP

#include <vector>

#include "lpnf/resonance.hpp"
#include "lpnf/series.hpp"

namespace lpnf {

/// Vector field on C^{n+p}: n x-components and p u-components.
struct FiberedField {
    VectorField x;
    std::vector<Series> u;

    explicit FiberedField(const Context &ctx) : x(ctx), u(ctx.p, Series(ctx)) {}
    FiberedField(VectorField xc, std::vector<Series> uc) : x(std::move(xc)), u(std::move(uc)) {}
    bool is_zero() const;
    FiberedField &operator+=(const FiberedField &o);
    FiberedField &operator*=(cplx c);
};

/// The lift (X, pi_* X): ucomps[k] = Lie derivative of x^{R_k} along X.
FiberedField fibered_lift(const VectorField &X, const ResonantStructure &R);

/// Derivation of a series along a fibered field (x- and u-slots).
Series fibered_derive(const FiberedField &A, const Series &f);
/// Bracket on C^{n+p}.
FiberedField fibered_bracket(const FiberedField &A, const FiberedField &B);

/// Diffeomorphism x = Phi(y,v) = y + U(y,v), fibered over pi:
/// u = v + pi(y+U) - pi(y). Tangent to identity (order(U) >= 2).
class FiberedDiffeo {
  public:
    FiberedDiffeo(VectorField U, const ResonantStructure &R);
    static FiberedDiffeo identity(const Context &ctx, const ResonantStructure &R);

    const VectorField &U() const { return U_; }
    const ResonantStructure &R() const { return R_; }
    /// u-displacement pi(x+U) - pi(x), materialized on first use.
    const std::vector<Series> &u_disp() const;
    bool is_identity() const { return U_.is_zero(); }

  private:
    VectorField U_;
    ResonantStructure R_;
    mutable std::vector<Series> udisp_;
    mutable bool have_udisp_ = false;
};

/// Pullback of the fibered field F by Phi (the field seen in the new
/// variables when old = Phi(new)): solves (I + DW) Y = F o Phi by Neumann
/// iteration; no map inversion involved.
FiberedField fibered_pullback(const FiberedField &F, const FiberedDiffeo &Phi);

/// Compositional inverse of Phi within the fibered class.
FiberedDiffeo invert_fibered(const FiberedDiffeo &Phi);

/// Push-forward Phi_* F = pullback by Phi^{-1}.
FiberedField apply_fibered_diffeo(const FiberedField &F, const FiberedDiffeo &Phi);

/// Finite Lie series exp(ad_W) X = X + [W,X] + [W,[W,X]]/2 + ...; equals the
/// pullback of X by the time-1 flow of W. W.x must have order >= 2.
FiberedField pushforward(const FiberedField &X, const FiberedField &W);

/// Displacement of the time-1 flow map of the fibered generator W
/// (exp(L_W) applied to the coordinate functions); used as the oracle
/// counterpart of `pushforward`.
std::pair<std::vector<Series>, std::vector<Series>> flow_map_of(const FiberedField &W);
/// Pullback of F by an arbitrary near-identity map given by displacements.
FiberedField map_pullback(const FiberedField &F, const std::vector<Series> &xdisp,
                          const std::vector<Series> &udisp);

struct StepRecord {
    int k = 0;
    int m_from = 0, m_to = 0;
    double t_m = 0, gamma_k = 0, theta_k = 0;
    double radii[5] = {0, 0, 0, 0, 0};
    double nf_norm = 0, dunf_norm = 0, window_norm = 0, new_remainder_norm = 0;
    double min_divisor_at_b = 0;      // min |A_{m,alpha}(b)| over solved weights
    double window_residual = 0;       // off-weight window content after Sigma-reduction
    double mid_dust = 0;              // content at x-degrees 2..m after the transform (exactness check)
    double good_pert_residual = 0;    // span-reconstruction residual of B_0|Sigma
    double u_overflow_dropped = 0;    // resonant content beyond umax, dropped by truncation
    int n_weights_solved = 0;
};

/// Current normalization order m, the coefficients a_j^m(u), the remainder of
/// order >= m+1, the Sigma-vanishing bookkeeping (ideal coefficients g_k with
/// sigma_part = sum (x^{R_k}-u_k) g_k), and the composed diffeo chain
/// (old = Phi_{m0} o Phi_{2m0} o ... (new)).
struct NormalizationState {
    LinearMorphism S;
    ResonantStructure R;
    int m = 0;
    std::vector<Series> a;       // l u-series around the base
    VectorField remainder;       // stored support has x-degree >= m+1
    std::vector<VectorField> sigma_ideal; // p ideal coefficients
    std::vector<FiberedDiffeo> psi;       // per-step diffeos, outermost first
    std::vector<StepRecord> ledger;

    const Context &ctx() const { return remainder.ctx(); }
    std::vector<cplx> base() const { return ctx().base; }
    VectorField nf_field() const; // sum a_j S_j
};

/// A_{m,alpha}(u) = sum_j a_j^m(u) alpha(g_j).
Series small_divisor(const Weight &alpha, const NormalizationState &st);

/// D_m(U) = sum_j (sum_k da_j/du_k (Dpi U)_k) S_j. Nilpotent: D_m o D_m = 0.
VectorField d_m_operator(const VectorField &U, const NormalizationState &st);

/// Sign of the D_m correction inside the solver. `spec` solves
/// [NF,U] + D_m(U) = B (the stated cohomological equation); `adjoint` solves
/// [NF,U] - D_m(U) = B, which is the equation the coordinate change
/// x = y + U actually needs to cancel B in the window.
enum class DmSign { spec, adjoint };

/// Solution U = (Id -/+ D_m/A)(B_alpha/A) of the cohomological equation;
/// throws ZeroSmallDivisor when |A(base)| < divisor_floor.
VectorField cohomological_solve(const VectorField &B_alpha, const Weight &alpha,
                                const NormalizationState &st, double divisor_floor,
                                DmSign sign = DmSign::spec);

/// Residual [NF,U] + D_m(U) - B (with the sign used by the solve).
VectorField cohom_residual(const VectorField &U, const VectorField &B_alpha,
                           const NormalizationState &st, DmSign sign = DmSign::spec);

/// Both sides of the cohomological estimate: (|U|_{t,r}, c1/(gamma^2 w^2) |B|_{t,r}).
/// Throws PreconditionViolated if ||D_u a||_t > 1.
std::pair<double, double> cohom_norm_bound_check(const VectorField &U, const VectorField &B,
                                                 const NormalizationState &st, double r,
                                                 double t, double c1, double gamma,
                                                 double omega);

/// a_j(u) extracted from a diagonal-linear field sum x_k g_k(u) d/dx_k via the
/// pivoted l x l block of lambda; throws NotDiagonalLinear / NotInSpan.
std::vector<Series> extract_a_coeffs(const VectorField &NF, const LinearMorphism &S,
                                     double good_tol = 1e-9);

/// True iff the Sigma-reduced resonant block lies in span{S_j} over u-series.
bool good_perturbation_check(const VectorField &B0_reduced, const LinearMorphism &S,
                             double good_tol = 1e-9);

/// |L^{-1}| (infinity norm) for the pivoted block used by extract_a_coeffs.
double Linv_norm(const LinearMorphism &S);

struct NewtonOptions {
    double gamma = 0.1;
    double omega_next = 1.0;   // omega_{k+1} of the schedule at this step
    double divisor_floor_abs = 1e-12;
    double good_tol = 1e-9;
    double r = 1.0;            // radius for the recorded norms
    // schedule values recorded into the ledger (filled by the driver)
    int k = 0;
    double t_m = 0, gamma_k = 0, theta_k = 0;
    double radii[5] = {0, 0, 0, 0, 0};
};

/// One quadratic step m -> 2m. Splits the remainder window, solves per
/// nonzero weight, transforms by the fibered diffeo, absorbs the resonant
/// block into the a_j, and re-splits. Requires 2m+1 <= xmax.
NormalizationState newton_step(const NormalizationState &st, const NewtonOptions &opt);

/// Fresh state at order m0 from integrable coefficients and a perturbation of
/// order >= m0+1.
NormalizationState make_state(const LinearMorphism &S, const ResonantStructure &R,
                              std::vector<Series> a, const VectorField &perturbation, int m0);

/// Classical order-by-order normalization of a pure-x field with diagonal
/// linear part: kills nonresonant terms degree by degree, dividing by
/// (Q,nu) - nu_i. Returns (normal form, displacement T with old = (Id+T)(new)).
std::pair<VectorField, VectorField> poincare_dulac_normalize(const VectorField &X,
                                                             const LinearMorphism &S,
                                                             int target_order,
                                                             double divisor_floor = 1e-12);

} // namespace lpnf

#endif

#ifndef LPNF_VERIFY_HPP
#define LPNF_VERIFY_HPP

#include <vector>

#include "lpnf/kam.hpp"
#include "lpnf/normalform.hpp"

namespace lpnf {

/// Assembled problem instance: the morphism, the toric structure, the
/// integrable coefficients a_j(u) (polynomials around 0, re-expanded around
/// the working base at setup), and a perturbation of order >= m0+1.
struct Scenario {
    std::string name;
    LinearMorphism S;
    ResonantStructure R;
    std::vector<Series> a;   // around ctx.base
    VectorField perturbation;
    int m0 = 0;

    Context ctx() const { return perturbation.ctx(); }
    VectorField full_field() const; // sum a_j(pi(x)) S_j + perturbation, pure x
    NormalizationState initial_state() const;
};

/// Term of a polynomial in the u-variables (absolute coordinates, around 0).
struct UPolyTerm {
    std::vector<int> ue;
    cplx c;
};
/// Term of a polynomial in the x-variables; `comp` names the d/dx_i slot when
/// the term belongs to a vector field (ignored for scalar polynomials).
struct XPolyTerm {
    std::vector<int> xe;
    cplx c;
    int comp = -1;
};

/// Complexified Hamiltonian scenario: variables (z_1,w_1,...,z_N,w_N),
/// S_j = z_j d/dz_j - w_j d/dw_j, u_j = z_j w_j,
/// G0 = sum_j mu-poly in u, X0 = Hamiltonian field of G0, perturbation the
/// Hamiltonian field of h (so good-perturbation is inherited).
Scenario scenario_hamiltonian(int n_pairs, const std::vector<std::vector<cplx>> &mu,
                              const std::vector<XPolyTerm> &h_terms, int xmax, int umax,
                              const std::vector<cplx> &base);

/// Volume-preserving scenario: S_j = x_j d/dx_j - x_{j+1} d/dx_{j+1}
/// (j = 1..n-1), u = x_1...x_n; checks the perturbation is divergence free.
Scenario scenario_volume(int n, const std::vector<std::vector<UPolyTerm>> &a_spec,
                         const std::vector<XPolyTerm> &pert_terms, int xmax, int umax,
                         const std::vector<cplx> &base);

/// Hamiltonian field of a pure-x polynomial in (z,w) pairs:
/// dG/dw_i d/dz_i - dG/dz_i d/dw_i.
VectorField hamiltonian_field(const Series &G);
/// Divergence sum_i dX_i/dx_i.
Series divergence(const VectorField &X);

struct FlowOptions {
    double tol = 1e-10;     // local error per unit time
    double escape_radius = 0;   // FlowEscapedDomain beyond this (0 = off)
    double h_init = 1e-2;
    double h_min = 1e-12;
    int max_steps = 2000000;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<std::vector<cplx>> x;
};

/// Adaptive embedded Runge-Kutta (Cash-Karp 4(5)) on C^n for the pure-x field
/// X evaluated with u frozen at the context base. Deterministic.
Trajectory flow(const VectorField &X, const std::vector<cplx> &x0, double T,
                const FlowOptions &opt);

/// Theta_b: the composed diffeo chain of the state at u = b (pure-x
/// displacement, old coordinates from new).
VectorField theta_displacement(const NormalizationState &st);

struct ConjugacyResidual {
    double window;   // majorant norm at rho of degrees <= 2^{k_end} after fiber reduction
    double tail;     // same for degrees above the normalized order
};

/// D Theta_b . NF_b - X o Theta_b, reduced modulo x^{R_i} = b_i, measured at
/// radius rho.
ConjugacyResidual conjugacy_residual(const Scenario &scn, const NormalizationState &st,
                                     double rho);

struct DriftStats {
    double straightened; // max_t |pi(Psi_b(flow)) - b|
    double raw;          // max_t |pi(flow) - pi(start)|
    int n_samples;
};

/// Fiber samples through Theta_b, integrated under the full perturbed field;
/// reports conserved-quantity drift in straightened and raw coordinates.
/// use_theta = false runs the Theta = Id contrast.
DriftStats invariant_residual(const Scenario &scn, const NormalizationState &st,
                              const std::vector<cplx> &b, double rho, double T,
                              int n_samples, const FlowOptions &fopt, bool use_theta = true);

/// Fiber sample points on pi^{-1}(b) with balanced coordinate moduli.
std::vector<std::vector<cplx>> fiber_samples(const ResonantStructure &R,
                                             const std::vector<cplx> &b, int n_samples);

/// Runs Newton normalization to target order and Poincare-Dulac on the same
/// scenario field, Sigma-reduces both normal forms with u_i = x^{R_i}
/// identified, and returns the max coefficient discrepancy up to `order`.
double oracle_equivalence(const Scenario &scn, int order, const DiophantineSchedule &sched);

/// Drives newton_step from m0 to target_order with ledger bookkeeping.
NormalizationState normalize_to_order(const Scenario &scn, int target_order,
                                      const DiophantineSchedule &sched);

} // namespace lpnf

#endif

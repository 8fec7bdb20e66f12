#ifndef LPNF_RESONANCE_HPP
#define LPNF_RESONANCE_HPP

#include <optional>
#include <vector>

#include "lpnf/rational.hpp"
#include "lpnf/series.hpp"

namespace lpnf {

/// The morphism S: row j holds the eigenvalue tuple (lambda_j(x_1..x_n)) of
/// S_j = sum_i lambda_{j,i} x_i d/dx_i. Rows must be linearly independent
/// (rank l, l <= n). When every entry is a Gaussian rational, resonance
/// decisions (alpha == 0, lam.Q == 0) are exact; otherwise a tolerance
/// eps_res applies and downstream reports flag float resonance mode.
class LinearMorphism {
  public:
    static constexpr double kEpsRes = 1e-9;

    LinearMorphism() = default;
    LinearMorphism(int n, int l, std::vector<std::vector<cplx>> lam);
    /// Exact mode; the float matrix is derived from the rational entries.
    LinearMorphism(int n, int l, std::vector<std::vector<GaussianRational>> lam);

    int n() const { return n_; }
    int l() const { return l_; }
    bool exact() const { return !ratlam_.empty(); }
    cplx lam(int j, int i) const { return lam_[j][i]; }
    const std::vector<std::vector<cplx>> &matrix() const { return lam_; }
    double Lambda() const; // max_{i,j} |lambda_{j,i}|

    /// True iff sum_i Q_i lambda_{j,i} == 0 for every row j.
    bool kernel_member(const std::vector<int> &Q) const;
    /// True iff the weight alpha_{Q,i} vanishes (exact or within eps_res).
    bool weight_is_zero(const Mono &xonly, int i) const;

    /// Exact mode only: every weight component lies on the (1/q)-lattice of
    /// Gaussian rationals, so nonzero weights have max-norm >= 1/q. Returns
    /// that floor, or nullopt in float mode.
    std::optional<double> lattice_floor() const;

    /// S_j as a vector field in the given context.
    VectorField S_field(const Context &ctx, int j) const;

  private:
    int n_ = 0, l_ = 0;
    std::vector<std::vector<cplx>> lam_;
    std::vector<std::vector<GaussianRational>> ratlam_;
};

/// alpha_{Q,i} = (Q,lambda) - lambda_i as an l-tuple, with its sources.
struct Weight {
    std::vector<cplx> vals;               // length l
    std::vector<std::pair<Mono, int>> sources; // (x-monomial, direction i)
    double max_norm() const;
    double two_norm() const;
    bool is_zero(double eps) const;
};

Weight weight_of(const LinearMorphism &S, const Mono &xonly, int i);

/// All nonzero weights with k_low <= |Q| <= k_high, deduplicated by value
/// (exact in rational mode, within eps_res otherwise), deterministic order.
std::vector<Weight> nonzero_weights_in(const LinearMorphism &S, int k_low, int k_high);

/// The exponent matrix R (p x n) of the resonant monomials x^{R_k}, the map
/// pi and the graph variety Sigma.
class ResonantStructure {
  public:
    ResonantStructure() = default;
    ResonantStructure(const LinearMorphism &S, std::vector<std::vector<int>> rows);

    int p() const { return int(rows_.size()); }
    int n() const { return n_; }
    const std::vector<int> &row(int k) const { return rows_[k]; }
    const std::vector<std::vector<int>> &rows() const { return rows_; }
    int rank() const { return rank_; }
    int row_degree(int k) const;
    int min_row_degree() const;
    /// Two rows divide a common monomial iff their supports overlap; the
    /// fixed reduction strategy is confluent when no two do.
    bool overlapping_supports() const;

    /// pi(x) = (x^{R_1},...,x^{R_p}).
    std::vector<cplx> pi(const std::vector<cplx> &x) const;
    /// x^{R_k} as a series.
    Series monomial_series(const Context &ctx, int k) const;
    /// Entry (k,i) of Dpi as a series: R_{k,i} x^{R_k}/x_i.
    Series dpi_entry(const Context &ctx, int k, int i) const;

  private:
    int n_ = 0;
    std::vector<std::vector<int>> rows_;
    int rank_ = 0;
};

/// Minimal generating set of {Q in N^n : lam.Q = 0} up to |Q| <= degree_bound
/// (bounded Hilbert basis): solutions not expressible as a sum of two other
/// solutions, in graded-lex order. Throws EmptyRing if none exist.
ResonantStructure first_integral_basis(const LinearMorphism &S, int degree_bound);

/// Canonical representative mod the ideal (x^{R_k} - u_k): graded-lex scan,
/// rows tried in ascending index, iterated to fixpoint. If quotients is
/// non-null it receives g_k with f = reduced + sum_k (x^{R_k} - u_k) g_k.
/// u-degree overflow either throws TruncationExceeded (throw_) or drops the
/// term (clip), accumulating the dropped magnitude into *clipped.
enum class SigmaOverflow { throw_, clip };
Series sigma_reduce(const Series &f, const ResonantStructure &R,
                    std::vector<Series> *quotients = nullptr,
                    SigmaOverflow policy = SigmaOverflow::throw_, double *clipped = nullptr);
VectorField sigma_reduce(const VectorField &X, const ResonantStructure &R,
                         std::vector<VectorField> *quotients = nullptr,
                         SigmaOverflow policy = SigmaOverflow::throw_,
                         double *clipped = nullptr);

/// The restriction representative f|_Sigma (same reduced form).
Series restrict_sigma(const Series &f, const ResonantStructure &R);
VectorField restrict_sigma(const VectorField &X, const ResonantStructure &R);

/// Reduce a pure-x series modulo x^{R_k} = b_k (fiber of pi over b).
Series fiber_reduce(const Series &f, const ResonantStructure &R, const std::vector<cplx> &b);

/// Keep exactly the monomial terms x^Q d/dx_i of X whose weight equals alpha
/// (u-dependence rides along untouched).
VectorField weight_project(const VectorField &X, const Weight &alpha, const LinearMorphism &S);
/// Projection onto the zero weight.
VectorField weight_project_zero(const VectorField &X, const LinearMorphism &S);

/// Both sides of x_{j1}..x_{jk} det(Dpi(x))_{I,J} = x^{R_i1}..x^{R_ik} det(R_{I,J}).
std::pair<cplx, cplx> dpi_minor_identity_check(const ResonantStructure &R,
                                               const std::vector<cplx> &x,
                                               const std::vector<int> &I,
                                               const std::vector<int> &J);

/// omega_k(S): window choice between the proofs' definition and the
/// introduction's compatibility variant.
enum class OmegaWindow { proofs, intro };

struct OmegaSResult {
    double value;      // min over the window of max_j |alpha_j|
    bool enumerated;   // false when only the lattice lower bound was available
};

/// min over nonzero weights with |Q| in the window of max_j |alpha(g_j)|.
/// Enumerates when the window is small enough; for exact rational S beyond
/// that, returns the certified lattice lower bound. Throws NoNonzeroWeights
/// if the enumerated window contains none.
OmegaSResult omega_S(const LinearMorphism &S, int k, OmegaWindow w = OmegaWindow::proofs,
                     std::size_t enum_cap = 2000000);

/// Rank test on the u-coefficient vectors of (a_1..a_l) up to jet_order.
bool is_nondegenerate(const std::vector<Series> &a, int jet_order);

struct NondegeneracyIndex {
    int mu0;
    double beta; // includes the 0.5 sampling safety factor
};

/// Index and amount of nondegeneracy of the map a over the grid points:
/// smallest mu <= mu_max with beta(mu) > beta_floor, where beta(mu) is the
/// min over grid x sphere samples of max_{k<=mu} of the k-th directional
/// derivative norm of |(c,a(y))|^2 (order-2 finite differences, step h,
/// maximized over sampled unit directions).
NondegeneracyIndex nondegeneracy_index(const std::vector<Series> &a,
                                       const std::vector<std::vector<cplx>> &grid_points,
                                       int mu_max, double beta_floor = 1e-8,
                                       int n_directions = 64, int n_sphere = 64,
                                       double h = 1e-4, unsigned seed = 20240901);

/// sup over grid points, sphere samples and directions of
/// max_{0<=k<=mu} |D^k |(c,a(y))|^2| — the ||g||-type norm entering the
/// measure bound. Same sampling scheme as nondegeneracy_index.
double russmann_sup_norm(const std::vector<Series> &a,
                         const std::vector<std::vector<cplx>> &grid_points, int mu,
                         int n_directions = 64, int n_sphere = 64, double h = 1e-4,
                         unsigned seed = 20240901);

} // namespace lpnf

#endif

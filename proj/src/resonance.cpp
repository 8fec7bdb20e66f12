#include "lpnf/resonance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lpnf {

using EMat = Eigen::MatrixXcd;

static int matrix_rank(const std::vector<std::vector<cplx>> &rows, int ncols) {
    if (rows.empty()) return 0;
    EMat M(rows.size(), ncols);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < ncols; ++c) M(r, c) = rows[r][c];
    Eigen::ColPivHouseholderQR<EMat> qr(M);
    qr.setThreshold(1e-12);
    return int(qr.rank());
}

LinearMorphism::LinearMorphism(int n, int l, std::vector<std::vector<cplx>> lam)
    : n_(n), l_(l), lam_(std::move(lam)) {
    if (int(lam_.size()) != l) throw Error(errc::dimension_mismatch, "lambda row count");
    for (auto &row : lam_)
        if (int(row.size()) != n) throw Error(errc::dimension_mismatch, "lambda column count");
    if (l > n) throw Error(errc::precondition_violated, "morphism needs l <= n");
    if (matrix_rank(lam_, n) != l)
        throw Error(errc::precondition_violated, "lambda rows must be linearly independent");
}

LinearMorphism::LinearMorphism(int n, int l, std::vector<std::vector<GaussianRational>> lam)
    : n_(n), l_(l), ratlam_(std::move(lam)) {
    if (int(ratlam_.size()) != l) throw Error(errc::dimension_mismatch, "lambda row count");
    lam_.assign(l, std::vector<cplx>(n));
    for (int j = 0; j < l; ++j) {
        if (int(ratlam_[j].size()) != n)
            throw Error(errc::dimension_mismatch, "lambda column count");
        for (int i = 0; i < n; ++i) lam_[j][i] = ratlam_[j][i].to_complex();
    }
    if (l > n) throw Error(errc::precondition_violated, "morphism needs l <= n");
    if (matrix_rank(lam_, n) != l)
        throw Error(errc::precondition_violated, "lambda rows must be linearly independent");
}

double LinearMorphism::Lambda() const {
    double v = 0;
    for (auto &row : lam_)
        for (auto &c : row) v = std::max(v, std::abs(c));
    return v;
}

bool LinearMorphism::kernel_member(const std::vector<int> &Q) const {
    if (exact()) {
        for (int j = 0; j < l_; ++j) {
            GaussianRational s{};
            for (int i = 0; i < n_; ++i) s = s + ratlam_[j][i].scaled(Q[i]);
            if (!s.is_zero()) return false;
        }
        return true;
    }
    for (int j = 0; j < l_; ++j) {
        cplx s = 0;
        for (int i = 0; i < n_; ++i) s += lam_[j][i] * double(Q[i]);
        if (std::abs(s) >= kEpsRes) return false;
    }
    return true;
}

bool LinearMorphism::weight_is_zero(const Mono &xonly, int i) const {
    if (exact()) {
        for (int j = 0; j < l_; ++j) {
            GaussianRational s{};
            for (int k = 0; k < n_; ++k) s = s + ratlam_[j][k].scaled(xonly.xe[k]);
            s = s - ratlam_[j][i];
            if (!s.is_zero()) return false;
        }
        return true;
    }
    for (int j = 0; j < l_; ++j) {
        cplx s = -lam_[j][i];
        for (int k = 0; k < n_; ++k) s += lam_[j][k] * double(xonly.xe[k]);
        if (std::abs(s) >= kEpsRes) return false;
    }
    return true;
}

std::optional<double> LinearMorphism::lattice_floor() const {
    if (!exact()) return std::nullopt;
    long long q = 1;
    for (auto &row : ratlam_)
        for (auto &g : row) {
            q = std::lcm(q, g.re.den());
            q = std::lcm(q, g.im.den());
        }
    return 1.0 / double(q);
}

VectorField LinearMorphism::S_field(const Context &ctx, int j) const {
    VectorField X(ctx);
    for (int i = 0; i < n_; ++i)
        X[i] = Series::monomial(ctx, Mono::x_unit(i), lam_[j][i]);
    return X;
}

double Weight::max_norm() const {
    double v = 0;
    for (auto &c : vals) v = std::max(v, std::abs(c));
    return v;
}

double Weight::two_norm() const {
    double v = 0;
    for (auto &c : vals) v += std::norm(c);
    return std::sqrt(v);
}

bool Weight::is_zero(double eps) const { return max_norm() < eps; }

Weight weight_of(const LinearMorphism &S, const Mono &xonly, int i) {
    Weight w;
    w.vals.resize(S.l());
    for (int j = 0; j < S.l(); ++j) {
        cplx s = -S.lam(j, i);
        for (int k = 0; k < S.n(); ++k) s += S.lam(j, k) * double(xonly.xe[k]);
        w.vals[j] = s;
    }
    w.sources.push_back({xonly, i});
    return w;
}

/// Visit all x-monomials of total degree in [lo, hi] in graded-lex order.
template <typename F>
static void for_each_monomial(int n, int lo, int hi, F &&fn) {
    std::vector<int> Q(n, 0);
    for (int d = lo; d <= hi; ++d) {
        // enumerate compositions of d into n parts, lexicographically
        std::fill(Q.begin(), Q.end(), 0);
        Q[0] = d;
        while (true) {
            fn(Q);
            // next composition
            int i = n - 2;
            while (i >= 0 && Q[i] == 0) --i;
            if (i < 0) break;
            Q[i] -= 1;
            int rest = d - std::accumulate(Q.begin(), Q.begin() + i + 1, 0);
            Q[i + 1] = rest;
            for (int k = i + 2; k < n; ++k) Q[k] = 0;
        }
        if (n == 1) continue;
    }
}

std::vector<Weight> nonzero_weights_in(const LinearMorphism &S, int k_low, int k_high) {
    std::vector<Weight> out;
    if (k_low > k_high) return out;
    if (k_high > 255)
        throw Error(errc::precondition_violated,
                    "weight window degree " + std::to_string(k_high) +
                        " exceeds the exponent representation (255)");
    const double eps = LinearMorphism::kEpsRes;
    for_each_monomial(S.n(), k_low, k_high, [&](const std::vector<int> &Q) {
        Mono m;
        for (int i = 0; i < S.n(); ++i) m.xe[i] = std::uint8_t(Q[i]);
        for (int i = 0; i < S.n(); ++i) {
            if (S.weight_is_zero(m, i)) continue;
            Weight w = weight_of(S, m, i);
            bool merged = false;
            for (auto &e : out) {
                double d = 0;
                for (int j = 0; j < S.l(); ++j) d = std::max(d, std::abs(e.vals[j] - w.vals[j]));
                if (d < eps) {
                    e.sources.push_back(w.sources[0]);
                    merged = true;
                    break;
                }
            }
            if (!merged) out.push_back(std::move(w));
        }
    });
    return out;
}

ResonantStructure::ResonantStructure(const LinearMorphism &S, std::vector<std::vector<int>> rows)
    : n_(S.n()), rows_(std::move(rows)) {
    std::vector<std::vector<cplx>> frows;
    for (auto &r : rows_) {
        if (int(r.size()) != n_) throw Error(errc::dimension_mismatch, "resonant row length");
        bool zero = true;
        for (int e : r) {
            if (e < 0) throw Error(errc::precondition_violated, "resonant exponent < 0");
            if (e > 0) zero = false;
        }
        if (zero) throw Error(errc::precondition_violated, "zero resonant row");
        if (!S.kernel_member(r))
            throw Error(errc::precondition_violated, "resonant row is not S-invariant");
        std::vector<cplx> fr(r.begin(), r.end());
        frows.push_back(fr);
    }
    rank_ = matrix_rank(frows, n_);
    if (rank_ != int(rows_.size()))
        throw Error(errc::precondition_violated,
                    "resonant rows must be independent (rank R = p)");
}

int ResonantStructure::row_degree(int k) const {
    return std::accumulate(rows_[k].begin(), rows_[k].end(), 0);
}

int ResonantStructure::min_row_degree() const {
    int d = std::numeric_limits<int>::max();
    for (int k = 0; k < p(); ++k) d = std::min(d, row_degree(k));
    return d;
}

bool ResonantStructure::overlapping_supports() const {
    for (int a = 0; a < p(); ++a)
        for (int b = a + 1; b < p(); ++b)
            for (int i = 0; i < n_; ++i)
                if (rows_[a][i] > 0 && rows_[b][i] > 0) return true;
    return false;
}

std::vector<cplx> ResonantStructure::pi(const std::vector<cplx> &x) const {
    std::vector<cplx> u(p(), cplx(1));
    for (int k = 0; k < p(); ++k)
        for (int i = 0; i < n_; ++i)
            for (int e = 0; e < rows_[k][i]; ++e) u[k] *= x[i];
    return u;
}

Series ResonantStructure::monomial_series(const Context &ctx, int k) const {
    Mono m;
    for (int i = 0; i < n_; ++i) m.xe[i] = std::uint8_t(rows_[k][i]);
    return Series::monomial(ctx, m, 1.0);
}

Series ResonantStructure::dpi_entry(const Context &ctx, int k, int i) const {
    if (rows_[k][i] == 0) return Series(ctx);
    Mono m;
    for (int j = 0; j < n_; ++j) m.xe[j] = std::uint8_t(rows_[k][j]);
    m.xe[i] -= 1;
    return Series::monomial(ctx, m, double(rows_[k][i]));
}

ResonantStructure first_integral_basis(const LinearMorphism &S, int degree_bound) {
    std::vector<std::vector<int>> sols;
    for_each_monomial(S.n(), 1, degree_bound, [&](const std::vector<int> &Q) {
        if (S.kernel_member(Q)) sols.push_back(Q);
    });
    // minimality: drop any solution expressible as a sum of two nonzero
    // solutions (Q - A in the kernel monoid for some smaller solution A)
    std::vector<std::vector<int>> basis;
    for (auto &Q : sols) { // sols is graded: summands precede their sums
        bool decomposable = false;
        for (auto &A : sols) {
            if (&A == &Q) continue;
            std::vector<int> diff(S.n());
            bool ok = true;
            int total = 0;
            for (int i = 0; i < S.n(); ++i) {
                diff[i] = Q[i] - A[i];
                if (diff[i] < 0) {
                    ok = false;
                    break;
                }
                total += diff[i];
            }
            if (ok && total > 0 && S.kernel_member(diff)) {
                decomposable = true;
                break;
            }
        }
        if (!decomposable) basis.push_back(Q);
    }
    if (basis.empty())
        throw Error(errc::empty_ring,
                    "no S-invariant monomial up to degree " + std::to_string(degree_bound));
    return ResonantStructure(S, std::move(basis));
}

// ---- Sigma reduction ----

static bool divisible(const Mono &m, const std::vector<int> &row) {
    for (std::size_t i = 0; i < row.size(); ++i)
        if (m.xe[i] < row[i]) return false;
    return true;
}

Series sigma_reduce(const Series &f, const ResonantStructure &R, std::vector<Series> *quotients,
                    SigmaOverflow policy, double *clipped) {
    if (quotients) quotients->assign(R.p(), Series(f.ctx()));
    const auto &base = f.ctx().base;
    Series out(f.ctx());
    // x^{R_k} rewrites to the coordinate u_k = (u_k - b_k) + b_k, so every
    // rewrite forks into the shifted-monomial branch and a b_k-weighted one;
    // x-degree drops strictly, so the worklist terminates.
    std::vector<std::pair<Mono, cplx>> work(f.terms().begin(), f.terms().end());
    while (!work.empty()) {
        auto [m, c] = work.back();
        work.pop_back();
        if (c == cplx(0)) continue;
        int hit = -1;
        for (int k = 0; k < R.p(); ++k)
            if (divisible(m, R.row(k))) {
                hit = k;
                break;
            }
        if (hit < 0) {
            out.add_term(m, c);
            continue;
        }
        Mono rest = m;
        for (int i = 0; i < R.n(); ++i) rest.xe[i] -= R.row(hit)[i];
        // x^m = (x^{R_hit} - u_hit) x^rest + (u_hit - b_hit) x^rest + b_hit x^rest
        if (quotients) (*quotients)[hit].add_term(rest, c);
        if (rest.udeg() + 1 > f.ctx().umax) {
            if (policy == SigmaOverflow::throw_)
                throw Error(errc::truncation_exceeded,
                            "sigma_reduce pushes u-degree beyond umax");
            if (clipped) *clipped = std::max(*clipped, std::abs(c));
        } else {
            Mono shifted = rest;
            shifted.ue[hit] += 1;
            work.push_back({shifted, c});
        }
        cplx bc = c * base[hit];
        if (bc != cplx(0)) work.push_back({rest, bc});
    }
    return out.cleanup();
}

VectorField sigma_reduce(const VectorField &X, const ResonantStructure &R,
                         std::vector<VectorField> *quotients, SigmaOverflow policy,
                         double *clipped) {
    VectorField out(X.ctx());
    if (quotients) quotients->assign(R.p(), VectorField(X.ctx()));
    for (int i = 0; i < X.n(); ++i) {
        std::vector<Series> qs;
        out[i] = sigma_reduce(X[i], R, quotients ? &qs : nullptr, policy, clipped);
        if (quotients)
            for (int k = 0; k < R.p(); ++k) (*quotients)[k][i] = qs[k];
    }
    return out;
}

Series restrict_sigma(const Series &f, const ResonantStructure &R) { return sigma_reduce(f, R); }

VectorField restrict_sigma(const VectorField &X, const ResonantStructure &R) {
    return sigma_reduce(X, R);
}

Series fiber_reduce(const Series &f, const ResonantStructure &R, const std::vector<cplx> &b) {
    Series out(f.ctx());
    for (auto &[m0, c0] : f.terms()) {
        if (m0.udeg() != 0)
            throw Error(errc::precondition_violated, "fiber_reduce wants a pure-x series");
        Mono m = m0;
        cplx c = c0;
        while (true) {
            int hit = -1;
            for (int k = 0; k < R.p(); ++k)
                if (divisible(m, R.row(k))) {
                    hit = k;
                    break;
                }
            if (hit < 0) break;
            for (int i = 0; i < R.n(); ++i) m.xe[i] -= R.row(hit)[i];
            c *= b[hit];
            if (c == cplx(0)) break;
        }
        out.add_term(m, c);
    }
    return out.cleanup();
}

VectorField weight_project(const VectorField &X, const Weight &alpha, const LinearMorphism &S) {
    const double eps = LinearMorphism::kEpsRes;
    VectorField r(X.ctx());
    for (int i = 0; i < X.n(); ++i) {
        Series s(X.ctx());
        for (auto &[m, c] : X[i].terms()) {
            Mono xm = m;
            xm.ue = {};
            Weight w = weight_of(S, xm, i);
            double d = 0;
            for (int j = 0; j < S.l(); ++j) d = std::max(d, std::abs(w.vals[j] - alpha.vals[j]));
            if (d < eps) s.add_term(m, c);
        }
        r[i] = s;
    }
    return r;
}

VectorField weight_project_zero(const VectorField &X, const LinearMorphism &S) {
    VectorField r(X.ctx());
    for (int i = 0; i < X.n(); ++i) {
        Series s(X.ctx());
        for (auto &[m, c] : X[i].terms()) {
            Mono xm = m;
            xm.ue = {};
            if (S.weight_is_zero(xm, i)) s.add_term(m, c);
        }
        r[i] = s;
    }
    return r;
}

std::pair<cplx, cplx> dpi_minor_identity_check(const ResonantStructure &R,
                                               const std::vector<cplx> &x,
                                               const std::vector<int> &I,
                                               const std::vector<int> &J) {
    for (auto &xi : x)
        if (xi == cplx(0))
            throw Error(errc::on_coordinate_hyperplane, "dpi check needs x off the hyperplanes");
    const std::size_t k = I.size();
    if (J.size() != k) throw Error(errc::dimension_mismatch, "index sets of unequal size");
    EMat Dp(k, k), Rm(k, k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) {
            const auto &row = R.row(I[a]);
            cplx mono = 1;
            for (int i = 0; i < R.n(); ++i)
                for (int e = 0; e < row[i]; ++e) mono *= x[i];
            Dp(a, b) = double(row[J[b]]) * mono / x[J[b]];
            Rm(a, b) = double(row[J[b]]);
        }
    cplx lhs = Dp.determinant(), rhs = Rm.determinant();
    for (std::size_t b = 0; b < k; ++b) lhs *= x[J[b]];
    for (std::size_t a = 0; a < k; ++a) {
        const auto &row = R.row(I[a]);
        for (int i = 0; i < R.n(); ++i)
            for (int e = 0; e < row[i]; ++e) rhs *= x[i];
    }
    return {lhs, rhs};
}

OmegaSResult omega_S(const LinearMorphism &S, int k, OmegaWindow w, std::size_t enum_cap) {
    long long lo, hi;
    if (w == OmegaWindow::proofs) {
        lo = (1LL << k) + 1;
        hi = 1LL << (k + 1);
    } else {
        lo = 2;
        hi = std::max<long long>(2, 1LL << k);
    }
    // window size ~ C(hi+n-1, n-1) summed; estimate and enumerate if feasible
    double count = 0;
    for (long long d = lo; d <= hi && count < 2.0 * double(enum_cap); ++d) {
        double c = 1;
        for (int i = 1; i < S.n(); ++i) c *= double(d + i) / double(i);
        count += c;
    }
    if (count <= double(enum_cap)) {
        double best = std::numeric_limits<double>::infinity();
        const double eps = LinearMorphism::kEpsRes;
        for_each_monomial(S.n(), int(lo), int(hi), [&](const std::vector<int> &Q) {
            for (int i = 0; i < S.n(); ++i) {
                // direct evaluation: degrees here can exceed the Mono cap
                double norm = 0;
                bool zero = true;
                for (int j = 0; j < S.l(); ++j) {
                    cplx s = -S.lam(j, i);
                    for (int v = 0; v < S.n(); ++v) s += S.lam(j, v) * double(Q[v]);
                    if (std::abs(s) >= eps) zero = false;
                    norm = std::max(norm, std::abs(s));
                }
                if (!zero) best = std::min(best, norm);
            }
        });
        if (!std::isfinite(best))
            throw Error(errc::no_nonzero_weights, "window holds no nonzero weight");
        return {best, true};
    }
    auto floor = S.lattice_floor();
    if (!floor)
        throw Error(errc::precondition_violated,
                    "omega_S window too large to enumerate and S is not rational");
    return {*floor, false};
}

bool is_nondegenerate(const std::vector<Series> &a, int jet_order) {
    if (a.empty()) return false;
    const int l = int(a.size());
    // columns: u-monomials up to jet_order present in any a_j
    std::vector<Mono> cols;
    for (auto &s : a)
        for (auto &[m, c] : s.terms())
            if (m.xdeg() == 0 && m.udeg() <= jet_order)
                if (std::find(cols.begin(), cols.end(), m) == cols.end()) cols.push_back(m);
    if (cols.empty()) return false;
    EMat M(l, cols.size());
    for (int j = 0; j < l; ++j)
        for (std::size_t c = 0; c < cols.size(); ++c) M(j, c) = a[j].coeff(cols[c]);
    Eigen::ColPivHouseholderQR<EMat> qr(M);
    qr.setThreshold(1e-10);
    return int(qr.rank()) == l;
}

// Directional derivative magnitudes of g = |(c,a(y))|^2 on a (y,c) pair:
// dk[k] = max over sampled unit directions of the order-2 central-difference
// estimate of |D^k g(y)|.
namespace {
struct FdScan {
    std::vector<std::vector<double>> dirs; // unit directions in R^{2p}
    std::vector<std::vector<cplx>> cs;     // unit sphere samples in C^l
    const std::vector<Series> *a;
    double h;

    FdScan(const std::vector<Series> &ain, int n_directions, int n_sphere, double hin,
           unsigned seed)
        : a(&ain), h(hin) {
        const int l = int(ain.size());
        const int p = ain.at(0).ctx().p;
        std::mt19937 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int d = 0; d < n_directions; ++d) {
            std::vector<double> v(2 * p);
            double nrm = 0;
            for (auto &x : v) {
                x = gauss(rng);
                nrm += x * x;
            }
            nrm = std::sqrt(nrm);
            for (auto &x : v) x /= nrm;
            dirs.push_back(v);
        }
        if (l == 1) {
            cs.push_back({cplx(1, 0)});
        } else {
            for (int s = 0; s < n_sphere; ++s) {
                std::vector<cplx> c(l);
                double nrm = 0;
                for (auto &z : c) {
                    z = cplx(gauss(rng), gauss(rng));
                    nrm += std::norm(z);
                }
                nrm = std::sqrt(nrm);
                for (auto &z : c) z /= nrm;
                cs.push_back(c);
            }
        }
    }

    double gval(const std::vector<cplx> &c, const std::vector<cplx> &y) const {
        cplx s = 0;
        for (std::size_t j = 0; j < a->size(); ++j) s += c[j] * (*a)[j].eval_u(y);
        return std::norm(s);
    }

    std::vector<double> derivative_maxes(const std::vector<cplx> &c,
                                         const std::vector<cplx> &y, int mu) const {
        static const std::vector<std::vector<std::pair<int, double>>> stencil = {
            {{0, 1.0}},
            {{-1, -0.5}, {1, 0.5}},
            {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
            {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
            {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
        };
        if (mu + 1 > int(stencil.size()))
            throw Error(errc::precondition_violated, "derivative order supports mu <= 4");
        const int p = (*a)[0].ctx().p;
        std::vector<double> dk(mu + 1, 0.0);
        dk[0] = gval(c, y);
        for (auto &dir : dirs) {
            for (int k = 1; k <= mu; ++k) {
                double acc = 0;
                for (auto &[off, wgt] : stencil[k]) {
                    std::vector<cplx> yp = y;
                    for (int q = 0; q < p; ++q)
                        yp[q] += cplx(dir[2 * q], dir[2 * q + 1]) * (h * off);
                    acc += wgt * gval(c, yp);
                }
                dk[k] = std::max(dk[k], std::abs(acc) / std::pow(h, k));
            }
        }
        return dk;
    }
};
} // namespace

NondegeneracyIndex nondegeneracy_index(const std::vector<Series> &a,
                                       const std::vector<std::vector<cplx>> &grid_points,
                                       int mu_max, double beta_floor, int n_directions,
                                       int n_sphere, double h, unsigned seed) {
    FdScan scan(a, n_directions, n_sphere, h, seed);
    // beta(mu) = min over (y, c) of max_{k<=mu} ||D^k g||
    std::vector<double> beta(mu_max + 1, std::numeric_limits<double>::infinity());
    for (auto &y : grid_points) {
        for (auto &c : scan.cs) {
            auto dk = scan.derivative_maxes(c, y, mu_max);
            double running = 0;
            for (int k = 0; k <= mu_max; ++k) {
                running = std::max(running, dk[k]);
                beta[k] = std::min(beta[k], running);
            }
        }
    }
    for (int mu = 0; mu <= mu_max; ++mu)
        if (beta[mu] > beta_floor) return {mu, 0.5 * beta[mu]}; // 0.5 = sampling safety factor
    throw Error(errc::degenerate_up_to_mu_max,
                "beta stays below the floor through mu_max = " + std::to_string(mu_max));
}

double russmann_sup_norm(const std::vector<Series> &a,
                         const std::vector<std::vector<cplx>> &grid_points, int mu,
                         int n_directions, int n_sphere, double h, unsigned seed) {
    FdScan scan(a, n_directions, n_sphere, h, seed);
    double sup = 0;
    for (auto &y : grid_points)
        for (auto &c : scan.cs) {
            auto dk = scan.derivative_maxes(c, y, mu);
            for (double v : dk) sup = std::max(sup, v);
        }
    return sup;
}

} // namespace lpnf

#include "lpnf/normalform.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace lpnf {

bool FiberedField::is_zero() const {
    if (!x.is_zero()) return false;
    for (auto &s : u)
        if (!s.is_zero()) return false;
    return true;
}

FiberedField &FiberedField::operator+=(const FiberedField &o) {
    x += o.x;
    for (std::size_t k = 0; k < u.size(); ++k) u[k] += o.u[k];
    return *this;
}

FiberedField &FiberedField::operator*=(cplx c) {
    x *= c;
    for (auto &s : u) s *= c;
    return *this;
}

FiberedField fibered_lift(const VectorField &X, const ResonantStructure &R) {
    FiberedField F(X.ctx());
    F.x = X;
    for (int k = 0; k < R.p(); ++k)
        F.u[k] = lie_derivative(X, R.monomial_series(X.ctx(), k));
    return F;
}

Series fibered_derive(const FiberedField &A, const Series &f) {
    Series s = lie_derivative(A.x, f);
    for (std::size_t k = 0; k < A.u.size(); ++k) s += A.u[k] * f.du(int(k));
    return s;
}

FiberedField fibered_bracket(const FiberedField &A, const FiberedField &B) {
    FiberedField r(A.x.ctx());
    for (int i = 0; i < A.x.n(); ++i)
        r.x[i] = fibered_derive(A, B.x[i]) - fibered_derive(B, A.x[i]);
    for (std::size_t k = 0; k < A.u.size(); ++k)
        r.u[k] = fibered_derive(A, B.u[k]) - fibered_derive(B, A.u[k]);
    return r;
}

FiberedDiffeo::FiberedDiffeo(VectorField U, const ResonantStructure &R)
    : U_(std::move(U)), R_(R) {
    if (!U_.is_zero() && U_.order() < 2)
        throw Error(errc::not_tangent_to_identity, "fibered diffeo needs order(U) >= 2");
}

FiberedDiffeo FiberedDiffeo::identity(const Context &ctx, const ResonantStructure &R) {
    return FiberedDiffeo(VectorField(ctx), R);
}

const std::vector<Series> &FiberedDiffeo::u_disp() const {
    if (!have_udisp_) {
        const Context &ctx = U_.ctx();
        udisp_.assign(ctx.p, Series(ctx));
        for (int k = 0; k < R_.p(); ++k) {
            // pi_k(x+U) - pi_k(x) = prod (x_i + U_i)^{R_ki} - x^{R_k}
            Series prod = Series::constant(ctx, 1.0);
            for (int i = 0; i < ctx.n; ++i) {
                Series f = Series::x_var(ctx, i) + U_[i];
                for (int e = 0; e < R_.row(k)[i]; ++e) prod = prod * f;
            }
            udisp_[k] = prod - R_.monomial_series(ctx, k);
        }
        have_udisp_ = true;
    }
    return udisp_;
}

FiberedField map_pullback(const FiberedField &F, const std::vector<Series> &xdisp,
                          const std::vector<Series> &udisp) {
    const Context &ctx = F.x.ctx();
    std::vector<Series> xs(ctx.n), us(ctx.p);
    for (int i = 0; i < ctx.n; ++i) xs[i] = Series::x_var(ctx, i) + xdisp[i];
    for (int k = 0; k < ctx.p; ++k) us[k] = Series::u_var(ctx, k) + udisp[k];

    std::vector<Series> rhs(ctx.n + ctx.p, Series(ctx));
    for (int i = 0; i < ctx.n; ++i) rhs[i] = F.x[i].compose(xs, us);
    for (int k = 0; k < ctx.p; ++k) rhs[ctx.n + k] = F.u[k].compose(xs, us);

    // (I + DW) Y = rhs, DW nilpotent in the x-filtration
    auto jac_mul = [&](const std::vector<Series> &Y) {
        std::vector<Series> out(ctx.n + ctx.p, Series(ctx));
        for (int r = 0; r < ctx.n + ctx.p; ++r) {
            const Series &w = r < ctx.n ? xdisp[r] : udisp[r - ctx.n];
            Series acc(ctx);
            for (int j = 0; j < ctx.n; ++j) acc += w.dx(j) * Y[j];
            for (int k = 0; k < ctx.p; ++k) acc += w.du(k) * Y[ctx.n + k];
            out[r] = acc;
        }
        return out;
    };
    std::vector<Series> Y = rhs;
    for (int pass = 0; pass <= ctx.xmax + 1; ++pass) {
        std::vector<Series> next(ctx.n + ctx.p, Series(ctx));
        auto corr = jac_mul(Y);
        bool same = true;
        for (int r = 0; r < ctx.n + ctx.p; ++r) {
            next[r] = rhs[r] - corr[r];
            if (!(next[r] - Y[r]).is_zero()) same = false;
        }
        Y = std::move(next);
        if (same) break;
    }
    FiberedField out(ctx);
    for (int i = 0; i < ctx.n; ++i) out.x[i] = Y[i];
    for (int k = 0; k < ctx.p; ++k) out.u[k] = Y[ctx.n + k];
    return out;
}

FiberedField fibered_pullback(const FiberedField &F, const FiberedDiffeo &Phi) {
    if (Phi.is_identity()) return F;
    return map_pullback(F, Phi.U().comps(), Phi.u_disp());
}

FiberedDiffeo invert_fibered(const FiberedDiffeo &Phi) {
    const Context &ctx = Phi.U().ctx();
    if (Phi.is_identity()) return Phi;
    // x = y + U(y, v + pi(y+U)-pi(y)) has inverse displacement U' solving
    // U'(y,v) = -U(y+U', v + pi(y+U')-pi(y)).
    VectorField Up(ctx);
    int ord = Phi.U().order();
    int passes = ctx.xmax / std::max(1, ord - 1) + 2;
    for (int it = 0; it < passes; ++it) {
        FiberedDiffeo cand(Up, Phi.R());
        std::vector<Series> xs(ctx.n), us(ctx.p);
        for (int i = 0; i < ctx.n; ++i) xs[i] = Series::x_var(ctx, i) + Up[i];
        for (int k = 0; k < ctx.p; ++k) us[k] = Series::u_var(ctx, k) + cand.u_disp()[k];
        VectorField next(ctx);
        bool same = true;
        for (int i = 0; i < ctx.n; ++i) {
            next[i] = -Phi.U()[i].compose(xs, us);
            if (!(next[i] - Up[i]).is_zero()) same = false;
        }
        Up = std::move(next);
        if (same) break;
    }
    return FiberedDiffeo(Up, Phi.R());
}

FiberedField apply_fibered_diffeo(const FiberedField &F, const FiberedDiffeo &Phi) {
    return fibered_pullback(F, invert_fibered(Phi));
}

FiberedField pushforward(const FiberedField &X, const FiberedField &W) {
    if (!W.x.is_zero() && W.x.order() < 2)
        throw Error(errc::not_tangent_to_identity, "pushforward generator of order < 2");
    FiberedField Y = X, T = X;
    const int cap = X.x.ctx().xmax + 2;
    for (int k = 1; k <= cap; ++k) {
        T = fibered_bracket(W, T);
        T *= cplx(1.0 / k);
        if (T.is_zero()) break;
        Y += T;
    }
    return Y;
}

std::pair<std::vector<Series>, std::vector<Series>> flow_map_of(const FiberedField &W) {
    const Context &ctx = W.x.ctx();
    std::vector<Series> xd(ctx.n, Series(ctx)), ud(ctx.p, Series(ctx));
    const int cap = ctx.xmax + 2;
    for (int i = 0; i < ctx.n; ++i) {
        Series term = Series::x_var(ctx, i);
        for (int k = 1; k <= cap; ++k) {
            term = fibered_derive(W, term);
            term *= cplx(1.0 / k);
            if (term.is_zero()) break;
            xd[i] += term;
        }
    }
    for (int q = 0; q < ctx.p; ++q) {
        Series term = Series::u_var(ctx, q);
        for (int k = 1; k <= cap; ++k) {
            term = fibered_derive(W, term);
            term *= cplx(1.0 / k);
            if (term.is_zero()) break;
            ud[q] += term;
        }
    }
    return {xd, ud};
}

VectorField NormalizationState::nf_field() const {
    VectorField NF(ctx());
    for (int j = 0; j < S.l(); ++j) NF += a[j] * S.S_field(ctx(), j);
    return NF;
}

Series small_divisor(const Weight &alpha, const NormalizationState &st) {
    Series A(st.ctx());
    for (int j = 0; j < st.S.l(); ++j) A += st.a[j] * alpha.vals[j];
    return A;
}

VectorField d_m_operator(const VectorField &U, const NormalizationState &st) {
    const Context &ctx = U.ctx();
    if (ctx.umax < 1)
        throw Error(errc::umax_too_small, "d_m_operator needs umax >= 1");
    VectorField out(ctx);
    for (int j = 0; j < st.S.l(); ++j) {
        Series coef(ctx);
        for (int k = 0; k < st.R.p(); ++k) {
            Series dpiU = lie_derivative(U, st.R.monomial_series(ctx, k));
            coef += st.a[j].du(k) * dpiU;
        }
        out += coef * st.S.S_field(ctx, j);
    }
    return out;
}

VectorField cohomological_solve(const VectorField &B_alpha, const Weight &alpha,
                                const NormalizationState &st, double divisor_floor,
                                DmSign sign) {
    if (B_alpha.is_zero()) return VectorField(st.ctx());
    Series A = small_divisor(alpha, st);
    double Ab = std::abs(A.coeff(Mono{}));
    if (Ab < divisor_floor) {
        std::ostringstream os;
        os << "|A(b)| = " << Ab << " < " << divisor_floor << " for weight (";
        for (std::size_t j = 0; j < alpha.vals.size(); ++j)
            os << (j ? "," : "") << alpha.vals[j].real() << (alpha.vals[j].imag() ? "i" : "");
        os << ")";
        if (!alpha.sources.empty()) {
            os << " from x^Q d_i with i=" << alpha.sources[0].second << ", Q=(";
            for (int i = 0; i < st.S.n(); ++i)
                os << (i ? "," : "") << int(alpha.sources[0].first.xe[i]);
            os << ")";
        }
        throw Error(errc::zero_small_divisor, os.str());
    }
    Series Ainv = A.reciprocal_u();
    VectorField U0 = Ainv * B_alpha;
    VectorField corr = Ainv * d_m_operator(U0, st);
    return sign == DmSign::spec ? U0 - corr : U0 + corr;
}

VectorField cohom_residual(const VectorField &U, const VectorField &B_alpha,
                           const NormalizationState &st, DmSign sign) {
    VectorField lhs = lie_bracket(st.nf_field(), U);
    VectorField dm = d_m_operator(U, st);
    if (sign == DmSign::spec)
        lhs += dm;
    else
        lhs -= dm;
    return lhs - B_alpha;
}

std::pair<double, double> cohom_norm_bound_check(const VectorField &U, const VectorField &B,
                                                 const NormalizationState &st, double r,
                                                 double t, double c1, double gamma,
                                                 double omega) {
    double da = 0;
    for (int j = 0; j < st.S.l(); ++j)
        for (int k = 0; k < st.ctx().p; ++k)
            da = std::max(da, st.a[j].du(k).majorant_norm(r, t));
    if (da > 1.0)
        throw Error(errc::precondition_violated,
                    "||D_u a||_t = " + std::to_string(da) + " > 1");
    double lhs = U.majorant_norm(r, t);
    double rhs = c1 / (gamma * gamma * omega * omega) * B.majorant_norm(r, t);
    return {lhs, rhs};
}

// Greedy pivoted l x l block of lambda (columns chosen by QR column pivoting).
static std::vector<int> pivot_columns(const LinearMorphism &S) {
    Eigen::MatrixXcd M(S.l(), S.n());
    for (int j = 0; j < S.l(); ++j)
        for (int i = 0; i < S.n(); ++i) M(j, i) = S.lam(j, i);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(M);
    auto perm = qr.colsPermutation().indices();
    std::vector<int> cols(S.l());
    for (int r = 0; r < S.l(); ++r) cols[r] = int(perm[r]);
    std::sort(cols.begin(), cols.end());
    return cols;
}

static Eigen::MatrixXcd pivot_block_inverse(const LinearMorphism &S, std::vector<int> &cols) {
    cols = pivot_columns(S);
    Eigen::MatrixXcd L(S.l(), S.l());
    for (int r = 0; r < S.l(); ++r)
        for (int j = 0; j < S.l(); ++j) L(r, j) = S.lam(j, cols[r]);
    return L.inverse();
}

double Linv_norm(const LinearMorphism &S) {
    std::vector<int> cols;
    Eigen::MatrixXcd Linv = pivot_block_inverse(S, cols);
    double v = 0;
    for (int r = 0; r < S.l(); ++r) {
        double row = 0;
        for (int c = 0; c < S.l(); ++c) row += std::abs(Linv(r, c));
        v = std::max(v, row);
    }
    return v;
}

std::vector<Series> extract_a_coeffs(const VectorField &NF, const LinearMorphism &S,
                                     double good_tol) {
    const Context &ctx = NF.ctx();
    std::vector<Series> g(ctx.n, Series(ctx));
    for (int i = 0; i < ctx.n; ++i) {
        for (auto &[m, c] : NF[i].terms()) {
            Mono expect = Mono{};
            expect.xe[i] = 1;
            Mono got = m;
            got.ue = {};
            if (!(got == expect))
                throw Error(errc::not_diagonal_linear,
                            "component " + std::to_string(i) + " has a non x_i d_i term");
            Mono um = m;
            um.xe = {};
            g[i].add_term(um, c);
        }
    }
    std::vector<int> cols;
    Eigen::MatrixXcd Linv = pivot_block_inverse(S, cols);
    std::vector<Series> a(S.l(), Series(ctx));
    for (int j = 0; j < S.l(); ++j)
        for (int r = 0; r < S.l(); ++r) a[j] += Series(g[cols[r]]) * cplx(Linv(j, r));

    // reconstruction must vanish on all n coordinates
    VectorField rec(ctx);
    for (int j = 0; j < S.l(); ++j) rec += a[j] * S.S_field(ctx, j);
    rec -= NF;
    double scale = std::max(NF.max_abs(), 1.0);
    if (rec.max_abs() > good_tol * scale)
        throw Error(errc::not_in_span, "resonant block is not a u-combination of the S_j");
    return a;
}

bool good_perturbation_check(const VectorField &B0_reduced, const LinearMorphism &S,
                             double good_tol) {
    if (B0_reduced.is_zero()) return true;
    try {
        extract_a_coeffs(B0_reduced, S, good_tol);
        return true;
    } catch (const Error &e) {
        if (e.code() == errc::not_diagonal_linear || e.code() == errc::not_in_span) return false;
        throw;
    }
}

NormalizationState make_state(const LinearMorphism &S, const ResonantStructure &R,
                              std::vector<Series> a, const VectorField &perturbation, int m0) {
    if (!perturbation.is_zero() && perturbation.order() < m0 + 1)
        throw Error(errc::precondition_violated,
                    "perturbation order " + std::to_string(perturbation.order()) +
                        " < m0+1 = " + std::to_string(m0 + 1));
    NormalizationState st;
    st.S = S;
    st.R = R;
    st.m = m0;
    st.a = std::move(a);
    st.remainder = perturbation;
    st.sigma_ideal.assign(R.p(), VectorField(perturbation.ctx()));
    return st;
}

/// Group the window field by weight value (quantized at eps_res); the zero
/// weight is returned separately. Deterministic order via the term order.
struct WeightSplit {
    std::vector<std::pair<Weight, VectorField>> nonzero;
    VectorField zero;
};

static WeightSplit split_by_weight(const VectorField &B, const LinearMorphism &S) {
    const double eps = LinearMorphism::kEpsRes;
    WeightSplit out{{}, VectorField(B.ctx())};
    for (int i = 0; i < B.n(); ++i) {
        for (auto &[m, c] : B[i].terms()) {
            Mono xm = m;
            xm.ue = {};
            if (S.weight_is_zero(xm, i)) {
                out.zero[i].add_term(m, c);
                continue;
            }
            Weight w = weight_of(S, xm, i);
            bool merged = false;
            for (auto &[ww, vf] : out.nonzero) {
                double d = 0;
                for (int j = 0; j < S.l(); ++j)
                    d = std::max(d, std::abs(ww.vals[j] - w.vals[j]));
                if (d < eps) {
                    vf[i].add_term(m, c);
                    ww.sources.push_back({xm, i});
                    merged = true;
                    break;
                }
            }
            if (!merged) {
                VectorField vf(B.ctx());
                vf[i].add_term(m, c);
                out.nonzero.push_back({std::move(w), std::move(vf)});
            }
        }
    }
    return out;
}

NormalizationState newton_step(const NormalizationState &st, const NewtonOptions &opt) {
    const Context &ctx = st.ctx();
    const int m = st.m;
    if (2 * m + 1 > ctx.xmax)
        throw Error(errc::truncation_exceeded,
                    "newton_step to order " + std::to_string(2 * m) + " needs xmax >= " +
                        std::to_string(2 * m + 1) + " (have " + std::to_string(ctx.xmax) + ")");

    StepRecord rec;
    rec.m_from = m;
    rec.m_to = 2 * m;
    rec.k = opt.k;
    rec.t_m = opt.t_m;
    rec.gamma_k = opt.gamma_k;
    rec.theta_k = opt.theta_k;
    for (int i = 0; i < 5; ++i) rec.radii[i] = opt.radii[i];

    VectorField B = st.remainder.x_slice(m + 1, 2 * m);
    VectorField C = st.remainder.x_slice(2 * m + 1, ctx.xmax);

    NormalizationState out = st;
    out.m = 2 * m;
    if (B.is_zero()) {
        out.psi.push_back(FiberedDiffeo::identity(ctx, st.R));
        out.ledger.push_back(rec);
        return out;
    }

    const double divisor_floor =
        std::max(opt.gamma * opt.omega_next / 2.0, opt.divisor_floor_abs);
    WeightSplit ws = split_by_weight(B, st.S);

    VectorField U(ctx);
    rec.min_divisor_at_b = std::numeric_limits<double>::infinity();
    for (auto &[alpha, Balpha] : ws.nonzero) {
        Series A = small_divisor(alpha, st);
        rec.min_divisor_at_b = std::min(rec.min_divisor_at_b, std::abs(A.coeff(Mono{})));
        U += cohomological_solve(Balpha, alpha, st, divisor_floor, DmSign::adjoint);
        rec.n_weights_solved += 1;
    }
    if (ws.nonzero.empty()) rec.min_divisor_at_b = 0;

    FiberedDiffeo Phi(U, st.R);
    FiberedField F = fibered_lift(st.nf_field() + st.remainder, st.R);
    FiberedField Y = fibered_pullback(F, Phi);

    // x-degrees <= m are untouched by the transform; anything that shows up
    // at 2..m is numerical dust and is dropped (recorded).
    rec.mid_dust = Y.x.x_slice(2, m).max_abs();
    VectorField window = Y.x.x_slice(m + 1, 2 * m);
    VectorField Cnew = Y.x.x_slice(2 * m + 1, ctx.xmax);

    VectorField B0 = weight_project_zero(window, st.S);
    VectorField offw = window - B0;
    // the off-weight leftover must vanish on Sigma; u-overflow while reducing
    // Sigma-vanishing content is clipped and reported, not fatal
    std::vector<VectorField> q1;
    double clipped = 0;
    VectorField offw_red = sigma_reduce(offw, st.R, &q1, SigmaOverflow::clip, &clipped);
    rec.window_residual = std::max(offw_red.max_abs(), clipped);

    std::vector<VectorField> q2;
    double nf_ucut = 0;
    VectorField B0_red = sigma_reduce(B0, st.R, &q2, SigmaOverflow::clip, &nf_ucut);
    rec.u_overflow_dropped = nf_ucut;
    std::vector<Series> delta_a;
    try {
        delta_a = B0_red.is_zero() ? std::vector<Series>(st.S.l(), Series(ctx))
                                   : extract_a_coeffs(B0_red, st.S, opt.good_tol);
    } catch (const Error &e) {
        if (e.code() == errc::not_diagonal_linear || e.code() == errc::not_in_span)
            throw Error(errc::not_good_perturbation,
                        std::string("resonant block escapes span{S_j}: ") + e.what());
        throw;
    }
    {
        VectorField recf(ctx);
        for (int j = 0; j < st.S.l(); ++j) recf += delta_a[j] * st.S.S_field(ctx, j);
        recf -= B0_red;
        rec.good_pert_residual = recf.max_abs();
    }

    for (int j = 0; j < st.S.l(); ++j) out.a[j] += delta_a[j];
    out.remainder = Cnew;
    // dropped Sigma-vanishing content: offw = sum (x^R-u) q1, B0 - B0|Sigma = sum (x^R-u) q2
    for (int k = 0; k < st.R.p(); ++k) {
        out.sigma_ideal[k] += q1[k];
        out.sigma_ideal[k] += q2[k];
    }
    out.psi.push_back(Phi);

    VectorField NFnew = out.nf_field();
    rec.nf_norm = NFnew.majorant_norm(opt.r, opt.t_m);
    for (int k = 0; k < ctx.p; ++k) {
        double v = 0;
        for (int i = 0; i < ctx.n; ++i)
            v = std::max(v, NFnew[i].du(k).majorant_norm(opt.r, opt.t_m));
        rec.dunf_norm = std::max(rec.dunf_norm, v);
    }
    rec.window_norm = B.majorant_norm(opt.r, opt.t_m);
    rec.new_remainder_norm = Cnew.majorant_norm(opt.r, opt.t_m);
    out.ledger.push_back(rec);
    return out;
}

std::pair<VectorField, VectorField> poincare_dulac_normalize(const VectorField &X,
                                                             const LinearMorphism &S,
                                                             int target_order,
                                                             double divisor_floor) {
    const Context &ctx = X.ctx();
    for (int i = 0; i < ctx.n; ++i)
        for (auto &[mm, cc] : X[i].terms())
            if (mm.udeg() != 0)
                throw Error(errc::precondition_violated, "poincare_dulac wants a pure-x field");

    // diagonal linear part nu_i
    std::vector<cplx> nu(ctx.n, cplx(0));
    VectorField lin = X.x_slice(1, 1);
    for (int i = 0; i < ctx.n; ++i) {
        for (auto &[mm, cc] : lin[i].terms()) {
            if (mm == Mono::x_unit(i))
                nu[i] = cc;
            else if (std::abs(cc) > 1e-13)
                throw Error(errc::precondition_violated, "linear part is not diagonal");
        }
    }

    VectorField F = X;
    VectorField total(ctx); // displacement of the composed old<-new map
    bool have_total = false;
    for (int d = 2; d <= target_order; ++d) {
        VectorField Fd = F.x_slice(d, d);
        VectorField Ud(ctx);
        bool any = false;
        for (int i = 0; i < ctx.n; ++i) {
            for (auto &[mm, cc] : Fd[i].terms()) {
                if (S.weight_is_zero(mm, i)) continue; // resonant, stays
                cplx delta = -nu[i];
                for (int k = 0; k < ctx.n; ++k) delta += nu[k] * double(mm.xe[k]);
                if (std::abs(delta) < divisor_floor) {
                    std::ostringstream os;
                    os << "degree " << d << " divisor |" << std::abs(delta) << "| < floor";
                    throw Error(errc::zero_small_divisor, os.str());
                }
                Ud[i].add_term(mm, cc / delta);
                any = true;
            }
        }
        if (!any) continue;
        // pullback by Id+Ud: (I + DUd) Y = F o (Id+Ud)
        VectorField rhs = compose_field(F, Ud);
        VectorField Y = rhs;
        int passes = ctx.xmax / std::max(1, d - 1) + 2;
        for (int it = 0; it < passes; ++it) {
            VectorField corr(ctx);
            for (int i = 0; i < ctx.n; ++i) {
                Series acc(ctx);
                for (int j = 0; j < ctx.n; ++j) acc += Ud[i].dx(j) * Y[j];
                corr[i] = acc;
            }
            VectorField next = rhs - corr;
            bool same = true;
            for (int i = 0; i < ctx.n && same; ++i)
                if (!(next[i] - Y[i]).is_zero()) same = false;
            Y = std::move(next);
            if (same) break;
        }
        F = Y;
        if (!have_total) {
            total = Ud;
            have_total = true;
        } else {
            // T <- T o Phi_d : displacement U_d + T o (Id + U_d)
            total = Ud + compose_field(total, Ud);
        }
    }
    // degrees above target_order are untouched by construction; the normal
    // form proper is the processed jet
    return {F.jet(target_order), total};
}

} // namespace lpnf

#include "lpnf/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace lpnf {

VectorField Scenario::full_field() const {
    // a_j(pi(x)) S_j + perturbation as a pure-x field: substitute u = x^R
    // into the (u - b)-expansion of a_j.
    const Context c = ctx();
    VectorField X(c);
    std::vector<Series> xs(c.n), us(c.p);
    for (int i = 0; i < c.n; ++i) xs[i] = Series::x_var(c, i);
    for (int k = 0; k < c.p; ++k) us[k] = R.monomial_series(c, k);
    for (int j = 0; j < S.l(); ++j) {
        Series aj = a[j].compose(xs, us);
        X += aj * S.S_field(c, j);
    }
    X += perturbation;
    return X;
}

NormalizationState Scenario::initial_state() const {
    return make_state(S, R, a, perturbation, m0);
}

// Largest power of two m0 >= 2 with m0 + 1 <= pert_order (the Newton ladder
// runs on m = 2^k).
static int initial_power_order(int pert_order) {
    int m0 = 2;
    while (2 * m0 + 1 <= pert_order) m0 *= 2;
    return m0;
}

VectorField hamiltonian_field(const Series &G) {
    const Context &c = G.ctx();
    if (c.n % 2 != 0)
        throw Error(errc::precondition_violated, "hamiltonian field needs (z,w) pairs");
    VectorField X(c);
    int N = c.n / 2;
    for (int i = 0; i < N; ++i) {
        X[2 * i] = G.dx(2 * i + 1);      // dG/dw_i d/dz_i
        X[2 * i + 1] = -G.dx(2 * i);     // -dG/dz_i d/dw_i
    }
    return X;
}

Series divergence(const VectorField &X) {
    Series d(X.ctx());
    for (int i = 0; i < X.n(); ++i) d += X[i].dx(i);
    return d;
}

static Series upoly_to_series(const Context &ctx, const std::vector<UPolyTerm> &terms) {
    // terms are polynomials in the absolute u; re-expand around ctx.base by
    // composing with u_k = (u_k - b_k) + b_k.
    Series s(ctx);
    std::vector<Series> us(ctx.p);
    for (int k = 0; k < ctx.p; ++k) us[k] = Series::u_var(ctx, k);
    for (auto &t : terms) {
        Series term = Series::constant(ctx, t.c);
        for (int k = 0; k < ctx.p; ++k)
            for (int e = 0; e < t.ue.at(k); ++e) term = term * us[k];
        s += term;
    }
    return s;
}

Scenario scenario_hamiltonian(int n_pairs, const std::vector<std::vector<cplx>> &mu,
                              const std::vector<XPolyTerm> &h_terms, int xmax, int umax,
                              const std::vector<cplx> &base) {
    const int n = 2 * n_pairs, p = n_pairs, l = n_pairs;
    Context ctx{n, p, xmax, umax, base};
    std::vector<std::vector<cplx>> lam(l, std::vector<cplx>(n, 0));
    std::vector<std::vector<GaussianRational>> rat(l, std::vector<GaussianRational>(n));
    for (int j = 0; j < l; ++j) {
        lam[j][2 * j] = 1;
        lam[j][2 * j + 1] = -1;
        rat[j][2 * j] = {Rational(1), Rational(0)};
        rat[j][2 * j + 1] = {Rational(-1), Rational(0)};
    }
    LinearMorphism S(n, l, rat);
    std::vector<std::vector<int>> rows(p, std::vector<int>(n, 0));
    for (int k = 0; k < p; ++k) {
        rows[k][2 * k] = 1;
        rows[k][2 * k + 1] = 1;
    }
    ResonantStructure R(S, rows);

    // Complexification of the real hamiltonian sum mu_{j,d} (x_j^2+y_j^2)^d in
    // z = x+iy, w = x-iy: the equations become dz/dt = -2i dG/dw,
    // dw/dt = +2i dG/dz, so every field carries the factor -2i. This is what
    // keeps the real slice w = conj(z) invariant (rotations, not hyperbolas).
    const cplx cfac(0, -2);
    // a_j(u) = -2i dG0/du_j with G0 = sum_{j,deg} mu[j][deg-1] u_j^deg
    std::vector<Series> a(l, Series(ctx));
    for (int j = 0; j < l; ++j) {
        std::vector<UPolyTerm> dg;
        for (std::size_t d = 0; d < mu[j].size(); ++d) {
            if (mu[j][d] == cplx(0)) continue;
            UPolyTerm t;
            t.ue.assign(p, 0);
            t.ue[j] = int(d); // d/du_j of u_j^{d+1} = (d+1) u_j^d
            t.c = cfac * mu[j][d] * double(d + 1);
            dg.push_back(t);
        }
        a[j] = upoly_to_series(ctx, dg);
    }

    // perturbation = -2i (symplectic gradient of h)
    Series h(ctx);
    for (auto &t : h_terms) {
        Mono m;
        for (int i = 0; i < n; ++i) m.xe[i] = std::uint8_t(t.xe.at(i));
        h.add_term(m, t.c);
    }
    VectorField pert = hamiltonian_field(h);
    pert *= cfac;

    Scenario scn;
    scn.name = "hamiltonian";
    scn.S = S;
    scn.R = R;
    scn.a = a;
    scn.perturbation = pert;
    if (!pert.is_zero() && pert.order() < 3)
        throw Error(errc::not_symplectic_perturbation,
                    "perturbation must vanish to order >= 3");
    scn.m0 = initial_power_order(pert.is_zero() ? 3 : pert.order());
    return scn;
}

Scenario scenario_volume(int n, const std::vector<std::vector<UPolyTerm>> &a_spec,
                         const std::vector<XPolyTerm> &pert_terms, int xmax, int umax,
                         const std::vector<cplx> &base) {
    const int l = n - 1, p = 1;
    Context ctx{n, p, xmax, umax, base};
    std::vector<std::vector<GaussianRational>> rat(l, std::vector<GaussianRational>(n));
    for (int j = 0; j < l; ++j) {
        rat[j][j] = {Rational(1), Rational(0)};
        rat[j][j + 1] = {Rational(-1), Rational(0)};
    }
    LinearMorphism S(n, l, rat);
    ResonantStructure R(S, {std::vector<int>(n, 1)});

    std::vector<Series> a(l, Series(ctx));
    for (int j = 0; j < l; ++j) a[j] = upoly_to_series(ctx, a_spec.at(j));

    VectorField pert(ctx);
    for (auto &t : pert_terms) {
        if (t.comp < 0 || t.comp >= n)
            throw Error(errc::schema_error, "perturbation term needs a component index");
        Mono m;
        for (int i = 0; i < n; ++i) m.xe[i] = std::uint8_t(t.xe.at(i));
        pert[t.comp].add_term(m, t.c);
    }
    Series div = divergence(pert);
    if (div.max_abs() > 1e-12 * std::max(1.0, pert.max_abs()))
        throw Error(errc::not_volume_preserving, "perturbation divergence does not vanish");

    Scenario scn;
    scn.name = "volume";
    scn.S = S;
    scn.R = R;
    scn.a = a;
    scn.perturbation = pert;
    scn.m0 = initial_power_order(pert.is_zero() ? 3 : pert.order());
    return scn;
}

// ---- flow ----

Trajectory flow(const VectorField &X, const std::vector<cplx> &x0, double T,
                const FlowOptions &opt) {
    const Context &ctx = X.ctx();
    const int n = ctx.n;
    std::vector<cplx> ubase = ctx.base;
    auto rhs = [&](const std::vector<cplx> &x) {
        std::vector<cplx> dx(n);
        for (int i = 0; i < n; ++i) dx[i] = X[i].eval(x, ubase);
        return dx;
    };
    // Cash-Karp 4(5) tableau
    static const double A[6][5] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {3.0 / 10, -9.0 / 10, 6.0 / 5},
        {-11.0 / 54, 5.0 / 2, -70.0 / 27, 35.0 / 27},
        {1631.0 / 55296, 175.0 / 512, 575.0 / 13824, 44275.0 / 110592, 253.0 / 4096}};
    static const double B5[6] = {37.0 / 378, 0, 250.0 / 621, 125.0 / 594, 0, 512.0 / 1771};
    static const double B4[6] = {2825.0 / 27648, 0,          18575.0 / 48384,
                                 13525.0 / 55296, 277.0 / 14336, 1.0 / 4};

    Trajectory traj;
    std::vector<cplx> x = x0;
    double t = 0, h = std::min(opt.h_init, T);
    traj.t.push_back(0);
    traj.x.push_back(x);
    int steps = 0;
    while (t < T) {
        if (++steps > opt.max_steps)
            throw Error(errc::step_underflow, "flow: step budget exhausted");
        h = std::min(h, T - t);
        std::vector<std::vector<cplx>> K(6, std::vector<cplx>(n));
        K[0] = rhs(x);
        for (int s = 1; s < 6; ++s) {
            std::vector<cplx> xs = x;
            for (int j = 0; j < s; ++j)
                for (int i = 0; i < n; ++i) xs[i] += h * A[s][j] * K[j][i];
            K[s] = rhs(xs);
        }
        std::vector<cplx> x5 = x, x4 = x;
        for (int s = 0; s < 6; ++s)
            for (int i = 0; i < n; ++i) {
                x5[i] += h * B5[s] * K[s][i];
                x4[i] += h * B4[s] * K[s][i];
            }
        double err = 0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(x5[i] - x4[i]));
        double tol_here = opt.tol * h;
        if (err <= tol_here || h <= opt.h_min) {
            t += h;
            x = x5;
            traj.t.push_back(t);
            traj.x.push_back(x);
            if (opt.escape_radius > 0)
                for (int i = 0; i < n; ++i)
                    if (std::abs(x[i]) > opt.escape_radius)
                        throw Error(errc::flow_escaped_domain,
                                    "trajectory left the verification polydisc");
        }
        double scale = err > 0 ? 0.9 * std::pow(tol_here / err, 0.2) : 2.0;
        h *= std::clamp(scale, 0.2, 5.0);
        if (h < opt.h_min) {
            if (t >= T) break;
            h = opt.h_min;
        }
    }
    return traj;
}

VectorField theta_displacement(const NormalizationState &st) {
    const Context &ctx = st.ctx();
    // freeze u = base: keep u-degree-0 terms of each step displacement
    auto at_base = [&](const VectorField &U) {
        VectorField out(ctx);
        for (int i = 0; i < ctx.n; ++i)
            for (auto &[m, c] : U[i].terms())
                if (m.udeg() == 0) out[i].add_term(m, c);
        return out;
    };
    VectorField total(ctx);
    bool have = false;
    for (auto &phi : st.psi) {
        if (phi.is_identity()) continue;
        VectorField Ub = at_base(phi.U());
        if (!have) {
            total = Ub;
            have = true;
        } else {
            // total o Phi: displacement U + total(Id+U)
            total = Ub + compose_field(total, Ub);
        }
    }
    return total;
}

ConjugacyResidual conjugacy_residual(const Scenario &scn, const NormalizationState &st,
                                     double rho) {
    const Context &ctx = st.ctx();
    const std::vector<cplx> b = ctx.base;
    VectorField theta = theta_displacement(st);

    // NF_b = sum a_j(b) S_j (constant coefficients on the fiber)
    VectorField NFb(ctx);
    for (int j = 0; j < st.S.l(); ++j) {
        cplx ab = st.a[j].coeff(Mono{});
        NFb += Series::constant(ctx, ab) * st.S.S_field(ctx, j);
    }
    VectorField X = scn.full_field();

    // residual_i = sum_j dTheta_i/dy_j NF_b,j - X_i o Theta
    VectorField theta_map(ctx);
    for (int i = 0; i < ctx.n; ++i) theta_map[i] = Series::x_var(ctx, i) + theta[i];
    VectorField res(ctx);
    for (int i = 0; i < ctx.n; ++i) {
        Series s(ctx);
        for (int j = 0; j < ctx.n; ++j) s += theta_map[i].dx(j) * NFb[j];
        res[i] = s;
    }
    res -= compose_field(X, theta);

    ConjugacyResidual out{0, 0};
    for (int i = 0; i < ctx.n; ++i) {
        Series red = fiber_reduce(res[i], st.R, b);
        out.window = std::max(out.window, red.jet(st.m).majorant_norm(rho, 0));
        out.tail = std::max(out.tail,
                            red.x_slice(st.m + 1, ctx.xmax).majorant_norm(rho, 0));
    }
    return out;
}

std::vector<std::vector<cplx>> fiber_samples(const ResonantStructure &R,
                                             const std::vector<cplx> &b, int n_samples) {
    const int n = R.n(), p = R.p();
    std::vector<std::vector<cplx>> pts;
    // balanced principal solution: coordinates in the support of row k get
    // modulus |b_k|^{1/deg}; torus directions from the kernel of R sweep phases.
    std::vector<std::vector<cplx>> seeds;
    std::vector<cplx> x0(n, cplx(1));
    for (int k = 0; k < p; ++k) {
        int deg = R.row_degree(k);
        cplx root = std::pow(b[k], 1.0 / double(deg));
        for (int i = 0; i < n; ++i)
            if (R.row(k)[i] > 0) x0[i] = root;
    }
    // correct the residual phase/modulus per row on one support coordinate
    for (int k = 0; k < p; ++k) {
        cplx cur = 1;
        for (int i = 0; i < n; ++i)
            for (int e = 0; e < R.row(k)[i]; ++e) cur *= x0[i];
        int lead = -1;
        for (int i = 0; i < n; ++i)
            if (R.row(k)[i] == 1) {
                bool shared = false;
                for (int kk = 0; kk < p; ++kk)
                    if (kk != k && R.row(kk)[i] > 0) shared = true;
                if (!shared) {
                    lead = i;
                    break;
                }
            }
        if (lead >= 0 && cur != cplx(0)) x0[lead] *= b[k] / cur;
    }
    // kernel directions of R over the integers: phases x_i -> x_i e^{i v_i t}
    // with R v = 0. Use a floating kernel basis.
    Eigen::MatrixXd Rm(p, n);
    for (int k = 0; k < p; ++k)
        for (int i = 0; i < n; ++i) Rm(k, i) = double(R.row(k)[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Rm);
    Eigen::MatrixXd ker = lu.kernel();
    int kd = int(ker.cols());
    for (int s = 0; s < n_samples; ++s) {
        double t = 2.0 * M_PI * double(s) / double(n_samples);
        std::vector<cplx> x = x0;
        for (int d = 0; d < kd; ++d) {
            double phase = t * double(d + 1) / double(kd);
            for (int i = 0; i < n; ++i)
                x[i] *= std::exp(cplx(0, ker(i, d) * phase));
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

DriftStats invariant_residual(const Scenario &scn, const NormalizationState &st,
                              const std::vector<cplx> &b, double rho, double T,
                              int n_samples, const FlowOptions &fopt, bool use_theta) {
    const Context &ctx = st.ctx();
    VectorField X = scn.full_field();
    VectorField theta = theta_displacement(st);
    VectorField psi = invert_displacement(theta);

    auto apply_disp = [&](const VectorField &D, const std::vector<cplx> &x) {
        std::vector<cplx> y = x;
        for (int i = 0; i < ctx.n; ++i) y[i] += D[i].eval(x, ctx.base);
        return y;
    };

    FlowOptions fo = fopt;
    if (fo.escape_radius == 0) fo.escape_radius = 2.0 * rho;
    DriftStats out{0, 0, n_samples};
    auto samples = fiber_samples(st.R, b, n_samples);
    for (auto &y0 : samples) {
        std::vector<cplx> x0 = use_theta ? apply_disp(theta, y0) : y0;
        auto u_start = st.R.pi(x0);
        Trajectory tr = flow(X, x0, T, fo);
        for (auto &x : tr.x) {
            auto u_raw = st.R.pi(x);
            double raw = 0;
            for (int k = 0; k < st.R.p(); ++k)
                raw = std::max(raw, std::abs(u_raw[k] - u_start[k]));
            out.raw = std::max(out.raw, raw);
            std::vector<cplx> y = use_theta ? apply_disp(psi, x) : x;
            auto u_str = st.R.pi(y);
            double s = 0;
            for (int k = 0; k < st.R.p(); ++k) s = std::max(s, std::abs(u_str[k] - b[k]));
            out.straightened = std::max(out.straightened, s);
        }
    }
    return out;
}

NormalizationState normalize_to_order(const Scenario &scn, int target_order,
                                      const DiophantineSchedule &sched) {
    NormalizationState st = scn.initial_state();
    const double Lambda = scn.S.Lambda();
    const double mr = m_r_constant(scn.S, scn.R, 1.0);
    const double c1 = c1_constant(scn.S.n(), scn.R.p(), scn.S.l(), mr, sched.gamma_prime);
    while (st.m < target_order) {
        int k = int(std::lround(std::log2(double(st.m))));
        NewtonOptions opt;
        opt.gamma = sched.gamma;
        opt.omega_next = sched.omega(k + 1);
        opt.k = k;
        opt.t_m = t_m(k, sched, scn.S.l(), Lambda);
        opt.gamma_k = gamma_k(k, sched, c1);
        auto tr = theta_and_radii(k, 1.0, sched, c1);
        opt.theta_k = tr.theta;
        for (int i = 0; i < 5; ++i) opt.radii[i] = tr.r[i];
        st = newton_step(st, opt);
    }
    return st;
}

double oracle_equivalence(const Scenario &scn, int order, const DiophantineSchedule &sched) {
    NormalizationState st = normalize_to_order(scn, order, sched);
    const Context &ctx = st.ctx();

    // Newton normal form on Sigma: substitute u = x^R into a_j, pure x
    std::vector<Series> xs(ctx.n), us(ctx.p);
    for (int i = 0; i < ctx.n; ++i) xs[i] = Series::x_var(ctx, i);
    for (int k = 0; k < ctx.p; ++k) us[k] = scn.R.monomial_series(ctx, k);
    VectorField NFnewton(ctx);
    for (int j = 0; j < scn.S.l(); ++j)
        NFnewton += st.a[j].compose(xs, us) * scn.S.S_field(ctx, j);

    auto [NFpd, disp] = poincare_dulac_normalize(scn.full_field(), scn.S, order);

    VectorField diff = NFnewton.jet(order) - NFpd.jet(order);
    // compare canonically mod Sigma
    double worst = 0;
    for (int i = 0; i < ctx.n; ++i) {
        Series red = sigma_reduce(diff[i], scn.R);
        worst = std::max(worst, red.max_abs());
    }
    return worst;
}

} // namespace lpnf

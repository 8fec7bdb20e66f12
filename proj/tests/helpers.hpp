#ifndef LPNF_TEST_HELPERS_HPP
#define LPNF_TEST_HELPERS_HPP

#include <random>

#include "lpnf/normalform.hpp"
#include "lpnf/resonance.hpp"
#include "lpnf/series.hpp"

namespace lpnf::testing {

inline Context make_ctx(int n, int p, int xmax, int umax, std::vector<cplx> base = {}) {
    if (base.empty()) base.assign(p, cplx(0));
    return Context{n, p, xmax, umax, std::move(base)};
}

struct Rng {
    std::mt19937 eng;
    explicit Rng(unsigned seed) : eng(seed) {}
    double real(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng);
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
    cplx complex(double mag = 1.0) { return {real(-mag, mag), real(-mag, mag)}; }
};

inline Series random_series(Rng &rng, const Context &ctx, int terms, int min_xdeg = 0,
                            int max_u = -1) {
    if (max_u < 0) max_u = ctx.umax / 2;
    Series s(ctx);
    for (int t = 0; t < terms; ++t) {
        Mono m;
        int budget = rng.integer(min_xdeg, ctx.xmax);
        for (int i = 0; i < ctx.n && budget > 0; ++i) {
            int e = rng.integer(0, budget);
            if (i + 1 == ctx.n) e = budget;
            m.xe[i] = std::uint8_t(e);
            budget -= e;
        }
        if (m.xdeg() < min_xdeg) continue;
        for (int k = 0; k < ctx.p; ++k) m.ue[k] = std::uint8_t(rng.integer(0, max_u));
        if (m.udeg() > ctx.umax) continue;
        s.add_term(m, rng.complex());
    }
    return s;
}

inline VectorField random_field(Rng &rng, const Context &ctx, int terms_per_comp,
                                int min_xdeg = 1) {
    VectorField X(ctx);
    for (int i = 0; i < ctx.n; ++i) X[i] = random_series(rng, ctx, terms_per_comp, min_xdeg);
    return X;
}

inline double max_coeff_diff(const VectorField &A, const VectorField &B) {
    double v = 0;
    for (int i = 0; i < A.n(); ++i) {
        Series d = A[i] - B[i];
        v = std::max(v, d.max_abs());
    }
    return v;
}

/// Keep reduced terms whose pre-reduction x-degree (x-degree plus u-degrees
/// weighted by the row degrees) fits the budget; beyond it, Sigma-vanishing
/// pairs straddle the xmax truncation and comparisons are meaningless.
inline Series sigma_jet(const Series &f, const ResonantStructure &R, int budget) {
    Series out(f.ctx());
    for (auto &[m, c] : f.terms()) {
        int sdeg = m.xdeg();
        for (int k = 0; k < R.p(); ++k) sdeg += int(m.ue[k]) * R.row_degree(k);
        if (sdeg <= budget) out.add_term(m, c);
    }
    return out;
}

/// lambda = (1,-1), u = x1 x2 in exact mode: the workhorse configuration.
inline LinearMorphism pair_morphism() {
    std::vector<std::vector<GaussianRational>> lam(1, std::vector<GaussianRational>(2));
    lam[0][0] = {Rational(1), Rational(0)};
    lam[0][1] = {Rational(-1), Rational(0)};
    return LinearMorphism(2, 1, lam);
}

inline ResonantStructure pair_structure(const LinearMorphism &S) {
    return ResonantStructure(S, {{1, 1}});
}

} // namespace lpnf::testing

#endif

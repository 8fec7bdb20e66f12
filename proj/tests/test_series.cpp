#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace lpnf;
using namespace lpnf::testing;

TEST_CASE("add: linearity, identity, cancellation") {
    Context ctx = make_ctx(2, 1, 6, 2);
    Series x1 = Series::x_var(ctx, 0);
    Series two_x1 = x1 + x1;
    CHECK(two_x1.coeff(Mono::x_unit(0)) == cplx(2));

    Rng rng(1);
    Series f = random_series(rng, ctx, 8);
    CHECK((f + Series(ctx) - f).is_zero());

    Mono x1sq;
    x1sq.xe[0] = 2;
    Series g = Series::monomial(ctx, x1sq, 1.0) + Series::monomial(ctx, Mono::u_unit(0), 1.0);
    Series h = g + Series::monomial(ctx, x1sq, -1.0);
    CHECK(h.size() == 1);
    CHECK(h.coeff(Mono::u_unit(0)) == cplx(1));
}

TEST_CASE("add rejects mismatched spaces and bases") {
    Context a = make_ctx(2, 1, 6, 2);
    Context b = make_ctx(3, 1, 6, 2);
    CHECK_THROWS_AS((void)(Series::x_var(a, 0) + Series::x_var(b, 0)), Error);
    Context c = make_ctx(2, 1, 6, 2, {cplx(0.5, 0)});
    CHECK_THROWS_AS((void)(Series::x_var(a, 0) + Series::x_var(c, 0)), Error);
}

TEST_CASE("mul: products truncate and satisfy the majorant inequality") {
    Context ctx = make_ctx(2, 1, 2, 2);
    Series x1 = Series::x_var(ctx, 0), x2 = Series::x_var(ctx, 1);
    Series prod = x1 * x2;
    Mono m;
    m.xe[0] = m.xe[1] = 1;
    CHECK(prod.coeff(m) == cplx(1));

    Series one = Series::constant(ctx, 1.0);
    Series lhs = (one + x1) * (one - x1); // xmax = 2 keeps 1 - x1^2
    Mono sq;
    sq.xe[0] = 2;
    CHECK(lhs.coeff(sq) == cplx(-1));
    CHECK(lhs.coeff(Mono{}) == cplx(1));
    CHECK(lhs.coeff(Mono::x_unit(0)) == cplx(0));

    CHECK((x1 * x1).majorant_norm(0.5, 1.0) == doctest::Approx(0.25));
}

TEST_CASE("majorant submultiplicativity on random series") {
    Rng rng(7);
    Context ctx = make_ctx(3, 2, 6, 3);
    for (int trial = 0; trial < 500; ++trial) {
        Series f = random_series(rng, ctx, 6);
        Series g = random_series(rng, ctx, 6);
        double r = rng.real(0.1, 1.0), t = rng.real(0.1, 1.0);
        CHECK((f * g).majorant_norm(r, t) <=
              f.majorant_norm(r, t) * g.majorant_norm(r, t) + 1e-12);
    }
}

TEST_CASE("order-scaling inequality |f|_R <= (R/r)^m |f|_r") {
    Rng rng(11);
    Context ctx = make_ctx(2, 1, 8, 2);
    for (int trial = 0; trial < 500; ++trial) {
        int m = rng.integer(1, 5);
        Series f = random_series(rng, ctx, 8, m);
        if (f.is_zero()) continue;
        double r = rng.real(0.5, 1.0);
        double R = rng.real(0.05, r * 0.99);
        int ord = f.order();
        REQUIRE(ord >= m);
        double lhs = f.majorant_norm(R, 0.7);
        double rhs = std::pow(R / r, ord) * f.majorant_norm(r, 0.7);
        CHECK(lhs <= rhs * (1 + 1e-12));
    }
}

TEST_CASE("order and jets") {
    Context ctx = make_ctx(2, 1, 6, 2);
    Series f(ctx);
    Mono c3;
    c3.xe[0] = 3;
    f.add_term(c3, 1.0);
    Mono mixed;
    mixed.xe[0] = 1;
    mixed.xe[1] = 1;
    mixed.ue[0] = 1;
    f.add_term(mixed, 2.0);
    CHECK(f.order() == 2);

    CHECK(Series(ctx).order() == kOrderInfinite);
    CHECK(Series::monomial(ctx, Mono::u_unit(0), 1.0).order() == 0);

    Series g = Series::x_var(ctx, 0);
    Mono cub;
    cub.xe[0] = 3;
    g.add_term(cub, 1.0);
    Series j2 = g.jet(2);
    CHECK(j2.size() == 1);
    CHECK(j2.coeff(Mono::x_unit(0)) == cplx(1));
    CHECK((g.jet(ctx.xmax) - g).is_zero()); // jet at xmax is the identity

    Series h = Series::monomial(ctx, Mono::u_unit(0), 1.0) + Series::x_var(ctx, 0);
    Series j0 = h.jet(0);
    CHECK(j0.size() == 1);
    CHECK(j0.coeff(Mono::u_unit(0)) == cplx(1));
}

TEST_CASE("lie_bracket: Leibniz example, weight eigen-relation, antisymmetry") {
    Context ctx = make_ctx(2, 1, 6, 2);
    // [x1 d1, x1^2 d2] = 2 x1^2 d2
    VectorField X(ctx), Y(ctx);
    X[0] = Series::x_var(ctx, 0);
    Mono x1sq;
    x1sq.xe[0] = 2;
    Y[1] = Series::monomial(ctx, x1sq, 1.0);
    VectorField B = lie_bracket(X, Y);
    CHECK(B[0].is_zero());
    CHECK(B[1].coeff(x1sq) == cplx(2));

    // [S, x1^2 d2] with lambda = (1, 0): alpha_{(2,0),2} = 2
    VectorField S(ctx);
    S[0] = Series::x_var(ctx, 0);
    VectorField B2 = lie_bracket(S, Y);
    CHECK(B2[1].coeff(x1sq) == cplx(2));

    Rng rng(3);
    VectorField Z = random_field(rng, ctx, 5);
    CHECK(lie_bracket(Z, Z).max_abs() == 0);
}

TEST_CASE("antisymmetry and truncated Jacobi on random fields") {
    Rng rng(17);
    Context ctx = make_ctx(2, 1, 6, 2);
    for (int trial = 0; trial < 30; ++trial) {
        VectorField X = random_field(rng, ctx, 4), Y = random_field(rng, ctx, 4),
                    Z = random_field(rng, ctx, 4);
        VectorField anti = lie_bracket(X, Y) + lie_bracket(Y, X);
        CHECK(anti.max_abs() < 1e-13);
        VectorField jac = lie_bracket(lie_bracket(X, Y), Z) +
                          lie_bracket(lie_bracket(Y, Z), X) +
                          lie_bracket(lie_bracket(Z, X), Y);
        // truncation can corrupt the top two degrees only
        CHECK(jac.jet(ctx.xmax - 2).max_abs() < 1e-12);
    }
}

TEST_CASE("lie_derivative: basic, first integral, zero field") {
    Context ctx = make_ctx(2, 1, 6, 2);
    VectorField X(ctx);
    X[0] = Series::x_var(ctx, 0);
    Mono m;
    m.xe[0] = m.xe[1] = 1;
    Series f = Series::monomial(ctx, m, 1.0);
    Series lf = lie_derivative(X, f);
    CHECK(lf.coeff(m) == cplx(1));

    // z dz - w dw annihilates zw
    VectorField S(ctx);
    S[0] = Series::x_var(ctx, 0);
    S[1] = -Series::x_var(ctx, 1);
    CHECK(lie_derivative(S, f).is_zero());

    CHECK(lie_derivative(VectorField(ctx), f).is_zero());
}

TEST_CASE("invert_displacement: frozen 1d example and defining property") {
    // n=1, U = x^2, xmax = 3: V = -x^2 + 2x^3
    Context ctx = make_ctx(1, 1, 3, 0);
    VectorField U(ctx);
    Mono sq, cb;
    sq.xe[0] = 2;
    cb.xe[0] = 3;
    U[0] = Series::monomial(ctx, sq, 1.0);
    VectorField V = invert_displacement(U);
    CHECK(V[0].coeff(sq) == cplx(-1));
    CHECK(V[0].coeff(cb) == cplx(2));

    CHECK(invert_displacement(VectorField(ctx)).is_zero());

    // composition residual has order > xmax for random U
    Rng rng(23);
    Context c2 = make_ctx(2, 1, 8, 0);
    for (int trial = 0; trial < 20; ++trial) {
        VectorField W = random_field(rng, c2, 4, 2);
        VectorField Vi = invert_displacement(W);
        // (Id+W) o (Id+Vi) - Id = Vi + W o (Id+Vi)
        VectorField resid = Vi + compose_field(W, Vi);
        CHECK(resid.max_abs() < 1e-10);
    }
    VectorField bad(c2);
    bad[0] = Series::x_var(c2, 0);
    CHECK_THROWS_AS(invert_displacement(bad), Error);
}

TEST_CASE("reciprocal_u inverts small divisors exactly in the truncated algebra") {
    Context ctx = make_ctx(2, 2, 4, 3, {cplx(0.2, 0.1), cplx(-0.3, 0)});
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        Series A = Series::constant(ctx, cplx(1.5, 0.3));
        for (int k = 0; k < ctx.p; ++k) {
            Mono u = Mono::u_unit(k);
            A.add_term(u, rng.complex(0.8));
            Mono uu = u;
            uu.ue[k] += 1;
            A.add_term(uu, rng.complex(0.5));
        }
        Series inv = A.reciprocal_u();
        Series prod = A * inv;
        prod.add_term(Mono{}, -1.0);
        CHECK(prod.max_abs() < 1e-13);
    }
}

TEST_CASE("prune keeps relative floor") {
    Context ctx = make_ctx(1, 1, 4, 2);
    Series f(ctx);
    f.add_term(Mono::x_unit(0), 1e3);
    Mono sq, cb;
    sq.xe[0] = 2;
    cb.xe[0] = 3;
    f.add_term(sq, 1e-9);  // above 1e-14 * 1e3
    f.add_term(cb, 1e-12); // below
    f.cleanup();
    CHECK(f.coeff(sq) == cplx(1e-9));
    CHECK(f.coeff(cb) == cplx(0));
}

TEST_CASE("series evaluation matches a direct term sum") {
    Context ctx = make_ctx(2, 1, 5, 2, {cplx(0.1, 0)});
    Rng rng(41);
    Series f = random_series(rng, ctx, 10);
    std::vector<cplx> x{cplx(0.3, -0.2), cplx(-0.1, 0.25)};
    std::vector<cplx> u{cplx(0.17, 0.05)};
    cplx direct = 0;
    for (auto &[m, c] : f.terms()) {
        cplx v = c;
        for (int e = 0; e < m.xe[0]; ++e) v *= x[0];
        for (int e = 0; e < m.xe[1]; ++e) v *= x[1];
        for (int e = 0; e < m.ue[0]; ++e) v *= (u[0] - cplx(0.1, 0));
        direct += v;
    }
    CHECK(std::abs(f.eval(x, u) - direct) < 1e-14);
}

TEST_CASE("compose agrees with pointwise evaluation") {
    Context ctx = make_ctx(2, 1, 7, 3, {cplx(0.05, 0)});
    Rng rng(53);
    Series f = random_series(rng, ctx, 10);
    // substitution maps x -> x + (order >= 2), u -> u + (positive x-order)
    std::vector<Series> xs(2), us(1);
    for (int i = 0; i < 2; ++i)
        xs[i] = Series::x_var(ctx, i) + random_series(rng, ctx, 4, 2);
    Mono cub;
    cub.xe[0] = 2;
    cub.xe[1] = 1;
    us[0] = Series::u_var(ctx, 0) + Series::monomial(ctx, cub, cplx(0.3, -0.1));
    Series comp = f.compose(xs, us);

    // evaluation at a small point: composition error only above the truncation
    std::vector<cplx> x{cplx(0.05, 0.02), cplx(-0.04, 0.03)};
    std::vector<cplx> u{cplx(0.06, -0.01)};
    std::vector<cplx> xi(2);
    for (int i = 0; i < 2; ++i) xi[i] = xs[i].eval(x, u);
    std::vector<cplx> ui{us[0].eval(x, u)};
    cplx direct = f.eval(xi, ui);
    cplx viaseries = comp.eval(x, u);
    CHECK(std::abs(direct - viaseries) < 1e-10);
}

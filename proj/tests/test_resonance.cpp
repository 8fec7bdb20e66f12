#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "helpers.hpp"

using namespace lpnf;
using namespace lpnf::testing;

static LinearMorphism triple_morphism() {
    // rows (1,-1,0), (0,1,-1): invariant ring generated by x1 x2 x3
    std::vector<std::vector<GaussianRational>> lam(2, std::vector<GaussianRational>(3));
    lam[0][0] = {Rational(1), Rational(0)};
    lam[0][1] = {Rational(-1), Rational(0)};
    lam[1][1] = {Rational(1), Rational(0)};
    lam[1][2] = {Rational(-1), Rational(0)};
    return LinearMorphism(3, 2, lam);
}

TEST_CASE("first_integral_basis finds zw, x1x2x3, and the empty ring") {
    auto S = pair_morphism();
    auto R = first_integral_basis(S, 4);
    REQUIRE(R.p() == 1);
    CHECK(R.row(0) == std::vector<int>{1, 1});

    auto S3 = triple_morphism();
    auto R3 = first_integral_basis(S3, 5);
    REQUIRE(R3.p() == 1);
    CHECK(R3.row(0) == std::vector<int>{1, 1, 1});

    // lambda = (1,2): brute-force enumeration finds no kernel point <= 6
    std::vector<std::vector<GaussianRational>> lam(1, std::vector<GaussianRational>(2));
    lam[0][0] = {Rational(1), Rational(0)};
    lam[0][1] = {Rational(2), Rational(0)};
    LinearMorphism S12(2, 1, lam);
    bool found = false;
    for (int q1 = 0; q1 <= 6 && !found; ++q1)
        for (int q2 = 0; q1 + q2 <= 6 && !found; ++q2)
            if ((q1 || q2) && q1 + 2 * q2 == 0) found = true;
    REQUIRE(!found);
    CHECK_THROWS_AS(first_integral_basis(S12, 6), Error);
}

TEST_CASE("basis minimality: generators are not sums of two others") {
    // lambda = (2,-1): kernel monoid generated by (1,2); (2,4) must be dropped
    std::vector<std::vector<GaussianRational>> lam(1, std::vector<GaussianRational>(2));
    lam[0][0] = {Rational(2), Rational(0)};
    lam[0][1] = {Rational(-1), Rational(0)};
    LinearMorphism S(2, 1, lam);
    auto R = first_integral_basis(S, 9);
    CHECK(R.p() == 1);
    CHECK(R.row(0) == std::vector<int>{1, 2});
}

TEST_CASE("weight formula and zero tests") {
    auto S = pair_morphism();
    Mono Q;
    Q.xe[0] = 2;
    Q.xe[1] = 1;
    CHECK(S.weight_is_zero(Q, 0)); // 2 - 1 - 1 = 0
    Weight w = weight_of(S, Q, 0);
    CHECK(std::abs(w.vals[0]) == 0);

    Mono Q2;
    Q2.xe[0] = 3;
    Weight w2 = weight_of(S, Q2, 1);
    CHECK(w2.vals[0] == cplx(4)); // 3 - (-1) = 4

    // degree-1 identity direction has weight zero
    CHECK(S.weight_is_zero(Mono::x_unit(0), 0));
}

TEST_CASE("nonzero_weights_in: |Q| = 2 window for lambda = (1,-1)") {
    auto S = pair_morphism();
    auto ws = nonzero_weights_in(S, 2, 2);
    std::set<int> vals;
    for (auto &w : ws) vals.insert(int(std::lround(w.vals[0].real())));
    CHECK(vals == std::set<int>{-3, -1, 1, 3});

    CHECK(nonzero_weights_in(S, 3, 2).empty());

    // dedup: alpha = 1 arises from (2,0),i=1 and (1,1),i=2
    for (auto &w : ws)
        if (std::abs(w.vals[0] - cplx(1)) < 1e-12) CHECK(w.sources.size() >= 2);
}

TEST_CASE("omega_S: integer pair, single variable, golden mean decay") {
    auto S = pair_morphism();
    for (int k = 0; k <= 5; ++k) {
        auto res = omega_S(S, k);
        CHECK(res.enumerated);
        CHECK(res.value == doctest::Approx(1.0));
    }

    // n = 1, lambda = (1): weights q - 1 over [2^k+1, 2^{k+1}] -> min = 2^k
    std::vector<std::vector<GaussianRational>> lam1(1, std::vector<GaussianRational>(1));
    lam1[0][0] = {Rational(1), Rational(0)};
    LinearMorphism S1(1, 1, lam1);
    for (int k = 0; k <= 6; ++k) {
        auto res = omega_S(S1, k);
        CHECK(res.value == doctest::Approx(std::pow(2.0, k)));
    }

    // golden-ratio morphism: decays, matches a direct enumeration oracle
    double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    LinearMorphism Sg(2, 1, std::vector<std::vector<cplx>>{{cplx(1), cplx(-phi)}});
    for (int k = 1; k <= 6; ++k) {
        double best = 1e300;
        long long lo = (1LL << k) + 1, hi = 1LL << (k + 1);
        for (long long d = lo; d <= hi; ++d)
            for (long long q1 = 0; q1 <= d; ++q1) {
                double base = double(q1) - phi * double(d - q1);
                for (double li : {1.0, -phi}) {
                    double v = std::abs(base - li);
                    if (v > LinearMorphism::kEpsRes) best = std::min(best, v);
                }
            }
        auto res = omega_S(Sg, k);
        CHECK(res.value == doctest::Approx(best).epsilon(1e-10));
        if (k >= 3) CHECK(res.value < omega_S(Sg, 1).value);
    }

    // n = 3 integer morphism: enumeration window up to degree 64
    auto S3 = triple_morphism();
    for (int k = 1; k <= 5; ++k) {
        auto res = omega_S(S3, k);
        CHECK(res.enumerated);
        CHECK(res.value == doctest::Approx(1.0));
    }

    // beyond the enumeration cap, the exact lattice floor is certified
    auto far = omega_S(S, 22, OmegaWindow::proofs, 1000);
    CHECK(!far.enumerated);
    CHECK(far.value == doctest::Approx(1.0));

    // the intro-window compatibility flag
    auto intro = omega_S(S, 3, OmegaWindow::intro);
    CHECK(intro.value == doctest::Approx(1.0));
}

TEST_CASE("sigma_reduce: substitution, idempotence, quotient bookkeeping") {
    auto S = pair_morphism();
    auto R = pair_structure(S);
    Context ctx = make_ctx(2, 1, 6, 3);

    Mono m12;
    m12.xe[0] = m12.xe[1] = 1;
    Series f = Series::monomial(ctx, m12, 1.0) + Series::monomial(ctx, Mono::u_unit(0), 1.0);
    Series red = sigma_reduce(f, R);
    CHECK(red.size() == 1);
    CHECK(red.coeff(Mono::u_unit(0)) == cplx(2));

    Mono m31;
    m31.xe[0] = 3;
    m31.xe[1] = 1;
    Series g = Series::monomial(ctx, m31, 1.0);
    Series gred = sigma_reduce(g, R);
    Mono expect;
    expect.xe[0] = 2;
    expect.ue[0] = 1;
    CHECK(gred.size() == 1);
    CHECK(gred.coeff(expect) == cplx(1));

    CHECK((sigma_reduce(gred, R) - gred).is_zero()); // idempotent

    // f = reduced + sum (x^R - u) q
    std::vector<Series> q;
    Series h = Series::monomial(ctx, m31, 2.0) + Series::x_var(ctx, 0);
    Series hred = sigma_reduce(h, R, &q);
    Series rebuilt = hred;
    Series ideal = R.monomial_series(ctx, 0) - Series::monomial(ctx, Mono::u_unit(0), 1.0);
    rebuilt += ideal * q[0];
    CHECK((rebuilt - h).max_abs() < 1e-14);
}

TEST_CASE("sigma_reduce is a ring morphism mod the ideal (disjoint supports)") {
    auto S = pair_morphism();
    auto R = pair_structure(S);
    Context ctx = make_ctx(2, 1, 8, 12);
    Rng rng(61);
    for (int trial = 0; trial < 40; ++trial) {
        // keep deg f + deg g within xmax so the product loses nothing
        Series f = random_series(rng, ctx, 5, 0, 2).jet(4);
        Series g = random_series(rng, ctx, 5, 0, 2).jet(4);
        Series lhs = sigma_reduce(f * g, R);
        Series rhs = sigma_reduce(sigma_reduce(f, R) * sigma_reduce(g, R), R);
        CHECK((lhs - rhs).max_abs() < 1e-12);
    }
    CHECK(!R.overlapping_supports());
}

TEST_CASE("sigma_reduce flags u-degree overflow") {
    auto S = pair_morphism();
    auto R = pair_structure(S);
    Context ctx = make_ctx(2, 1, 8, 1);
    Mono m;
    m.xe[0] = m.xe[1] = 2; // reduces to u^2
    Series f = Series::monomial(ctx, m, 1.0);
    CHECK_THROWS_AS(sigma_reduce(f, R), Error);
}

TEST_CASE("restriction norm remark: |f|_Sigma| <= |f| when |b| + t <= r^{|R|}") {
    auto S = pair_morphism();
    auto R = pair_structure(S);
    double r = 0.8, t = 0.1;
    cplx b(0.3, 0.2); // |b| + t = 0.46... <= r^2 = 0.64
    REQUIRE(std::abs(b) + t <= r * r);
    Context ctx = make_ctx(2, 1, 6, 3, {b});
    Series f = R.monomial_series(ctx, 0); // x^{R_1}
    Series fs = restrict_sigma(f, R);     // u_1 = (u_1 - b) + b
    CHECK(fs.majorant_norm(r, t) <= f.majorant_norm(r, t) + 1e-15);

    // nonresonant monomial is untouched
    Series x1 = Series::x_var(ctx, 0);
    CHECK((restrict_sigma(x1, R) - x1).is_zero());
}

TEST_CASE("weight_project: idempotence, completeness, eigen-relation") {
    auto S = pair_morphism();
    Context ctx = make_ctx(2, 1, 10, 2);
    Rng rng(71);
    VectorField X = random_field(rng, ctx, 12, 1);

    auto weights = nonzero_weights_in(S, 1, ctx.xmax);
    VectorField sum = weight_project_zero(X, S);
    for (auto &w : weights) {
        VectorField P = weight_project(X, w, S);
        VectorField PP = weight_project(P, w, S);
        CHECK(max_coeff_diff(P, PP) == 0);
        sum += P;
    }
    CHECK(max_coeff_diff(sum, X) < 1e-14);

    // absent weight projects to zero
    VectorField lin(ctx);
    lin[0] = Series::x_var(ctx, 0);
    Weight w5 = weight_of(S, [] {
        Mono q;
        q.xe[0] = 5;
        return q;
    }(), 1);
    CHECK(weight_project(lin, w5, S).is_zero());
}

TEST_CASE("eigen-relation [S, p_alpha] = alpha p_alpha exhaustively to degree 10") {
    for (auto S : {pair_morphism(), triple_morphism()}) {
        Context ctx = make_ctx(S.n(), 1, 10, 1);
        VectorField Sf = S.S_field(ctx, 0);
        auto weights = nonzero_weights_in(S, 0, 10);
        for (auto &w : weights) {
            for (auto &[Q, i] : w.sources) {
                VectorField p(ctx);
                Mono m = Q;
                p[i] = Series::monomial(ctx, m, 1.0);
                VectorField lhs = lie_bracket(Sf, p);
                VectorField rhs = p;
                rhs *= w.vals[0];
                CHECK(max_coeff_diff(lhs, rhs) < 1e-12);
            }
        }
    }
}

TEST_CASE("S-invariant monomials are annihilated by every S_j") {
    auto S = triple_morphism();
    auto R = first_integral_basis(S, 6);
    Context ctx = make_ctx(3, R.p(), 8, 2);
    for (int j = 0; j < S.l(); ++j)
        for (int k = 0; k < R.p(); ++k)
            CHECK(lie_derivative(S.S_field(ctx, j), R.monomial_series(ctx, k)).is_zero());
}

TEST_CASE("dpi minor identity: frozen p=1 case and random points") {
    auto S = pair_morphism();
    auto R = pair_structure(S);
    // p=1, R=(1,1), I=J={0}: x1 d(x1x2)/dx1 = x1 x2
    auto [lhs, rhs] = dpi_minor_identity_check(R, {cplx(0.7, 0.1), cplx(-0.4, 0.3)}, {0}, {0});
    CHECK(std::abs(lhs - rhs) < 1e-12);

    CHECK_THROWS_AS(dpi_minor_identity_check(R, {cplx(0), cplx(1)}, {0}, {0}), Error);

    Rng rng(83);
    auto S3 = triple_morphism();
    auto R3 = first_integral_basis(S3, 5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<cplx> x(3);
        for (auto &xi : x) {
            do {
                xi = rng.complex();
            } while (std::abs(xi) < 0.05);
        }
        auto [l2, r2] = dpi_minor_identity_check(R3, x, {0}, {rng.integer(0, 2)});
        CHECK(std::abs(l2 - r2) <= 1e-10 * std::max(1.0, std::abs(r2)));
    }
}

TEST_CASE("dpi minor identity with rank-deficient R block is 0 = 0") {
    // two rows with equal column pattern in the chosen minor
    std::vector<std::vector<GaussianRational>> lam(1, std::vector<GaussianRational>(4));
    lam[0][0] = {Rational(1), Rational(0)};
    lam[0][1] = {Rational(-1), Rational(0)};
    lam[0][2] = {Rational(1), Rational(0)};
    lam[0][3] = {Rational(-1), Rational(0)};
    LinearMorphism S(4, 1, lam);
    ResonantStructure R(S, {{1, 1, 0, 0}, {0, 0, 1, 1}});
    // minor on columns {0,1}: second row contributes zeros -> det R_{I,J} = 0
    auto [lhs, rhs] =
        dpi_minor_identity_check(R, {cplx(0.5), cplx(0.4), cplx(0.3), cplx(0.2)}, {0, 1}, {0, 1});
    CHECK(std::abs(rhs) < 1e-14);
    CHECK(std::abs(lhs) < 1e-14);
}

TEST_CASE("is_nondegenerate rank tests") {
    Context ctx = make_ctx(2, 2, 4, 3);
    Series one = Series::constant(ctx, 1.0);
    CHECK(is_nondegenerate({one}, 0));

    Series u1 = Series::monomial(ctx, Mono::u_unit(0), 1.0);
    Series u2 = Series::monomial(ctx, Mono::u_unit(1), 1.0);
    CHECK_FALSE(is_nondegenerate({u1, u1 * 2.0}, 2)); // image inside a line
    CHECK(is_nondegenerate({one + u1, u2}, 2));
}

TEST_CASE("nondegeneracy_index: constant, linear, degenerate") {
    Context ctx = make_ctx(2, 1, 4, 3);
    Series one = Series::constant(ctx, 1.0);
    std::vector<std::vector<cplx>> grid;
    for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) grid.push_back({cplx(0.25 * a, 0.25 * b)});

    auto idx = nondegeneracy_index({one}, grid, 3);
    CHECK(idx.mu0 == 0);
    CHECK(idx.beta == doctest::Approx(0.5)); // 0.5 safety factor on beta = 1

    // a = (u1) on a grid containing 0: |(c,a)|^2 = |u|^2 vanishes to second
    // order at 0 (D|u|^2 = 2(re u, im u) = 0 there), so the index is 2
    Series u1 = Series::monomial(ctx, Mono::u_unit(0), 1.0);
    auto idx1 = nondegeneracy_index({u1}, grid, 3);
    CHECK(idx1.mu0 == 2);

    Series zero(ctx);
    CHECK_THROWS_AS(nondegeneracy_index({zero}, grid, 3), Error);
}

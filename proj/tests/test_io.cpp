#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "lpnf/io.hpp"

using namespace lpnf;
using namespace lpnf::testing;

TEST_CASE("series round-trips through the term-list format") {
    Context ctx = make_ctx(2, 1, 6, 3, {cplx(0.1, -0.2)});
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Series f = random_series(rng, ctx, 12);
        Series g = series_from_json(series_to_json(f));
        CHECK((f - g).max_abs() == 0);
    }
    // deterministic ordering: two serializations are byte-identical
    Series f = random_series(rng, ctx, 12);
    CHECK(series_to_json(f).dump() == series_to_json(f).dump());
}

TEST_CASE("built-in problem files parse and build scenarios") {
    json jh = hamiltonian_problem_json(1, 1.0, 1e-3, 16, 0.01, 0.1);
    Problem ph = problem_from_json(jh);
    CHECK(ph.n == 2);
    CHECK(ph.p == 1);
    CHECK(ph.S.exact());
    Scenario sh = ph.scenario();
    CHECK(sh.perturbation.order() == 5);
    CHECK(sh.m0 == 4);

    json jv = volume_problem_json(3, 1e-3, 16, 0.001, 0.05);
    Problem pv = problem_from_json(jv);
    CHECK(pv.n == 3);
    CHECK(pv.l == 2);
    Scenario sv = pv.scenario();
    CHECK(divergence(sv.perturbation).is_zero());
}

TEST_CASE("strict schema: unknown keys, wrong arity, bad version") {
    json j = hamiltonian_problem_json(1, 1.0, 1e-3, 8, 0.01, 0.1);
    json bad = j;
    bad["surprise"] = 1;
    CHECK_THROWS_AS(problem_from_json(bad), Error);

    bad = j;
    bad["schema"] = 2;
    CHECK_THROWS_AS(problem_from_json(bad), Error);

    bad = j;
    bad["morphism"]["lambda"].erase(0); // row count != l
    CHECK_THROWS_AS(problem_from_json(bad), Error);

    bad = j;
    bad["base"] = json::array(); // needs p entries
    CHECK_THROWS_AS(problem_from_json(bad), Error);
}

TEST_CASE("resonant rows are recomputed when absent and validated when given") {
    json j = hamiltonian_problem_json(1, 1.0, 1e-3, 8, 0.01, 0.1);
    j.erase("resonant_rows");
    Problem p = problem_from_json(j);
    CHECK(p.R.row(0) == std::vector<int>{1, 1});

    json bad = hamiltonian_problem_json(1, 1.0, 1e-3, 8, 0.01, 0.1);
    bad["resonant_rows"] = {{1, 0}}; // not S-invariant
    CHECK_THROWS_AS(problem_from_json(bad), Error);
}

TEST_CASE("state serialization carries order, a, ledger") {
    Context ctx = make_ctx(2, 1, 9, 4);
    auto S = pair_morphism();
    auto R = pair_structure(S);
    Series a = Series::constant(ctx, 1.0);
    auto st = make_state(S, R, {a}, VectorField(ctx), 2);
    NewtonOptions opt;
    st = newton_step(st, opt);
    json j = state_to_json(st);
    CHECK(j["order"] == 4);
    CHECK(j["a"].size() == 1);
    CHECK(j["ledger"].size() == 1);
    Series a_back = series_from_json(j["a"][0]);
    CHECK((a_back - st.a[0]).max_abs() == 0);
}

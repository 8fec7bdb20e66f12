#include "lpnf/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace lpnf {

static void require_keys(const json &j, const std::set<std::string> &allowed,
                         const std::set<std::string> &required, const std::string &where) {
    if (!j.is_object()) throw Error(errc::schema_error, where + " must be an object");
    for (auto &[k, v] : j.items())
        if (!allowed.count(k))
            throw Error(errc::schema_error, "unknown key '" + k + "' in " + where);
    for (auto &k : required)
        if (!j.contains(k))
            throw Error(errc::schema_error, "missing key '" + k + "' in " + where);
}

static cplx complex_from(const json &j, const std::string &where) {
    if (!j.is_array() || j.size() != 2)
        throw Error(errc::schema_error, where + ": complex values are [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::string format_complex(cplx c) {
    std::ostringstream os;
    os.precision(17);
    os << c.real();
    if (c.imag() != 0) os << (c.imag() > 0 ? "+" : "") << c.imag() << "i";
    return os.str();
}

json series_to_json(const Series &s) {
    const Context &c = s.ctx();
    json hdr;
    hdr["n"] = c.n;
    hdr["p"] = c.p;
    hdr["xmax"] = c.xmax;
    hdr["umax"] = c.umax;
    json base = json::array();
    for (auto &b : c.base) base.push_back({b.real(), b.imag()});
    hdr["base"] = base;
    json terms = json::array();
    for (auto &[m, coef] : s.terms()) { // map order = graded-lex, deterministic
        json t;
        json xe = json::array(), ue = json::array();
        for (int i = 0; i < c.n; ++i) xe.push_back(int(m.xe[i]));
        for (int k = 0; k < c.p; ++k) ue.push_back(int(m.ue[k]));
        t["x"] = xe;
        t["u"] = ue;
        t["re"] = coef.real();
        t["im"] = coef.imag();
        terms.push_back(t);
    }
    json out;
    out["header"] = hdr;
    out["terms"] = terms;
    return out;
}

Series series_from_json(const json &j) {
    require_keys(j, {"header", "terms"}, {"header", "terms"}, "series");
    const json &h = j["header"];
    require_keys(h, {"n", "p", "xmax", "umax", "base"}, {"n", "p", "xmax", "umax", "base"},
                 "series header");
    Context ctx;
    ctx.n = h["n"].get<int>();
    ctx.p = h["p"].get<int>();
    ctx.xmax = h["xmax"].get<int>();
    ctx.umax = h["umax"].get<int>();
    for (auto &b : h["base"]) ctx.base.push_back(complex_from(b, "series base"));
    Series s(ctx);
    for (auto &t : j["terms"]) {
        require_keys(t, {"x", "u", "re", "im"}, {"x", "u", "re", "im"}, "series term");
        Mono m;
        for (int i = 0; i < ctx.n; ++i) m.xe[i] = std::uint8_t(t["x"][i].get<int>());
        for (int k = 0; k < ctx.p; ++k) m.ue[k] = std::uint8_t(t["u"][k].get<int>());
        s.add_term(m, {t["re"].get<double>(), t["im"].get<double>()});
    }
    return s;
}

json field_to_json(const VectorField &X) {
    json comps = json::array();
    for (int i = 0; i < X.n(); ++i) comps.push_back(series_to_json(X[i]));
    return comps;
}

json state_to_json(const NormalizationState &st) {
    json out;
    out["order"] = st.m;
    json a = json::array();
    for (auto &s : st.a) a.push_back(series_to_json(s));
    out["a"] = a;
    out["remainder"] = field_to_json(st.remainder);
    json chain = json::array();
    for (auto &phi : st.psi) chain.push_back(field_to_json(phi.U()));
    out["diffeo_chain"] = chain;
    json ledger = json::array();
    for (auto &r : st.ledger) {
        json e;
        e["k"] = r.k;
        e["m_from"] = r.m_from;
        e["m_to"] = r.m_to;
        e["t_m"] = r.t_m;
        e["gamma_k"] = r.gamma_k;
        e["theta_k"] = r.theta_k;
        e["radii"] = {r.radii[0], r.radii[1], r.radii[2], r.radii[3], r.radii[4]};
        e["nf_norm"] = r.nf_norm;
        e["dunf_norm"] = r.dunf_norm;
        e["window_norm"] = r.window_norm;
        e["new_remainder_norm"] = r.new_remainder_norm;
        e["min_divisor_at_b"] = r.min_divisor_at_b;
        e["window_residual"] = r.window_residual;
        e["mid_dust"] = r.mid_dust;
        e["good_pert_residual"] = r.good_pert_residual;
        e["n_weights_solved"] = r.n_weights_solved;
        ledger.push_back(e);
    }
    out["ledger"] = ledger;
    return out;
}

static std::vector<UPolyTerm> upoly_from_json(const json &arr, int p) {
    std::vector<UPolyTerm> out;
    for (auto &t : arr) {
        require_keys(t, {"u", "re", "im"}, {"u", "re", "im"}, "u-polynomial term");
        UPolyTerm u;
        if (int(t["u"].size()) != p)
            throw Error(errc::schema_error, "u-exponent arity mismatch");
        for (auto &e : t["u"]) u.ue.push_back(e.get<int>());
        u.c = {t["re"].get<double>(), t["im"].get<double>()};
        out.push_back(std::move(u));
    }
    return out;
}

Problem problem_from_json(const json &j) {
    require_keys(j,
                 {"schema", "name", "dims", "morphism", "resonant_rows", "basis_degree_bound",
                  "integrable", "perturbation", "truncation", "base", "schedule", "grid",
                  "verify", "m0"},
                 {"schema", "dims", "morphism", "integrable", "perturbation", "truncation",
                  "base", "schedule"},
                 "problem");
    if (j["schema"].get<int>() != 1)
        throw Error(errc::schema_error, "unsupported schema version");
    Problem pr;
    pr.name = j.value("name", "problem");

    require_keys(j["dims"], {"n", "p", "l"}, {"n", "p", "l"}, "dims");
    pr.n = j["dims"]["n"].get<int>();
    pr.p = j["dims"]["p"].get<int>();
    pr.l = j["dims"]["l"].get<int>();
    if (pr.n < 1 || pr.n > kMaxN || pr.p < 1 || pr.p > kMaxP || pr.l < 1 || pr.l > pr.n)
        throw Error(errc::schema_error, "dims out of range");

    const json &mo = j["morphism"];
    require_keys(mo, {"mode", "lambda"}, {"mode", "lambda"}, "morphism");
    std::string mode = mo["mode"].get<std::string>();
    if (int(mo["lambda"].size()) != pr.l)
        throw Error(errc::schema_error, "lambda row count != l");
    if (mode == "rational") {
        std::vector<std::vector<GaussianRational>> lam;
        for (auto &row : mo["lambda"]) {
            if (int(row.size()) != pr.n) throw Error(errc::schema_error, "lambda row length != n");
            std::vector<GaussianRational> r;
            for (auto &e : row) {
                if (!e.is_array() || e.size() != 2 || !e[0].is_string())
                    throw Error(errc::schema_error,
                                "rational lambda entries are [\"num/den\", \"num/den\"]");
                r.push_back({Rational::parse(e[0].get<std::string>()),
                             Rational::parse(e[1].get<std::string>())});
            }
            lam.push_back(std::move(r));
        }
        pr.rational_morphism = true;
        pr.S = LinearMorphism(pr.n, pr.l, lam);
    } else if (mode == "float") {
        std::vector<std::vector<cplx>> lam;
        for (auto &row : mo["lambda"]) {
            if (int(row.size()) != pr.n) throw Error(errc::schema_error, "lambda row length != n");
            std::vector<cplx> r;
            for (auto &e : row) r.push_back(complex_from(e, "lambda"));
            lam.push_back(std::move(r));
        }
        pr.rational_morphism = false;
        pr.S = LinearMorphism(pr.n, pr.l, lam);
    } else {
        throw Error(errc::schema_error, "morphism mode must be rational or float");
    }

    pr.basis_degree_bound = j.value("basis_degree_bound", 12);
    if (j.contains("resonant_rows")) {
        std::vector<std::vector<int>> rows;
        for (auto &r : j["resonant_rows"]) {
            std::vector<int> row;
            for (auto &e : r) row.push_back(e.get<int>());
            rows.push_back(std::move(row));
        }
        pr.rows_given = true;
        pr.R = ResonantStructure(pr.S, rows);
        if (pr.R.p() != pr.p) throw Error(errc::schema_error, "resonant row count != p");
    } else {
        try {
            pr.R = first_integral_basis(pr.S, pr.basis_degree_bound);
        } catch (const Error &e) {
            if (e.code() != errc::empty_ring) throw;
            pr.ring_empty = true; // resonances can still report it; the rest cannot run
        }
        if (!pr.ring_empty && pr.R.p() != pr.p)
            throw Error(errc::schema_error,
                        "computed basis has p = " + std::to_string(pr.R.p()) +
                            ", problem declares p = " + std::to_string(pr.p));
    }

    if (int(j["integrable"].size()) != pr.l)
        throw Error(errc::schema_error, "integrable needs l polynomials");
    for (auto &poly : j["integrable"]) pr.integrable.push_back(upoly_from_json(poly, pr.p));

    for (auto &t : j["perturbation"]) {
        require_keys(t, {"comp", "x", "re", "im"}, {"comp", "x", "re", "im"},
                     "perturbation term");
        XPolyTerm x;
        x.comp = t["comp"].get<int>();
        if (int(t["x"].size()) != pr.n)
            throw Error(errc::schema_error, "perturbation x-exponent arity mismatch");
        for (auto &e : t["x"]) x.xe.push_back(e.get<int>());
        x.c = {t["re"].get<double>(), t["im"].get<double>()};
        pr.perturbation.push_back(std::move(x));
    }

    require_keys(j["truncation"], {"xmax", "umax"}, {"xmax", "umax"}, "truncation");
    pr.xmax = j["truncation"]["xmax"].get<int>();
    pr.umax = j["truncation"]["umax"].get<int>();

    for (auto &b : j["base"]) pr.base.push_back(complex_from(b, "base"));
    if (int(pr.base.size()) != pr.p) throw Error(errc::schema_error, "base needs p entries");

    const json &sc = j["schedule"];
    require_keys(sc, {"preset", "c", "tau", "sigma", "list", "gamma", "gamma_prime", "cap"},
                 {"preset", "gamma"}, "schedule");
    std::string preset = sc["preset"].get<std::string>();
    if (preset == "one")
        pr.sched = DiophantineSchedule::preset_one();
    else if (preset == "inv_poly")
        pr.sched = DiophantineSchedule::preset_inv_poly(sc.value("c", 1.0), sc.value("tau", 2.0));
    else if (preset == "geometric")
        pr.sched = DiophantineSchedule::preset_geometric(sc.value("c", 1.0),
                                                         sc.value("sigma", 1.0));
    else if (preset == "list") {
        std::vector<double> ws;
        for (auto &w : sc["list"]) ws.push_back(w.get<double>());
        pr.sched = DiophantineSchedule::from_list(ws);
    } else
        throw Error(errc::schema_error, "unknown schedule preset");
    pr.sched.gamma = sc["gamma"].get<double>();
    pr.sched.gamma_prime = sc.value("gamma_prime", 1.0);
    pr.sched.partial_sum_cap = sc.value("cap", 1e3);

    if (j.contains("grid")) {
        require_keys(j["grid"], {"rects", "h"}, {"rects", "h"}, "grid");
        for (auto &r : j["grid"]["rects"]) {
            if (!r.is_array() || r.size() != 4)
                throw Error(errc::schema_error, "grid rects are [re_lo, re_hi, im_lo, im_hi]");
            pr.grid_rects.push_back({r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                                     r[3].get<double>()});
        }
        pr.grid_h = j["grid"]["h"].get<double>();
    }

    if (j.contains("verify")) {
        require_keys(j["verify"],
                     {"rho", "T", "flow_tol", "n_samples", "residual_tol", "drift_tol"}, {},
                     "verify");
        pr.rho = j["verify"].value("rho", 0.1);
        pr.T = j["verify"].value("T", 1.0);
        pr.flow_tol = j["verify"].value("flow_tol", 1e-10);
        pr.n_samples = j["verify"].value("n_samples", 16);
        pr.residual_tol = j["verify"].value("residual_tol", 1e-9);
        pr.drift_tol = j["verify"].value("drift_tol", 1e-6);
    }
    pr.m0_override = j.value("m0", 0);
    return pr;
}

Problem load_problem(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::schema_error, "cannot open problem file " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception &e) {
        throw Error(errc::schema_error, std::string("JSON parse failure: ") + e.what());
    }
    return problem_from_json(j);
}

Scenario Problem::scenario() const {
    if (ring_empty)
        throw Error(errc::empty_ring,
                    "the invariant ring is trivial up to the declared degree bound");
    Context c = ctx();
    Scenario scn;
    scn.name = name;
    scn.S = S;
    scn.R = R;
    for (auto &poly : integrable) {
        Series s(c);
        std::vector<Series> us(p);
        for (int k = 0; k < p; ++k) us[k] = Series::u_var(c, k);
        for (auto &t : poly) {
            Series term = Series::constant(c, t.c);
            for (int k = 0; k < p; ++k)
                for (int e = 0; e < t.ue[k]; ++e) term = term * us[k];
            s += term;
        }
        scn.a.push_back(s);
    }
    VectorField pert(c);
    for (auto &t : perturbation) {
        if (t.comp < 0 || t.comp >= n)
            throw Error(errc::schema_error, "perturbation component out of range");
        Mono m;
        for (int i = 0; i < n; ++i) m.xe[i] = std::uint8_t(t.xe[i]);
        pert[t.comp].add_term(m, t.c);
    }
    scn.perturbation = pert;

    // every perturbation term must clear the degree of s1(x)
    int s1_deg = 1;
    for (auto &aj : scn.a)
        s1_deg = std::max(s1_deg, 1 + aj.max_udeg() * R.min_row_degree());
    if (!pert.is_zero() && pert.order() <= s1_deg)
        throw Error(errc::schema_error,
                    "perturbation order must exceed the degree of the integrable part (" +
                        std::to_string(s1_deg) + ")");

    if (m0_override > 0) {
        scn.m0 = m0_override;
    } else {
        int m0 = 2;
        int po = pert.is_zero() ? 3 : pert.order();
        while (2 * m0 + 1 <= po) m0 *= 2;
        scn.m0 = m0;
    }
    return scn;
}

void write_text(const std::string &path, const std::string &text) {
    std::ofstream out(path);
    if (!out) throw Error(errc::schema_error, "cannot write " + path);
    out << text;
}

json hamiltonian_problem_json(int n_pairs, double mu1, double eps, int order,
                              double base_re, double gamma) {
    const int n = 2 * n_pairs, p = n_pairs, l = n_pairs;
    int xmax = order + 1;
    int umax = (xmax + 1) / 2;
    json j;
    j["schema"] = 1;
    j["name"] = n_pairs == 1 ? "hamiltonian-1pair" : "hamiltonian-" + std::to_string(n_pairs) +
                                                         "pairs";
    j["dims"] = {{"n", n}, {"p", p}, {"l", l}};
    json lam = json::array();
    for (int jj = 0; jj < l; ++jj) {
        json row = json::array();
        for (int i = 0; i < n; ++i) {
            std::string re = "0";
            if (i == 2 * jj) re = "1";
            if (i == 2 * jj + 1) re = "-1";
            row.push_back({re, "0"});
        }
        lam.push_back(row);
    }
    j["morphism"] = {{"mode", "rational"}, {"lambda", lam}};
    json rows = json::array();
    for (int k = 0; k < p; ++k) {
        json r = json::array();
        for (int i = 0; i < n; ++i) r.push_back((i == 2 * k || i == 2 * k + 1) ? 1 : 0);
        rows.push_back(r);
    }
    j["resonant_rows"] = rows;
    // Complexified oscillator frequencies carry the -2i factor (z = x+iy,
    // w = x-iy turns d/dt of the real hamiltonian flow into dz/dt = -2i dG/dw).
    // a_j(u) = -2i (mu_j + u_j/2^{j+1} for multi-pair nondegeneracy).
    json integ = json::array();
    for (int jj = 0; jj < l; ++jj) {
        json poly = json::array();
        double a0 = jj == 0 ? mu1 : (jj == 1 ? std::sqrt(2.0) : 1.0 + 0.61803398875 * jj);
        json c0;
        c0["u"] = std::vector<int>(p, 0);
        c0["re"] = 0.0;
        c0["im"] = -2.0 * a0;
        poly.push_back(c0);
        if (n_pairs > 1) {
            json c1;
            std::vector<int> ue(p, 0);
            ue[jj] = 1;
            c1["u"] = ue;
            c1["re"] = 0.0;
            c1["im"] = -2.0 / double(2 << jj);
            poly.push_back(c1);
        }
        integ.push_back(poly);
    }
    j["integrable"] = integ;
    // perturbation = -2i (symplectic gradient of h), h = eps (z1^4 w1^2 + z1^2 w1^4)
    json pert = json::array();
    auto term = [&](int comp, std::vector<int> xe, double c) {
        json t;
        t["comp"] = comp;
        t["x"] = xe;
        t["re"] = 0.0;
        t["im"] = -2.0 * c;
        pert.push_back(t);
    };
    {
        std::vector<int> e(n, 0);
        // dh/dw1 d/dz1: 2 z^4 w + 4 z^2 w^3
        e[0] = 4;
        e[1] = 1;
        term(0, e, 2 * eps);
        e[0] = 2;
        e[1] = 3;
        term(0, e, 4 * eps);
        // -dh/dz1 d/dw1: -(4 z^3 w^2 + 2 z w^4)
        e[0] = 3;
        e[1] = 2;
        term(1, e, -4 * eps);
        e[0] = 1;
        e[1] = 4;
        term(1, e, -2 * eps);
    }
    if (n_pairs >= 2) {
        // pair-coupling terms from h' = eps z1^3 w1 z2 w2 (nonresonant weight)
        // plus eps z1^2 w1^2 z2 w2 (resonant, absorbed into the a_j)
        auto addgrad = [&](std::vector<int> he, double c) {
            for (int v = 0; v < 2 * 2; ++v) {
                if (he[v] == 0) continue;
                std::vector<int> e = he;
                e[v] -= 1;
                int pair = v / 2;
                bool is_z = (v % 2) == 0;
                // dh/dw_k d/dz_k and -dh/dz_k d/dw_k
                term(is_z ? 2 * pair + 1 : 2 * pair, e,
                     (is_z ? -1.0 : 1.0) * c * he[v]);
            }
        };
        addgrad({3, 1, 1, 1}, eps);
        addgrad({2, 2, 1, 1}, eps);
    }
    j["perturbation"] = pert;
    j["truncation"] = {{"xmax", xmax}, {"umax", umax}};
    json base = json::array();
    for (int k = 0; k < p; ++k) base.push_back({base_re * (1.0 + 0.6 * k), 0.0});
    j["base"] = base;
    j["schedule"] = {{"preset", "one"}, {"gamma", gamma}, {"gamma_prime", 1.0}, {"cap", 1e3}};
    json rects = json::array();
    for (int k = 0; k < p; ++k) rects.push_back({-0.05, 0.05, -0.05, 0.05});
    j["grid"] = {{"rects", rects}, {"h", 0.005}};
    j["verify"] = {{"rho", 0.1},          {"T", 1.0},           {"flow_tol", 1e-12},
                   {"n_samples", 16},     {"residual_tol", 1e-9}, {"drift_tol", 1e-6}};
    return j;
}

json volume_problem_json(int n, double eps, int order, double base_re, double gamma) {
    const int l = n - 1;
    int xmax = order + 1;
    int umax = std::max(2, (xmax + n - 1) / n);
    json j;
    j["schema"] = 1;
    j["name"] = "volume-" + std::to_string(n);
    j["dims"] = {{"n", n}, {"p", 1}, {"l", l}};
    json lam = json::array();
    for (int jj = 0; jj < l; ++jj) {
        json row = json::array();
        for (int i = 0; i < n; ++i) {
            std::string re = "0";
            if (i == jj) re = "1";
            if (i == jj + 1) re = "-1";
            row.push_back({re, "0"});
        }
        lam.push_back(row);
    }
    j["morphism"] = {{"mode", "rational"}, {"lambda", lam}};
    j["resonant_rows"] = {std::vector<int>(n, 1)};
    // purely imaginary frequencies keep the flows rotational (bounded orbits
    // on the fibers); the S_j are traceless, so any coefficients stay
    // divergence free
    json integ = json::array();
    for (int jj = 0; jj < l; ++jj) {
        json poly = json::array();
        double a0 = jj == 0 ? 1.0 : (jj == 1 ? std::sqrt(2.0) : 1.0 + 0.61803398875 * jj);
        poly.push_back({{"u", {0}}, {"re", 0.0}, {"im", a0}});
        poly.push_back({{"u", {1}}, {"re", 0.0}, {"im", jj == 0 ? 1.0 : -1.0}});
        integ.push_back(poly);
    }
    j["integrable"] = integ;
    // divergence-free perturbation x_{i+1 mod n}^{order} d/dx_i
    json pert = json::array();
    for (int i = 0; i < n; ++i) {
        std::vector<int> e(n, 0);
        e[(i + 1) % n] = order;
        json t;
        t["comp"] = i;
        t["x"] = e;
        t["re"] = eps;
        t["im"] = 0.0;
        pert.push_back(t);
    }
    j["perturbation"] = pert;
    j["truncation"] = {{"xmax", xmax}, {"umax", umax}};
    j["base"] = {{base_re, 0.0}};
    j["schedule"] = {{"preset", "one"}, {"gamma", gamma}, {"gamma_prime", 1.0}, {"cap", 1e3}};
    j["grid"] = {{"rects", {{-0.05, 0.05, -0.05, 0.05}}}, {"h", 0.005}};
    j["verify"] = {{"rho", 0.1},          {"T", 1.0},           {"flow_tol", 1e-12},
                   {"n_samples", 16},     {"residual_tol", 1e-9}, {"drift_tol", 1e-6}};
    return j;
}

} // namespace lpnf

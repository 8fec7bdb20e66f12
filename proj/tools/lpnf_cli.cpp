// Command-line front end: problem-file ingestion, subcommand orchestration,
// deterministic report emission. Reports carry no timestamps; run metadata
// goes to a sidecar so reruns are byte-identical.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "lpnf/io.hpp"

namespace fs = std::filesystem;
using namespace lpnf;

namespace {

int exit_code_for(const Error &e) {
    switch (e.code()) {
    case errc::schema_error: return 2;
    case errc::empty_ring: return 3;
    case errc::zero_small_divisor: return 4;
    case errc::not_good_perturbation: return 5;
    default: return 1;
    }
}

void ensure_out(const std::string &out) {
    fs::create_directories(out);
    fs::create_directories(out + "/stages");
}

void emit_report(const std::string &out, const json &report, const std::string &cmdline) {
    write_text(out + "/report.json", report.dump(2) + "\n");
    json meta;
    meta["command"] = cmdline;
    auto now = std::chrono::system_clock::now().time_since_epoch();
    meta["unix_time"] = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    write_text(out + "/run_meta.json", meta.dump(2) + "\n");
}

std::vector<cplx> parse_base(const std::string &s, int p) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (int(vals.size()) != 2 * p)
        throw Error(errc::schema_error, "--base wants " + std::to_string(2 * p) +
                                            " comma-separated re,im values");
    std::vector<cplx> b(p);
    for (int k = 0; k < p; ++k) b[k] = {vals[2 * k], vals[2 * k + 1]};
    return b;
}

json schedule_echo(const Problem &pr, double c1, double Lambda) {
    json j;
    j["omega"] = pr.sched.describe();
    j["gamma"] = pr.sched.gamma;
    j["gamma_prime"] = pr.sched.gamma_prime;
    j["c1"] = c1;
    j["Lambda"] = Lambda;
    j["Linv_norm"] = Linv_norm(pr.S);
    return j;
}

json weight_json(const Weight &w) {
    json vals = json::array();
    for (auto &v : w.vals) vals.push_back({v.real(), v.imag()});
    json srcs = json::array();
    for (auto &[Q, i] : w.sources) {
        json q = json::array();
        for (int e = 0; e < kMaxN; ++e) q.push_back(int(Q.xe[e]));
        srcs.push_back({{"Q", q}, {"i", i}});
    }
    return {{"values", vals}, {"max_norm", w.max_norm()}, {"sources", srcs}};
}

int cmd_resonances(const Problem &pr, const std::string &out, bool allow_trivial, int kmax,
                   int window_low, int window_high, const std::string &cmdline) {
    ensure_out(out);
    json rep;
    rep["problem"] = pr.name;
    rep["resonance_mode"] = pr.rational_morphism ? "exact" : "float";
    try {
        auto basis = first_integral_basis(pr.S, pr.basis_degree_bound);
        json gens = json::array();
        for (int k = 0; k < basis.p(); ++k) gens.push_back(basis.row(k));
        rep["generators"] = gens;
        rep["generator_degree_bound"] = pr.basis_degree_bound;
        rep["rank"] = basis.rank();
        rep["overlapping_supports"] = basis.overlapping_supports();
    } catch (const Error &e) {
        if (e.code() == errc::empty_ring && allow_trivial) {
            rep["generators"] = json::array();
            rep["trivial_ring"] = true;
        } else {
            throw;
        }
    }
    json ws = json::array();
    for (auto &w : nonzero_weights_in(pr.S, window_low, window_high))
        ws.push_back(weight_json(w));
    rep["weights_window"] = {{"low", window_low}, {"high", window_high}};
    rep["nonzero_weights"] = ws;
    json omg = json::array();
    for (int k = 0; k <= kmax; ++k) {
        json e;
        e["k"] = k;
        try {
            auto r = omega_S(pr.S, k);
            e["omega_S"] = r.value;
            e["mode"] = r.enumerated ? "enumerated" : "lattice-bound";
        } catch (const Error &err) {
            e["error"] = err.what();
        }
        omg.push_back(e);
    }
    rep["omega_S_table"] = omg;
    emit_report(out, rep, cmdline);
    std::cout << rep.dump(2) << "\n";
    return 0;
}

int cmd_normalize(Problem pr, const std::string &out, int order, const std::string &base_flag,
                  const std::string &cmdline) {
    ensure_out(out);
    if (!base_flag.empty()) pr.base = parse_base(base_flag, pr.p);
    Scenario scn = pr.scenario();
    pr.sched.validate();
    const double Lambda = pr.S.Lambda();
    const double mr = m_r_constant(pr.S, pr.R, 1.0);
    const double c1 = c1_constant(pr.n, pr.p, pr.l, mr, pr.sched.gamma_prime);

    NormalizationState st = scn.initial_state();
    json steps = json::array();
    while (st.m < order) {
        int k = int(std::lround(std::log2(double(st.m))));
        NewtonOptions opt;
        opt.gamma = pr.sched.gamma;
        opt.omega_next = pr.sched.omega(k + 1);
        opt.k = k;
        opt.t_m = t_m(k, pr.sched, pr.l, Lambda);
        opt.gamma_k = gamma_k(k, pr.sched, c1);
        auto tr = theta_and_radii(k, 1.0, pr.sched, c1);
        opt.theta_k = tr.theta;
        for (int i = 0; i < 5; ++i) opt.radii[i] = tr.r[i];
        st = newton_step(st, opt);

        auto nb = norm_ball_checks(st, k + 1, pr.sched, 1.0);
        const auto &rec = st.ledger.back();
        json e;
        e["k"] = rec.k;
        e["m_from"] = rec.m_from;
        e["m_to"] = rec.m_to;
        e["t_m"] = rec.t_m;
        e["divisor_floor"] =
            std::max(pr.sched.gamma * pr.sched.omega(k + 1) / 2.0, 1e-12);
        e["gamma_k"] = rec.gamma_k;
        e["theta_k"] = rec.theta_k;
        e["radii"] = {rec.radii[0], rec.radii[1], rec.radii[2], rec.radii[3], rec.radii[4]};
        e["min_divisor_at_b"] = rec.min_divisor_at_b;
        e["n_weights_solved"] = rec.n_weights_solved;
        e["window_residual"] = rec.window_residual;
        e["mid_dust"] = rec.mid_dust;
        e["good_pert_residual"] = rec.good_pert_residual;
        e["u_overflow_dropped"] = rec.u_overflow_dropped;
        e["good_perturbation"] = rec.good_pert_residual < 1e-6;
        e["nf_norm"] = nb.nf_norm;
        e["dunf_norm"] = nb.dunf_norm;
        e["remainder_norm"] = nb.remainder_norm;
        e["in_NF_set"] = nb.in_NF_set;
        e["in_B_set"] = nb.in_B_set;
        e["da_direct"] = nb.da_direct;
        e["da_transfer"] = nb.da_transfer;
        steps.push_back(e);
    }

    json rep;
    rep["problem"] = pr.name;
    rep["schedule"] = schedule_echo(pr, c1, Lambda);
    rep["m_r"] = mr;
    json base = json::array();
    for (auto &b : pr.base) base.push_back({b.real(), b.imag()});
    rep["base"] = base;
    rep["order"] = st.m;
    // schedule tables: t_m and the R_k ladder with its certified tail index
    json tms = json::array();
    for (int k = 1; k <= 12; ++k) tms.push_back(t_m(k, pr.sched, pr.l, Lambda));
    rep["t_m_table"] = tms;
    auto rl = radii_limit(1.0, 1, 24, pr.sched, c1);
    rep["R_k_table"] = rl.R;
    rep["R_k_limit_lower_bound"] = rl.limit_lower_bound;
    rep["R_k_certified_k1"] = rl.k1;
    rep["ledger"] = steps;
    json atab = json::array();
    for (int j = 0; j < pr.l; ++j) {
        json e;
        e["j"] = j;
        cplx ab = st.a[j].coeff(Mono{});
        e["a_at_base"] = {ab.real(), ab.imag()};
        e["series"] = series_to_json(st.a[j]);
        atab.push_back(e);
    }
    rep["a_final"] = atab;
    rep["remainder_order"] = st.remainder.is_zero() ? -1 : st.remainder.order();
    emit_report(out, rep, cmdline);
    write_text(out + "/state.series.json", state_to_json(st).dump(2) + "\n");
    std::cout << rep.dump(2) << "\n";
    return 0;
}

int cmd_filter(Problem pr, const std::string &out, int kmax, double grid_h, bool no_trust,
               const std::string &cmdline) {
    ensure_out(out);
    if (pr.grid_rects.empty()) throw Error(errc::schema_error, "problem has no grid block");
    if (grid_h > 0) pr.grid_h = grid_h;
    pr.sched.validate();
    Scenario scn = pr.scenario();
    const double Lambda = pr.S.Lambda();
    const double mr = m_r_constant(pr.S, pr.R, 1.0);
    const double c1 = c1_constant(pr.n, pr.p, pr.l, mr, pr.sched.gamma_prime);

    CompactGrid grid(pr.grid_rects, pr.grid_h);
    NormalizationState st = scn.initial_state();
    int k0 = int(std::lround(std::log2(double(st.m))));
    json stages = json::array();
    for (int k = k0; k <= kmax; ++k) {
        double trust = no_trust ? 0.0 : t_m(std::max(k - 1, 0), pr.sched, pr.l, Lambda);
        auto fo = filter_K(grid, st.a, pr.S, k, pr.sched.gamma, pr.sched.omega(k + 1), trust);

        std::ostringstream csv;
        csv.precision(17);
        for (int q = 0; q < pr.p; ++q) csv << "re_b" << q + 1 << ",im_b" << q + 1 << ",";
        csv << "alive_after_k,worst_divisor,offending_Q,offending_i\n";
        for (std::size_t id = 0; id < grid.size(); ++id) {
            for (int q = 0; q < pr.p; ++q)
                csv << grid.points()[id][q].real() << "," << grid.points()[id][q].imag() << ",";
            const char *statename =
                grid.status()[id] == CompactGrid::Status::alive
                    ? "1"
                    : (grid.status()[id] == CompactGrid::Status::dead ? "0" : "untrusted");
            csv << statename << "," << fo.worst_divisor[id] << ",";
            if (fo.offending_weight[id] >= 0) {
                const auto &w = fo.window[std::size_t(fo.offending_weight[id])];
                const auto &[Q, i] = w.sources.at(0);
                csv << "\"(";
                for (int e = 0; e < pr.n; ++e) csv << (e ? " " : "") << int(Q.xe[e]);
                csv << ")\"," << i;
            } else {
                csv << ",-1";
            }
            csv << "\n";
        }
        write_text(out + "/stages/filter_k" + std::to_string(k) + ".csv", csv.str());

        json e;
        e["k"] = k;
        e["window_weights"] = fo.window.size();
        e["killed"] = fo.killed;
        e["untrusted"] = fo.untrusted;
        e["alive"] = grid.alive_count();
        e["alive_measure"] = grid.alive_measure();
        e["survival_fraction"] = double(grid.alive_count()) / double(grid.size());
        stages.push_back(e);

        // advance the normal form when the truncation still allows it
        if (st.m < (1 << (k + 1)) && 2 * st.m + 1 <= pr.xmax && !st.remainder.is_zero()) {
            NewtonOptions opt;
            opt.gamma = pr.sched.gamma;
            opt.omega_next = pr.sched.omega(k + 1);
            opt.k = k;
            opt.t_m = t_m(k, pr.sched, pr.l, Lambda);
            opt.gamma_k = gamma_k(k, pr.sched, c1);
            st = newton_step(st, opt);
        }
    }
    json rep;
    rep["problem"] = pr.name;
    rep["schedule"] = schedule_echo(pr, c1, Lambda);
    rep["grid_h"] = pr.grid_h;
    rep["grid_points"] = grid.size();
    rep["total_measure"] = grid.total_measure();
    rep["stages"] = stages;
    emit_report(out, rep, cmdline);
    std::cout << rep.dump(2) << "\n";
    return 0;
}

int cmd_measure(Problem pr, const std::string &out, double eps_star, int kmax,
                const std::string &cmdline) {
    ensure_out(out);
    if (pr.grid_rects.empty()) throw Error(errc::schema_error, "problem has no grid block");
    pr.sched.validate();
    Scenario scn = pr.scenario();
    CompactGrid grid(pr.grid_rects, pr.grid_h);

    auto idx = nondegeneracy_index(scn.a, grid.points(), 4);
    auto sd = strictly_diophantine_check(pr.sched, pr.S, std::max(idx.mu0, 1), kmax);

    double d = 0;
    for (auto &r : pr.grid_rects) {
        double dre = r.re_hi - r.re_lo, dim = r.im_hi - r.im_lo;
        d += dre * dre + dim * dim;
    }
    d = std::sqrt(d);
    double vartheta = pr.grid_h; // neighborhood scale tied to the grid
    int mu0 = std::max(idx.mu0, 1);
    double gnorm = russmann_sup_norm(scn.a, grid.points(), mu0 + 1);
    int n_real = 2 * pr.p;
    double fac = 1;
    for (int i = 2; i <= mu0 + 1; ++i) fac *= i;
    double B = 3.0 * std::pow(2.0 * M_PI * M_E, n_real / 2.0) *
               std::pow(double(mu0 + 1), mu0 + 2) / fac;
    double M = B * std::pow(d, n_real - 1) *
               (1.0 / std::sqrt(double(n_real)) + 2.0 * d + d / vartheta) *
               std::pow(idx.beta, -1.0 - 1.0 / mu0) * gnorm;

    GammaStarInputs gi;
    gi.eps_star = eps_star > 0 ? eps_star : 0.1 * grid.total_measure();
    gi.M = M;
    gi.mu0 = mu0;
    gi.n = pr.p;
    gi.M_omega = sd.M_omega;
    gi.M_omega_2mu = sd.M_omega_2mu;
    gi.beta = idx.beta;
    auto ai = [&](int i) {
        double ws = omega_S(pr.S, i).value;
        return std::pow(pr.sched.omega(i) / ws, 2.0 / mu0);
    };
    gi.a1 = ai(1);
    gi.a2 = ai(2);

    json rep;
    rep["problem"] = pr.name;
    rep["mu0"] = idx.mu0;
    rep["beta"] = idx.beta;
    rep["beta_safety_factor"] = 0.5;
    rep["strictly_diophantine_observed"] = sd.decreasing_to_zero;
    rep["M_omega"] = sd.M_omega;
    rep["M_omega_2mu"] = sd.M_omega_2mu;
    rep["russmann_M"] = M;
    rep["russmann_B"] = B;
    rep["B_exponent_note"] =
        "B uses (2 pi e)^{n_real/2} with n_real = 2p; a (2 pi e)^p variant would differ";
    rep["g_sup_norm"] = gnorm;
    json gsj;
    try {
        double gs = gamma_star(gi);
        gsj["gamma_star"] = gs;
        gsj["eps_star"] = gi.eps_star;

        CompactGrid g2(pr.grid_rects, pr.grid_h);
        double excluded = 0;
        int k0 = int(std::lround(std::log2(double(scn.m0))));
        for (int k = k0; k <= kmax; ++k) {
            auto fo = filter_K(g2, scn.a, pr.S, k, gs / 2.0, pr.sched.omega(k + 1), 0.0);
            excluded += double(fo.killed) * g2.cell_volume();
        }
        gsj["empirical_excluded_measure_at_half_gamma_star"] = excluded;
        gsj["eps_star_bound_respected"] = excluded <= gi.eps_star + 2 * pr.grid_h;
    } catch (const Error &e) {
        gsj["error"] = e.what();
    }
    rep["gamma_star_block"] = gsj;
    emit_report(out, rep, cmdline);
    std::cout << rep.dump(2) << "\n";
    return 0;
}

int cmd_verify(Problem pr, const std::string &out, int order, const std::string &base_flag,
               const std::string &cmdline) {
    ensure_out(out);
    if (!base_flag.empty()) pr.base = parse_base(base_flag, pr.p);
    pr.sched.validate();
    Scenario scn = pr.scenario();
    const double Lambda = pr.S.Lambda();

    json rep;
    rep["problem"] = pr.name;
    rep["rho"] = pr.rho;
    rep["T"] = pr.T;

    // rho admissibility: t_m + rho^{|R_i|} <= (1/2)^{|R_i|} at the final step
    int k_end = int(std::lround(std::log2(double(order))));
    double tm_end = t_m(k_end, pr.sched, pr.l, Lambda);
    json rho_ok = json::array();
    for (int i = 0; i < pr.R.p(); ++i) {
        int deg = pr.R.row_degree(i);
        rho_ok.push_back(tm_end + std::pow(pr.rho, deg) <= std::pow(0.5, deg));
    }
    rep["rho_constraint_ok"] = rho_ok;

    NormalizationState st = normalize_to_order(scn, order, pr.sched);
    rep["order"] = st.m;

    auto cres = conjugacy_residual(scn, st, pr.rho);
    rep["conjugacy_residual_window"] = cres.window;
    rep["conjugacy_residual_tail"] = cres.tail;
    rep["conjugacy_ok"] = cres.window <= pr.residual_tol;

    double disc = oracle_equivalence(scn, st.m, pr.sched);
    rep["oracle_discrepancy"] = disc;
    rep["oracle_ok"] = disc <= pr.residual_tol;

    FlowOptions fo;
    fo.tol = pr.flow_tol;
    auto drift = invariant_residual(scn, st, pr.base, pr.rho, pr.T, pr.n_samples, fo, true);
    auto raw = invariant_residual(scn, st, pr.base, pr.rho, pr.T, pr.n_samples, fo, false);
    rep["straightened_drift"] = drift.straightened;
    rep["raw_drift_normalized_run"] = drift.raw;
    rep["raw_drift_identity_run"] = raw.raw;
    rep["drift_ok"] = drift.straightened <= pr.drift_tol;
    rep["n_samples"] = pr.n_samples;
    rep["flow_tol"] = pr.flow_tol;
    rep["residual_tol"] = pr.residual_tol;
    rep["drift_tol"] = pr.drift_tol;

    // trajectory dump for the first sample
    auto pts = fiber_samples(pr.R, pr.base, pr.n_samples);
    if (!pts.empty()) {
        VectorField theta = theta_displacement(st);
        VectorField psi = invert_displacement(theta);
        std::vector<cplx> x0 = pts[0];
        for (int i = 0; i < pr.n; ++i) x0[i] += theta[i].eval(pts[0], pr.base);
        FlowOptions f2 = fo;
        f2.escape_radius = 2 * pr.rho;
        auto tr = flow(scn.full_field(), x0, pr.T, f2);
        std::ostringstream csv;
        csv.precision(17);
        csv << "t";
        for (int i = 0; i < pr.n; ++i) csv << ",re_x" << i + 1 << ",im_x" << i + 1;
        csv << ",raw_drift,straightened_drift\n";
        auto u0 = pr.R.pi(x0);
        for (std::size_t s = 0; s < tr.t.size(); ++s) {
            csv << tr.t[s];
            for (int i = 0; i < pr.n; ++i)
                csv << "," << tr.x[s][i].real() << "," << tr.x[s][i].imag();
            auto ur = pr.R.pi(tr.x[s]);
            double rawd = 0;
            for (int q = 0; q < pr.p; ++q) rawd = std::max(rawd, std::abs(ur[q] - u0[q]));
            std::vector<cplx> y = tr.x[s];
            for (int i = 0; i < pr.n; ++i) y[i] += psi[i].eval(tr.x[s], pr.base);
            auto us = pr.R.pi(y);
            double sd = 0;
            for (int q = 0; q < pr.p; ++q) sd = std::max(sd, std::abs(us[q] - pr.base[q]));
            csv << "," << rawd << "," << sd << "\n";
        }
        write_text(out + "/stages/trajectory_sample0.csv", csv.str());
    }

    emit_report(out, rep, cmdline);
    write_text(out + "/state.series.json", state_to_json(st).dump(2) + "\n");
    std::cout << rep.dump(2) << "\n";
    return 0;
}

int cmd_scenario(const std::string &which, const std::string &out_file, int n_or_pairs,
                 double eps, int order, double base_re, double gamma) {
    json j;
    if (which == "hamiltonian")
        j = hamiltonian_problem_json(n_or_pairs, 1.0, eps, order, base_re, gamma);
    else if (which == "volume")
        j = volume_problem_json(n_or_pairs, eps, order, base_re, gamma);
    else
        throw Error(errc::schema_error, "scenario must be hamiltonian or volume");
    write_text(out_file, j.dump(2) + "\n");
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Lindstedt-Poincare normal forms with quantitative small-divisor tracking"};
    app.require_subcommand(1);

    std::string problem_path, out_dir = "out", base_flag;
    int order = 16, kmax = 4, window_low = 2, window_high = 4;
    double grid_h = 0, eps_star = 0;
    unsigned seed = 0;
    bool allow_trivial = false, no_trust = false, exact_resonance = false;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("problem", problem_path, "problem file (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_flag("--exact-resonance", exact_resonance,
                      "require exact (rational) resonance decisions");
    };

    auto *res = app.add_subcommand("resonances", "first integrals, weights, omega_k(S)");
    add_common(res);
    res->add_option("--kmax", kmax, "omega_k(S) table upper k");
    res->add_option("--window-low", window_low, "weight window lower degree");
    res->add_option("--window-high", window_high, "weight window upper degree");
    res->add_flag("--allow-trivial-ring", allow_trivial, "EmptyRing is not fatal");

    auto *nor = app.add_subcommand("normalize", "run the quadratic normalization ladder");
    add_common(nor);
    nor->add_option("--order", order, "target order (power of two)");
    nor->add_option("--base", base_flag, "base point re,im,... overriding the problem file");

    auto *fil = app.add_subcommand("filter", "diophantine compact-set filtering");
    add_common(fil);
    fil->add_option("--kmax", kmax, "final filter stage");
    fil->add_option("--grid-h", grid_h, "grid resolution override");
    fil->add_flag("--no-trust", no_trust, "disable the trust-radius marking");

    auto *mea = app.add_subcommand("measure", "nondegeneracy, measure bound, gamma*");
    add_common(mea);
    mea->add_option("--eps-star", eps_star, "target excluded measure");
    mea->add_option("--kmax", kmax, "strictly-diophantine range");

    auto *ver = app.add_subcommand("verify", "conjugacy and invariance residuals");
    add_common(ver);
    ver->add_option("--order", order, "normalization order");
    ver->add_option("--base", base_flag, "base point override");
    ver->add_option("--seed", seed, "sampling seed (reserved; sampling is deterministic)");

    auto *scn = app.add_subcommand("scenario", "emit a built-in problem file");
    std::string which, out_file = "problem.json";
    int n_or_pairs = 1;
    double eps = 1e-3, base_re = 0.01, gamma = 0.1;
    scn->add_option("kind", which, "hamiltonian | volume")->required();
    scn->add_option("--out", out_file, "output problem file");
    scn->add_option("--n", n_or_pairs, "pairs (hamiltonian) or dimension (volume)");
    scn->add_option("--eps", eps, "perturbation size");
    scn->add_option("--order", order, "intended normalization order (sets truncation)");
    scn->add_option("--base", base_re, "real base point value");
    scn->add_option("--gamma", gamma, "schedule gamma");

    CLI11_PARSE(app, argc, argv);

    std::string cmdline;
    for (int i = 0; i < argc; ++i) cmdline += std::string(i ? " " : "") + argv[i];

    try {
        if (scn->parsed())
            return cmd_scenario(which, out_file, n_or_pairs, eps, order, base_re, gamma);
        Problem pr = load_problem(problem_path);
        if (exact_resonance && !pr.S.exact())
            throw Error(errc::schema_error, "--exact-resonance demands a rational morphism");
        if (res->parsed())
            return cmd_resonances(pr, out_dir, allow_trivial, kmax, window_low, window_high,
                                  cmdline);
        if (nor->parsed()) return cmd_normalize(pr, out_dir, order, base_flag, cmdline);
        if (fil->parsed()) return cmd_filter(pr, out_dir, kmax, grid_h, no_trust, cmdline);
        if (mea->parsed()) return cmd_measure(pr, out_dir, eps_star, kmax, cmdline);
        if (ver->parsed()) return cmd_verify(pr, out_dir, order, base_flag, cmdline);
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include "lpnf/kam.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lpnf {

DiophantineSchedule DiophantineSchedule::preset_one() { return {}; }

DiophantineSchedule DiophantineSchedule::preset_inv_poly(double c, double tau) {
    DiophantineSchedule s;
    s.preset_ = Preset::inv_poly;
    s.c_ = c;
    s.tau_ = tau;
    return s;
}

DiophantineSchedule DiophantineSchedule::preset_geometric(double c, double sigma) {
    DiophantineSchedule s;
    s.preset_ = Preset::geometric;
    s.c_ = c;
    s.sigma_ = sigma;
    return s;
}

DiophantineSchedule DiophantineSchedule::from_list(std::vector<double> omegas) {
    DiophantineSchedule s;
    s.preset_ = Preset::list;
    s.list_ = std::move(omegas);
    return s;
}

double DiophantineSchedule::omega(int k) const {
    if (k < 1) throw Error(errc::precondition_violated, "omega index k >= 1");
    double w = 1.0;
    switch (preset_) {
    case Preset::one: w = 1.0; break;
    case Preset::inv_poly: w = c_ / std::pow(double(k + 1), tau_); break;
    case Preset::geometric: w = c_ * std::pow(2.0, -sigma_ * k); break;
    case Preset::list:
        if (k > int(list_.size()))
            throw Error(errc::schedule_not_diophantine,
                        "omega list exhausted at k = " + std::to_string(k));
        w = list_[k - 1];
        break;
    }
    return std::min(w, 1.0);
}

double DiophantineSchedule::partial_sum(int k) const {
    double s = 0;
    for (int j = 1; j <= k; ++j) s += -std::log(omega(j)) / std::pow(2.0, j);
    if (s > partial_sum_cap)
        throw Error(errc::schedule_not_diophantine,
                    "partial sum " + std::to_string(s) + " exceeds declared cap");
    return s;
}

double DiophantineSchedule::tail_bound(int k) const {
    // sum_{j>k} -ln(omega_j)/2^j with omega_j clamped to <= 1 (so terms >= 0)
    switch (preset_) {
    case Preset::one: return 0.0;
    case Preset::inv_poly: {
        // -ln w_j <= -ln c + tau ln(j+1); ln(j+1) <= ln(k+2) + (j-k-1)/(k+2) for j > k
        double A = std::max(0.0, -std::log(std::min(c_, 1.0)));
        double lk = std::log(double(k + 2));
        // sum_{j>k} (A + tau lk)/2^j + tau/(k+2) sum_{j>k} (j-k-1)/2^j
        double geo = std::pow(2.0, -double(k));
        return (A + tau_ * lk) * geo + tau_ / double(k + 2) * geo; // sum (j-k-1)/2^j = 2^{-k}
    }
    case Preset::geometric: {
        double A = std::max(0.0, -std::log(std::min(c_, 1.0))) + sigma_ * std::log(2.0);
        // -ln w_j <= A j for j >= 1 (crude but certified); sum_{j>k} j/2^j = (k+2)/2^k
        return A * double(k + 2) * std::pow(2.0, -double(k));
    }
    case Preset::list: {
        double used = 0;
        for (int j = 1; j <= std::min(k, int(list_.size())); ++j)
            used += -std::log(omega(j)) / std::pow(2.0, j);
        return std::max(0.0, partial_sum_cap - used);
    }
    }
    return partial_sum_cap;
}

void DiophantineSchedule::validate(int k_check) const {
    double prev = 1.0;
    for (int k = 1; k <= k_check; ++k) {
        double w = omega(k);
        if (w <= 0 || w > 1.0 + 1e-15)
            throw Error(errc::schedule_not_diophantine, "omega_k outside (0,1]");
        if (w > prev + 1e-15)
            throw Error(errc::schedule_not_diophantine, "omega_k must be nonincreasing");
        prev = w;
        if (preset_ == Preset::list && k == int(list_.size())) break;
    }
    partial_sum(preset_ == Preset::list ? int(list_.size()) : k_check);
}

std::string DiophantineSchedule::describe() const {
    std::ostringstream os;
    switch (preset_) {
    case Preset::one: os << "omega_k = 1"; break;
    case Preset::inv_poly: os << "omega_k = " << c_ << "/(k+1)^" << tau_; break;
    case Preset::geometric: os << "omega_k = " << c_ << " * 2^(-" << sigma_ << " k)"; break;
    case Preset::list: os << "omega list of length " << list_.size(); break;
    }
    return os.str();
}

double t_m(int k, const DiophantineSchedule &sched, int l, double Lambda) {
    double m = std::pow(2.0, k);
    return sched.gamma * sched.omega(k + 1) / (2.0 * l * Lambda * (2.0 * m + 1.0));
}

double gamma_k(int k, const DiophantineSchedule &sched, double c1) {
    double m = std::pow(2.0, k);
    double w = sched.omega(k + 1);
    double ratio = c1 / (sched.gamma * sched.gamma * w * w);
    double g = std::pow(ratio, -1.0 / m);
    return std::min(g, 1.0);
}

ThetaRadii theta_and_radii(int k, double r, const DiophantineSchedule &sched, double c1) {
    double m = std::pow(2.0, k);
    ThetaRadii out;
    out.theta = gamma_k(k, sched, c1) * std::pow(m, -2.0 / m);
    double cur = r;
    for (int i = 0; i < 5; ++i) {
        cur *= out.theta;
        out.r[i] = cur;
    }
    return out;
}

RadiiLimit radii_limit(double R0, int k_start, int k_max, const DiophantineSchedule &sched,
                       double c1) {
    sched.validate(k_max + 2);
    RadiiLimit out;
    out.R.push_back(R0);
    for (int k = k_start; k < k_max; ++k) {
        double m = std::pow(2.0, k);
        double f = std::pow(gamma_k(k, sched, c1), 5.0) * std::pow(m, -10.0 / m);
        out.R.push_back(out.R.back() * f);
    }
    // ln of the tail product beyond K: sum_{k>K} 5 ln gamma_k - (10 k ln 2)/2^k.
    // With gamma_k = min(1, (gamma^2 w^2/c1)^{1/m}): ln gamma_k >= -(1/2^k)[ln(c1/gamma^2) + 2(-ln w_{k+1})].
    auto tail_log = [&](int K) {
        double base = std::max(0.0, std::log(std::max(c1, 1e-300) /
                                             (sched.gamma * sched.gamma)));
        double t = -5.0 * base * std::pow(2.0, -double(K)); // sum_{k>K} 1/2^k = 2^-K
        // sum_{k>K} 10(-ln w_{k+1})/2^k = 20 sum_{j>K+1} (-ln w_j)/2^j <= 20 tail(K)
        t += -20.0 * sched.tail_bound(K);
        t += -10.0 * std::log(2.0) * (double(K) + 2.0) * std::pow(2.0, -double(K));
        return t;
    };
    // R_k / R_{k1} = prod_{i >= k1} factor(i), i.e. the tail from k1 - 1
    out.k1 = k_max;
    for (int K = k_start; K <= k_max; ++K) {
        if (std::exp(tail_log(K - 1)) > 0.5) {
            out.k1 = K;
            break;
        }
    }
    out.limit_lower_bound = out.R.back() * std::exp(tail_log(k_max - 1));
    return out;
}

double c1_constant(int n, int p, int l, double m_r, double gamma_prime) {
    return 4.0 * (gamma_prime / 2.0 + double(p) * double(n) * double(l) * m_r);
}

double m_r_constant(const LinearMorphism &S, const ResonantStructure &R, double r) {
    Context ctx;
    ctx.n = S.n();
    ctx.p = R.p();
    ctx.xmax = R.min_row_degree() + 1;
    ctx.umax = 0;
    ctx.base.assign(R.p(), cplx(0));
    double sj = 0;
    for (int j = 0; j < S.l(); ++j) {
        double v = 0;
        for (int i = 0; i < S.n(); ++i) v = std::max(v, std::abs(S.lam(j, i)) * r);
        sj = std::max(sj, v);
    }
    double dpi = 0;
    for (int k = 0; k < R.p(); ++k) {
        double row = 0;
        for (int i = 0; i < S.n(); ++i) row += R.dpi_entry(ctx, k, i).majorant_norm(r, 1.0);
        dpi = std::max(dpi, row);
    }
    return sj * dpi;
}

double epsilon_vois(int k, const DiophantineSchedule &sched, int l, double Lambda) {
    double m = std::pow(2.0, k);
    return sched.gamma * sched.omega(k + 1) / (24.0 * l * Lambda * (2.0 * m + 1.0));
}

CompactGrid::CompactGrid(std::vector<Rect> rects, double h) : rects_(std::move(rects)), h_(h) {
    if (h <= 0) throw Error(errc::precondition_violated, "grid resolution must be positive");
    // cell centers per complex coordinate
    std::vector<std::vector<cplx>> axes;
    for (auto &r : rects_) {
        std::vector<cplx> pts;
        int nre = std::max(1, int(std::floor((r.re_hi - r.re_lo) / h + 0.5)));
        int nim = std::max(1, int(std::floor((r.im_hi - r.im_lo) / h + 0.5)));
        for (int a = 0; a < nre; ++a)
            for (int b = 0; b < nim; ++b)
                pts.push_back({r.re_lo + (a + 0.5) * h, r.im_lo + (b + 0.5) * h});
        axes.push_back(std::move(pts));
    }
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        std::vector<cplx> pt;
        for (std::size_t k = 0; k < axes.size(); ++k) pt.push_back(axes[k][idx[k]]);
        points_.push_back(std::move(pt));
        std::size_t k = 0;
        while (k < axes.size() && ++idx[k] == axes[k].size()) idx[k++] = 0;
        if (k == axes.size()) break;
    }
    status_.assign(points_.size(), Status::alive);
}

double CompactGrid::cell_volume() const { return std::pow(h_, 2 * p()); }

std::size_t CompactGrid::alive_count() const {
    std::size_t c = 0;
    for (auto s : status_)
        if (s == Status::alive) ++c;
    return c;
}

FilterOutcome filter_K(CompactGrid &grid, const std::vector<Series> &a,
                       const LinearMorphism &S, int k, double gamma, double omega_next,
                       double trust_radius) {
    FilterOutcome out;
    long long lo = (1LL << k) + 1, hi = 1LL << (k + 1);
    out.window = nonzero_weights_in(S, int(lo), int(hi));
    out.worst_divisor.assign(grid.size(), std::numeric_limits<double>::infinity());
    out.offending_weight.assign(grid.size(), -1);
    const auto &base = a.at(0).ctx().base;
    const double thresh = gamma * omega_next;
    for (std::size_t ptid = 0; ptid < grid.size(); ++ptid) {
        if (grid.status()[ptid] != CompactGrid::Status::alive) continue;
        const auto &b = grid.points()[ptid];
        if (trust_radius > 0 && thresh > 0) {
            double dist = 0;
            for (int q = 0; q < grid.p(); ++q) dist = std::max(dist, std::abs(b[q] - base[q]));
            if (dist > trust_radius) {
                grid.status()[ptid] = CompactGrid::Status::untrusted;
                out.untrusted += 1;
                continue;
            }
        }
        std::vector<cplx> av(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) av[j] = a[j].eval_u(b);
        for (std::size_t wi = 0; wi < out.window.size(); ++wi) {
            cplx d = 0;
            for (std::size_t j = 0; j < a.size(); ++j) d += av[j] * out.window[wi].vals[j];
            double ad = std::abs(d);
            if (ad < out.worst_divisor[ptid]) {
                out.worst_divisor[ptid] = ad;
                out.offending_weight[ptid] = int(wi);
            }
        }
        // gamma = 0 leaves the filter as the identity
        if (thresh > 0 && out.worst_divisor[ptid] < thresh && !out.window.empty()) {
            grid.status()[ptid] = CompactGrid::Status::dead;
            out.killed += 1;
        }
    }
    return out;
}

double russmann_measure_bound(double eps, double beta, int mu0, int n_real, double d,
                              double vartheta, double g_norm) {
    if (eps < 0) throw Error(errc::precondition_violated, "eps must be nonnegative");
    if (eps == 0) return 0.0;
    if (eps > beta / (2.0 * mu0 + 2.0))
        throw Error(errc::epsilon_too_large, "need eps <= beta/(2 mu0 + 2)");
    if (mu0 == 0) return 0.0; // g itself is bounded below by beta > eps on K
    double fac = 1;
    for (int i = 2; i <= mu0 + 1; ++i) fac *= i;
    double B = 3.0 * std::pow(2.0 * M_PI * M_E, n_real / 2.0) *
               std::pow(double(mu0 + 1), mu0 + 2) / fac;
    return B * std::pow(d, n_real - 1) * (1.0 / std::sqrt(double(n_real)) + 2.0 * d + d / vartheta) *
           std::pow(eps / beta, 1.0 / mu0) / beta * g_norm;
}

double gamma_star(const GammaStarInputs &in) {
    double second = 1.0 / in.M_omega * std::sqrt(in.beta / (2.0 * in.mu0 + 2.0));
    if (in.mu0 == 0) return second;
    double den = std::pow(std::pow(2.0, 2) + in.n, in.n) * in.a2 - (in.n + 1) * in.a1 +
                 in.n / 4.0 * in.M_omega_2mu;
    if (den <= 0)
        throw Error(errc::non_positive_denominator,
                    "bracketed combination in gamma* is nonpositive");
    double first = std::pow(in.eps_star * std::tgamma(double(in.n)) / (in.M * den),
                            double(in.mu0) / 2.0);
    return std::min(first, second);
}

StrictDiophantineReport strictly_diophantine_check(
    const DiophantineSchedule &sched, const LinearMorphism &S, int mu0, int k_max,
    const std::function<double(int)> &omega_S_override) {
    if (mu0 <= 0) {
        // degenerate: divisors uniformly bounded below, condition holds trivially
        StrictDiophantineReport rep;
        rep.decreasing_to_zero = true;
        rep.M_omega = 0;
        rep.M_omega_2mu = 0;
        return rep;
    }
    StrictDiophantineReport rep;
    rep.M_omega = 0;
    rep.M_omega_2mu = 0;
    const int n = S.n();
    for (int k = 1; k <= k_max; ++k) {
        double ws;
        bool enumerated = true;
        if (omega_S_override) {
            ws = omega_S_override(k);
        } else {
            auto res = omega_S(S, k);
            ws = res.value;
            enumerated = res.enumerated;
        }
        if (ws <= 0) throw Error(errc::no_nonzero_weights, "omega_k(S) vanished");
        double ratio = sched.omega(k) / ws;
        double term = std::pow(std::pow(2.0, k) + n + 1, n + 1) * std::pow(ratio, 2.0 / mu0);
        rep.sequence.push_back(term);
        rep.omega_s_enumerated.push_back(enumerated);
        rep.M_omega = std::max(rep.M_omega, ratio);
        rep.M_omega_2mu = std::max(rep.M_omega_2mu, term);
    }
    // decreasing toward 0 over the observed range: monotone nonincreasing from
    // some k' on and final term < first term
    rep.decreasing_to_zero = false;
    for (std::size_t start = 0; start + 1 < rep.sequence.size(); ++start) {
        bool mono = true;
        for (std::size_t i = start; i + 1 < rep.sequence.size(); ++i)
            if (rep.sequence[i + 1] > rep.sequence[i] * (1 + 1e-12)) {
                mono = false;
                break;
            }
        if (mono) {
            rep.decreasing_to_zero = rep.sequence.back() < rep.sequence[start];
            break;
        }
    }
    if (rep.sequence.size() == 1) rep.decreasing_to_zero = true;
    return rep;
}

NormBallReport norm_ball_checks(const NormalizationState &st, int k,
                                const DiophantineSchedule &sched, double r) {
    NormBallReport rep{};
    double m = double(st.m);
    double tm = t_m(k, sched, st.S.l(), st.S.Lambda());
    VectorField NF = st.nf_field();
    rep.nf_norm = NF.majorant_norm(r, tm);
    rep.dunf_norm = 0;
    for (int q = 0; q < st.ctx().p; ++q) {
        double v = 0;
        for (int i = 0; i < st.ctx().n; ++i)
            v = std::max(v, NF[i].du(q).majorant_norm(r, tm));
        rep.dunf_norm = std::max(rep.dunf_norm, v);
    }
    rep.remainder_norm = st.remainder.majorant_norm(r, tm);
    rep.eta = 1.0 / (2.0 * st.S.l() * Linv_norm(st.S));
    rep.in_NF_set = rep.nf_norm < 1.0 - 1.0 / (m * m * m) &&
                    rep.dunf_norm < rep.eta - 1.0 / (m * m);
    rep.in_B_set = rep.remainder_norm < 32.0 * st.ctx().n / (m * m * m * m);
    rep.da_direct = 0;
    for (int j = 0; j < st.S.l(); ++j)
        for (int q = 0; q < st.ctx().p; ++q)
            rep.da_direct = std::max(rep.da_direct, st.a[j].du(q).majorant_norm(r, tm));
    rep.da_transfer = 2.0 * st.S.l() * Linv_norm(st.S) * rep.dunf_norm;
    return rep;
}

} // namespace lpnf

#include "lpnf/series.hpp"

#include <algorithm>
#include <cmath>

namespace lpnf {

bool Context::same_base(const Context &o) const {
    if (p != o.p) return false;
    for (int k = 0; k < p; ++k)
        if (base[k] != o.base[k]) return false;
    return true;
}

Series Series::constant(const Context &ctx, cplx c) {
    Series s(ctx);
    if (c != cplx(0)) s.terms_[Mono{}] = c;
    return s;
}

Series Series::monomial(const Context &ctx, const Mono &m, cplx c) {
    Series s(ctx);
    s.set_coeff(m, c);
    return s;
}

Series Series::u_var(const Context &ctx, int k) {
    Series s = monomial(ctx, Mono::u_unit(k), 1.0);
    s.add_term(Mono{}, ctx.base.at(k));
    return s;
}

void Series::check_compatible(const Series &o) const {
    if (!ctx_.same_space(o.ctx_))
        throw Error(errc::dimension_mismatch, "series live in different ambient spaces");
    if (!ctx_.same_base(o.ctx_))
        throw Error(errc::base_point_mismatch, "series expanded around different base points");
}

void Series::set_coeff(const Mono &m, cplx c) {
    if (m.xdeg() > ctx_.xmax || m.udeg() > ctx_.umax) return;
    if (c == cplx(0))
        terms_.erase(m);
    else
        terms_[m] = c;
}

void Series::add_term(const Mono &m, cplx c) {
    if (c == cplx(0) || m.xdeg() > ctx_.xmax || m.udeg() > ctx_.umax) return;
    auto [it, fresh] = terms_.try_emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second == cplx(0)) terms_.erase(it);
    }
}

int Series::order() const {
    int o = kOrderInfinite;
    for (auto &[m, c] : terms_) o = std::min(o, m.xdeg());
    return o;
}

int Series::max_xdeg() const {
    int d = 0;
    for (auto &[m, c] : terms_) d = std::max(d, m.xdeg());
    return d;
}

int Series::max_udeg() const {
    int d = 0;
    for (auto &[m, c] : terms_) d = std::max(d, m.udeg());
    return d;
}

double Series::max_abs() const {
    double v = 0;
    for (auto &[m, c] : terms_) v = std::max(v, std::abs(c));
    return v;
}

Series &Series::cleanup() {
    double floor = kPruneRel * max_abs();
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (it->first.xdeg() > ctx_.xmax || it->first.udeg() > ctx_.umax ||
            std::abs(it->second) <= floor)
            it = terms_.erase(it);
        else
            ++it;
    }
    return *this;
}

Series &Series::operator+=(const Series &o) {
    check_compatible(o);
    ctx_.xmax = std::min(ctx_.xmax, o.ctx_.xmax);
    ctx_.umax = std::min(ctx_.umax, o.ctx_.umax);
    for (auto &[m, c] : o.terms_) add_term(m, c);
    return cleanup();
}

Series &Series::operator-=(const Series &o) {
    check_compatible(o);
    ctx_.xmax = std::min(ctx_.xmax, o.ctx_.xmax);
    ctx_.umax = std::min(ctx_.umax, o.ctx_.umax);
    for (auto &[m, c] : o.terms_) add_term(m, -c);
    return cleanup();
}

Series Series::operator-() const {
    Series r(*this);
    for (auto &[m, c] : r.terms_) c = -c;
    return r;
}

Series &Series::operator*=(cplx c) {
    if (c == cplx(0)) {
        terms_.clear();
        return *this;
    }
    for (auto &[m, v] : terms_) v *= c;
    return *this;
}

Series operator*(const Series &a, const Series &b) {
    a.check_compatible(b);
    Context ctx = a.ctx();
    ctx.xmax = std::min(a.ctx().xmax, b.ctx().xmax);
    ctx.umax = std::min(a.ctx().umax, b.ctx().umax);
    Series r(ctx);
    if (a.is_zero() || b.is_zero()) return r;
    // b is iterated in graded order; once degrees overflow for a given a-term
    // every later b-term overflows too.
    const int bmin = b.terms().begin()->first.xdeg();
    for (auto &[ma, ca] : a.terms()) {
        const int xa = ma.xdeg(), ua = ma.udeg();
        if (xa + bmin > ctx.xmax) continue;
        for (auto &[mb, cb] : b.terms()) {
            if (xa + mb.xdeg() > ctx.xmax) break; // graded order: no later term fits
            if (ua + mb.udeg() > ctx.umax) continue;
            Mono m;
            for (int i = 0; i < kMaxN; ++i) m.xe[i] = ma.xe[i] + mb.xe[i];
            for (int k = 0; k < kMaxP; ++k) m.ue[k] = ma.ue[k] + mb.ue[k];
            r.add_term(m, ca * cb);
        }
    }
    return r.cleanup();
}

Series Series::jet(int k) const {
    Series r(ctx_);
    for (auto &[m, c] : terms_)
        if (m.xdeg() <= k) r.terms_[m] = c;
    return r;
}

Series Series::x_slice(int lo, int hi) const {
    Series r(ctx_);
    for (auto &[m, c] : terms_) {
        int d = m.xdeg();
        if (d >= lo && d <= hi) r.terms_[m] = c;
    }
    return r;
}

Series Series::dx(int i) const {
    Series r(ctx_);
    for (auto &[m, c] : terms_) {
        if (m.xe[i] == 0) continue;
        Mono d = m;
        d.xe[i] -= 1;
        r.add_term(d, c * double(m.xe[i]));
    }
    return r;
}

Series Series::du(int k) const {
    Series r(ctx_);
    for (auto &[m, c] : terms_) {
        if (m.ue[k] == 0) continue;
        Mono d = m;
        d.ue[k] -= 1;
        r.add_term(d, c * double(m.ue[k]));
    }
    return r;
}

double Series::majorant_norm(double r, double t) const {
    double s = 0;
    for (auto &[m, c] : terms_) s += std::abs(c) * std::pow(r, m.xdeg()) * std::pow(t, m.udeg());
    return s;
}

cplx Series::eval(const std::vector<cplx> &x, const std::vector<cplx> &u) const {
    cplx s = 0;
    for (auto &[m, c] : terms_) {
        cplx v = c;
        for (int i = 0; i < ctx_.n; ++i)
            for (int e = 0; e < m.xe[i]; ++e) v *= x[i];
        for (int k = 0; k < ctx_.p; ++k) {
            cplx d = u[k] - ctx_.base[k];
            for (int e = 0; e < m.ue[k]; ++e) v *= d;
        }
        s += v;
    }
    return s;
}

cplx Series::eval_u(const std::vector<cplx> &u) const {
    std::vector<cplx> x(ctx_.n, cplx(0));
    for (auto &[m, c] : terms_)
        if (m.xdeg() > 0)
            throw Error(errc::precondition_violated, "eval_u on a series with x-dependence");
    return eval(x, u);
}

Series Series::reciprocal_u() const {
    if (max_xdeg() > 0)
        throw Error(errc::precondition_violated, "reciprocal_u needs a pure u-series");
    cplx c0 = coeff(Mono{});
    if (c0 == cplx(0))
        throw Error(errc::zero_small_divisor, "reciprocal_u: vanishing constant term");
    // 1/(c0(1+N)) with N of positive u-order: geometric series stops at umax.
    Series N = *this;
    N.add_term(Mono{}, -c0);
    N *= cplx(1) / c0;
    Series acc = Series::constant(ctx_, 1.0);
    Series pw = Series::constant(ctx_, 1.0);
    for (int k = 1; k <= ctx_.umax; ++k) {
        pw = pw * (-N);
        if (pw.is_zero()) break;
        acc += pw;
    }
    acc *= cplx(1) / c0;
    return acc.cleanup();
}

Series Series::compose(const std::vector<Series> &xs, const std::vector<Series> &us) const {
    if (int(xs.size()) != ctx_.n || int(us.size()) != ctx_.p)
        throw Error(errc::dimension_mismatch, "compose: substitution arity");
    Series zero = !xs.empty() ? Series(xs[0].ctx()) : Series(us.at(0).ctx());
    Context out = zero.ctx();
    out.xmax = std::min(out.xmax, ctx_.xmax);
    out.umax = std::min(out.umax, ctx_.umax);

    // Per-variable power tables, built lazily up to the needed exponent.
    std::vector<std::vector<Series>> xpow(ctx_.n), upow(ctx_.p);
    for (int i = 0; i < ctx_.n; ++i) xpow[i].push_back(Series::constant(out, 1.0));
    for (int k = 0; k < ctx_.p; ++k) upow[k].push_back(Series::constant(out, 1.0));
    auto pow_of = [&](std::vector<Series> &tab, const Series &g, int e) -> const Series & {
        while (int(tab.size()) <= e) tab.push_back(tab.back() * g);
        return tab[e];
    };

    std::vector<Series> ushift(ctx_.p, zero);
    for (int k = 0; k < ctx_.p; ++k) {
        ushift[k] = us[k];
        ushift[k].add_term(Mono{}, -ctx_.base[k]); // substitute into (u_k - b_k)
    }

    Series r(out);
    for (auto &[m, c] : terms_) {
        Series t = Series::constant(out, c);
        for (int i = 0; i < ctx_.n && !t.is_zero(); ++i)
            if (m.xe[i]) t = t * pow_of(xpow[i], xs[i], m.xe[i]);
        for (int k = 0; k < ctx_.p && !t.is_zero(); ++k)
            if (m.ue[k]) t = t * pow_of(upow[k], ushift[k], m.ue[k]);
        r += t;
    }
    return r.cleanup();
}

// ---- VectorField ----

VectorField::VectorField(std::vector<Series> comps) : comps_(std::move(comps)) {
    for (std::size_t i = 1; i < comps_.size(); ++i) comps_[0].check_compatible(comps_[i]);
    if (int(comps_.size()) != comps_.at(0).ctx().n)
        throw Error(errc::dimension_mismatch, "vector field needs n components");
}

bool VectorField::is_zero() const {
    for (auto &c : comps_)
        if (!c.is_zero()) return false;
    return true;
}

int VectorField::order() const {
    int o = kOrderInfinite;
    for (auto &c : comps_) o = std::min(o, c.order());
    return o;
}

double VectorField::max_abs() const {
    double v = 0;
    for (auto &c : comps_) v = std::max(v, c.max_abs());
    return v;
}

double VectorField::majorant_norm(double r, double t) const {
    double v = 0;
    for (auto &c : comps_) v = std::max(v, c.majorant_norm(r, t));
    return v;
}

VectorField &VectorField::operator+=(const VectorField &o) {
    if (n() != o.n()) throw Error(errc::dimension_mismatch, "field sum");
    for (int i = 0; i < n(); ++i) comps_[i] += o.comps_[i];
    return *this;
}

VectorField &VectorField::operator-=(const VectorField &o) {
    if (n() != o.n()) throw Error(errc::dimension_mismatch, "field difference");
    for (int i = 0; i < n(); ++i) comps_[i] -= o.comps_[i];
    return *this;
}

VectorField VectorField::operator-() const {
    VectorField r(*this);
    for (auto &c : r.comps_) c = -c;
    return r;
}

VectorField &VectorField::operator*=(cplx c) {
    for (auto &s : comps_) s *= c;
    return *this;
}

VectorField operator*(Series f, VectorField X) {
    for (int i = 0; i < X.n(); ++i) X[i] = f * X[i];
    return X;
}

VectorField VectorField::jet(int k) const {
    VectorField r(*this);
    for (auto &c : r.comps_) c = c.jet(k);
    return r;
}

VectorField VectorField::x_slice(int lo, int hi) const {
    VectorField r(*this);
    for (auto &c : r.comps_) c = c.x_slice(lo, hi);
    return r;
}

VectorField lie_bracket(const VectorField &X, const VectorField &Y) {
    if (X.n() != Y.n()) throw Error(errc::dimension_mismatch, "lie_bracket");
    VectorField r(X.ctx());
    for (int i = 0; i < X.n(); ++i) {
        Series s(X.ctx());
        for (int j = 0; j < X.n(); ++j) s += X[j] * Y[i].dx(j) - Y[j] * X[i].dx(j);
        r[i] = s;
    }
    return r;
}

Series lie_derivative(const VectorField &X, const Series &f) {
    Series s(X.ctx());
    for (int i = 0; i < X.n(); ++i) s += X[i] * f.dx(i);
    return s;
}

VectorField compose_field(const VectorField &F, const VectorField &U) {
    const Context &ctx = F.ctx();
    std::vector<Series> xs(ctx.n);
    for (int i = 0; i < ctx.n; ++i) xs[i] = Series::x_var(U.ctx(), i) + U[i];
    std::vector<Series> us(ctx.p);
    for (int k = 0; k < ctx.p; ++k) us[k] = Series::u_var(U.ctx(), k);
    VectorField r(U.ctx());
    for (int i = 0; i < ctx.n; ++i) r[i] = F[i].compose(xs, us);
    return r;
}

VectorField invert_displacement(const VectorField &U) {
    if (!U.is_zero() && U.order() < 2)
        throw Error(errc::not_tangent_to_identity, "invert_displacement: order(U) < 2");
    VectorField V(U.ctx());
    int ord = U.is_zero() ? kOrderInfinite : U.order();
    if (ord == kOrderInfinite) return V;
    // V <- -U o (Id+V); each pass fixes at least ord-1 more degrees.
    int passes = U.ctx().xmax / std::max(1, ord - 1) + 2;
    for (int it = 0; it < passes; ++it) {
        VectorField W = -compose_field(U, V);
        bool same = true;
        for (int i = 0; i < U.n() && same; ++i) {
            Series d = W[i] - V[i];
            if (!d.is_zero()) same = false;
        }
        V = std::move(W);
        if (same) break;
    }
    return V;
}

} // namespace lpnf

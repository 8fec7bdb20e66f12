#ifndef LPNF_SERIES_HPP
#define LPNF_SERIES_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "lpnf/error.hpp"

namespace lpnf {

using cplx = std::complex<double>;

inline constexpr int kMaxN = 8; // x-variables
inline constexpr int kMaxP = 4; // u-variables

/// Order of the zero series: strictly larger than any admissible xmax so that
/// order comparisons stay total.
inline constexpr int kOrderInfinite = std::numeric_limits<int>::max();

/// Bi-graded multi-index: exponents of x^Q (u-b)^P. Compared graded-lex on
/// (xexp, uexp), x-part major — this fixes the deterministic term order used
/// everywhere (iteration, serialization, reduction).
struct Mono {
    std::array<std::uint8_t, kMaxN> xe{};
    std::array<std::uint8_t, kMaxP> ue{};

    int xdeg() const {
        int d = 0;
        for (auto e : xe) d += e;
        return d;
    }
    int udeg() const {
        int d = 0;
        for (auto e : ue) d += e;
        return d;
    }
    friend bool operator==(const Mono &a, const Mono &b) { return a.xe == b.xe && a.ue == b.ue; }
    friend bool operator<(const Mono &a, const Mono &b) {
        int da = a.xdeg(), db = b.xdeg();
        if (da != db) return da < db;
        if (a.xe != b.xe) return a.xe < b.xe;
        int ua = a.udeg(), ub = b.udeg();
        if (ua != ub) return ua < ub;
        return a.ue < b.ue;
    }
    static Mono x_unit(int i) {
        Mono m;
        m.xe[i] = 1;
        return m;
    }
    static Mono u_unit(int k) {
        Mono m;
        m.ue[k] = 1;
        return m;
    }
};

/// Shared truncation/expansion context: ambient dimensions, truncation
/// degrees and the u-base point b. Two series interoperate only if their
/// contexts agree (the result is re-truncated to the tighter degrees).
struct Context {
    int n = 0, p = 0;
    int xmax = 0, umax = 0;
    std::vector<cplx> base; // length p

    bool same_space(const Context &o) const { return n == o.n && p == o.p; }
    bool same_base(const Context &o) const;
};

/// Finitely supported truncated power series sum c_{Q,P} x^Q (u-b)^P with
/// complex coefficients. Immutable in spirit: all operations return new
/// values. Terms below the relative prune tolerance are dropped.
class Series {
  public:
    static constexpr double kPruneRel = 1e-14;

    Series() = default;
    explicit Series(const Context &ctx) : ctx_(ctx) {}
    static Series constant(const Context &ctx, cplx c);
    static Series monomial(const Context &ctx, const Mono &m, cplx c);
    static Series x_var(const Context &ctx, int i) { return monomial(ctx, Mono::x_unit(i), 1.0); }
    /// (u_k - b_k) + b_k, i.e. the coordinate function u_k around the base.
    static Series u_var(const Context &ctx, int k);

    const Context &ctx() const { return ctx_; }
    const std::map<Mono, cplx> &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }

    cplx coeff(const Mono &m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? cplx(0) : it->second;
    }
    void set_coeff(const Mono &m, cplx c); // respects truncation, drops exact zeros
    void add_term(const Mono &m, cplx c);

    /// Smallest x-degree present; kOrderInfinite for the zero series.
    int order() const;
    int max_xdeg() const;
    int max_udeg() const;
    double max_abs() const;

    Series &operator+=(const Series &o);
    Series &operator-=(const Series &o);
    friend Series operator+(Series a, const Series &b) { return a += b; }
    friend Series operator-(Series a, const Series &b) { return a -= b; }
    friend Series operator*(const Series &a, const Series &b);
    Series operator-() const;
    Series &operator*=(cplx c);
    friend Series operator*(Series a, cplx c) { return a *= c; }
    friend Series operator*(cplx c, Series a) { return a *= c; }

    /// Keeps terms of x-degree <= k.
    Series jet(int k) const;
    /// Keeps terms with lo <= x-degree <= hi.
    Series x_slice(int lo, int hi) const;
    Series dx(int i) const;
    Series du(int k) const;

    /// Majorant norm sum |c| t^{|P|} r^{|Q|}.
    double majorant_norm(double r, double t) const;

    /// Evaluate at a point (x, u); u given in absolute coordinates.
    cplx eval(const std::vector<cplx> &x, const std::vector<cplx> &u) const;
    /// Evaluate the u-part only (x-exponents must all be zero).
    cplx eval_u(const std::vector<cplx> &u) const;

    /// Pure-u series 1/this, Taylor-expanded around the base; requires
    /// |this(b)| > 0 (caller enforces its own floor).
    Series reciprocal_u() const;

    /// Substitute x_i -> xs[i], u_k -> us[k] (us in absolute coordinates),
    /// truncating to this context. Ambient context of xs/us must match.
    Series compose(const std::vector<Series> &xs, const std::vector<Series> &us) const;

    /// Re-truncate/prune in place and return *this.
    Series &cleanup();

    void check_compatible(const Series &o) const;

  private:
    Context ctx_;
    std::map<Mono, cplx> terms_;
};

/// n series, the coefficients of a vector field sum X_i d/dx_i. All
/// components share the same context.
class VectorField {
  public:
    VectorField() = default;
    explicit VectorField(const Context &ctx) : comps_(ctx.n, Series(ctx)) {}
    explicit VectorField(std::vector<Series> comps);

    const Context &ctx() const { return comps_.at(0).ctx(); }
    int n() const { return int(comps_.size()); }
    const Series &operator[](int i) const { return comps_[i]; }
    Series &operator[](int i) { return comps_[i]; }
    const std::vector<Series> &comps() const { return comps_; }

    bool is_zero() const;
    int order() const; // min over components
    double max_abs() const;
    double majorant_norm(double r, double t) const; // max over components

    VectorField &operator+=(const VectorField &o);
    VectorField &operator-=(const VectorField &o);
    friend VectorField operator+(VectorField a, const VectorField &b) { return a += b; }
    friend VectorField operator-(VectorField a, const VectorField &b) { return a -= b; }
    VectorField operator-() const;
    VectorField &operator*=(cplx c);
    friend VectorField operator*(Series f, VectorField X); // f * X componentwise

    VectorField jet(int k) const;
    VectorField x_slice(int lo, int hi) const;

  private:
    std::vector<Series> comps_;
};

/// [X,Y]_i = X(Y_i) - Y(X_i), x-variables only.
VectorField lie_bracket(const VectorField &X, const VectorField &Y);
/// sum_i X_i df/dx_i.
Series lie_derivative(const VectorField &X, const Series &f);

/// Compositional inverse of Id + U (x-part, u frozen as parameters):
/// returns V with (Id+U) o (Id+V) = Id up to x-degree xmax.
VectorField invert_displacement(const VectorField &U);

/// Substitute the map x -> x + U into every component of a field:
/// result_i = F_i o (Id+U), u untouched.
VectorField compose_field(const VectorField &F, const VectorField &U);

} // namespace lpnf

#endif

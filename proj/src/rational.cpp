#include "lpnf/rational.hpp"
#include "lpnf/error.hpp"

#include <cstdlib>

namespace lpnf {

void Rational::normalize() {
    if (den_ == 0) throw std::domain_error("Rational: zero denominator");
    if (den_ < 0) {
        num_ = -num_;
        den_ = -den_;
    }
    long long g = std::gcd(std::llabs(num_), den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
    if (num_ == 0) den_ = 1;
}

Rational Rational::make_checked(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("Rational: zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    __int128 a = n < 0 ? -n : n, b = d;
    while (b) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    if (a > 1) {
        n /= a;
        d /= a;
    }
    constexpr __int128 lim = std::numeric_limits<long long>::max();
    if (n > lim || n < -lim || d > lim)
        throw std::overflow_error("Rational: overflow in exact arithmetic");
    Rational r;
    r.num_ = (long long)n;
    r.den_ = (long long)d;
    if (r.num_ == 0) r.den_ = 1;
    return r;
}

Rational Rational::parse(const std::string &s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(std::stoll(s));
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception &) {
        throw std::invalid_argument("Rational: cannot parse '" + s + "'");
    }
}

const char *errc_name(errc c) {
    switch (c) {
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::base_point_mismatch: return "BasePointMismatch";
    case errc::truncation_exceeded: return "TruncationExceeded";
    case errc::not_tangent_to_identity: return "NotTangentToIdentity";
    case errc::umax_too_small: return "UMaxTooSmall";
    case errc::zero_small_divisor: return "ZeroSmallDivisor";
    case errc::not_good_perturbation: return "NotGoodPerturbation";
    case errc::not_diagonal_linear: return "NotDiagonalLinear";
    case errc::not_in_span: return "NotInSpan";
    case errc::empty_ring: return "EmptyRing";
    case errc::no_nonzero_weights: return "NoNonzeroWeights";
    case errc::on_coordinate_hyperplane: return "OnCoordinateHyperplane";
    case errc::degenerate_up_to_mu_max: return "DegenerateUpToMuMax";
    case errc::epsilon_too_large: return "EpsilonTooLarge";
    case errc::non_positive_denominator: return "NonPositiveDenominator";
    case errc::schedule_not_diophantine: return "ScheduleNotDiophantine";
    case errc::precondition_violated: return "PreconditionViolated";
    case errc::not_symplectic_perturbation: return "NotSymplecticPerturbation";
    case errc::not_volume_preserving: return "NotVolumePreserving";
    case errc::flow_escaped_domain: return "FlowEscapedDomain";
    case errc::step_underflow: return "StepUnderflow";
    case errc::schema_error: return "SchemaError";
    }
    return "UnknownError";
}

} // namespace lpnf

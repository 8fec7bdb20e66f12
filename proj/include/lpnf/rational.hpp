#ifndef LPNF_RATIONAL_HPP
#define LPNF_RATIONAL_HPP

#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lpnf {

/// Exact rational on int64, normalized (den > 0, gcd = 1). Used only for
/// resonance decisions, where magnitudes stay desk-scale; products go through
/// __int128 and overflow throws rather than wrapping.
class Rational {
  public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) : num_(n), den_(d) { normalize(); }

    static Rational parse(const std::string &s); // "-3/7", "5", "0"

    long long num() const { return num_; }
    long long den() const { return den_; }
    bool is_zero() const { return num_ == 0; }
    double to_double() const { return double(num_) / double(den_); }

    friend Rational operator+(const Rational &a, const Rational &b) {
        return make_checked((__int128)a.num_ * b.den_ + (__int128)b.num_ * a.den_,
                            (__int128)a.den_ * b.den_);
    }
    friend Rational operator-(const Rational &a, const Rational &b) {
        return make_checked((__int128)a.num_ * b.den_ - (__int128)b.num_ * a.den_,
                            (__int128)a.den_ * b.den_);
    }
    friend Rational operator*(const Rational &a, const Rational &b) {
        return make_checked((__int128)a.num_ * b.num_, (__int128)a.den_ * b.den_);
    }
    Rational operator-() const { return Rational(-num_, den_); }
    friend bool operator==(const Rational &a, const Rational &b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

  private:
    static Rational make_checked(__int128 n, __int128 d);
    void normalize();
    long long num_, den_;
};

/// Gaussian rational re + i*im; supports the integer linear combinations
/// needed by weight zero-tests.
struct GaussianRational {
    Rational re, im;
    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
    friend GaussianRational operator+(const GaussianRational &a, const GaussianRational &b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend GaussianRational operator-(const GaussianRational &a, const GaussianRational &b) {
        return {a.re - b.re, a.im - b.im};
    }
    GaussianRational scaled(long long k) const { return {re * Rational(k), im * Rational(k)}; }
    friend bool operator==(const GaussianRational &a, const GaussianRational &b) {
        return a.re == b.re && a.im == b.im;
    }
};

} // namespace lpnf

#endif

#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tconn/errors.hpp"

namespace tconn {

using BigInt = boost::multiprecision::mpz_int;
using BigRat = boost::multiprecision::mpq_rational;

namespace detail {

inline double to_double(const BigRat& q) { return q.convert_to<double>(); }

// floor of the n-th root of a nonnegative integer, by bisection on bit length
inline BigInt nth_root_floor(const BigInt& v, int n) {
    if (v < 0 || n < 1) throw BadParameter("nth_root_floor");
    if (v == 0 || v == 1 || n == 1) return v;
    const unsigned bits = boost::multiprecision::msb(v) + 1;
    BigInt lo = 1, hi = BigInt(1) << (bits / n + 1);
    while (lo < hi) {
        BigInt mid = (lo + hi + 1) / 2;
        if (boost::multiprecision::pow(mid, n) <= v)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

// exact rational square root when one exists
inline std::optional<BigRat> sqrt_rational(const BigRat& q) {
    if (q < 0) return std::nullopt;
    BigInt num = numerator(q), den = denominator(q);
    BigInt rn = boost::multiprecision::sqrt(num);
    BigInt rd = boost::multiprecision::sqrt(den);
    if (rn * rn != num || rd * rd != den) return std::nullopt;
    return BigRat(rn, rd);
}

inline std::optional<BigRat> nth_root_rational(const BigRat& q, int n) {
    if (q < 0) return std::nullopt;
    BigInt num = numerator(q), den = denominator(q);
    BigInt rn = nth_root_floor(num, n);
    BigInt rd = nth_root_floor(den, n);
    if (boost::multiprecision::pow(rn, n) != num ||
        boost::multiprecision::pow(rd, n) != den)
        return std::nullopt;
    return BigRat(rn, rd);
}

// Gaussian integers, only what the n-th root reduction needs
struct GInt {
    BigInt re, im;
    BigInt norm() const { return re * re + im * im; }
    bool is_zero() const { return re == 0 && im == 0; }
};

inline GInt gmul(const GInt& a, const GInt& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

inline GInt gconj(const GInt& a) { return {a.re, -a.im}; }

inline BigInt round_div(const BigInt& a, const BigInt& b) {
    // nearest integer to a/b, b > 0
    BigInt twice = 2 * a + b;
    BigInt q = twice / (2 * b);
    if (twice < 0 && twice % (2 * b) != 0) --q;
    return q;
}

// nearest-lattice-point division, remainder norm < divisor norm
inline GInt gdiv_round(const GInt& a, const GInt& b) {
    GInt num = gmul(a, gconj(b));
    BigInt nb = b.norm();
    return {round_div(num.re, nb), round_div(num.im, nb)};
}

inline GInt ggcd(GInt a, GInt b) {
    while (!b.is_zero()) {
        GInt q = gdiv_round(a, b);
        GInt r = {a.re - (q.re * b.re - q.im * b.im),
                  a.im - (q.re * b.im + q.im * b.re)};
        a = b;
        b = r;
    }
    return a;
}

// exact Gaussian division, caller guarantees divisibility
inline GInt gdiv_exact(const GInt& a, const GInt& b) {
    GInt num = gmul(a, gconj(b));
    BigInt nb = b.norm();
    return {num.re / nb, num.im / nb};
}

inline BigRat round_to_dyadic(const BigRat& x, unsigned bits) {
    BigInt scaled = numerator(x) << bits;
    BigInt q = round_div(scaled, denominator(x));
    return BigRat(q, BigInt(1) << bits);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact coefficient field: Q(i), components stored as reduced big rationals.
// ---------------------------------------------------------------------------

class GaussianRational {
public:
    static constexpr bool is_exact = true;

    GaussianRational() : re_(0), im_(0) {}
    GaussianRational(BigRat re, BigRat im) : re_(std::move(re)), im_(std::move(im)) {}

    static GaussianRational zero() { return {}; }
    static GaussianRational one() { return from_int(1); }
    static GaussianRational i() { return {BigRat(0), BigRat(1)}; }
    static GaussianRational from_int(long long n) { return {BigRat(n), BigRat(0)}; }
    static GaussianRational from_ratio(long long num, long long den) {
        if (den == 0) throw DivByZero("zero denominator");
        return {BigRat(num, den), BigRat(0)};
    }

    const BigRat& re() const { return re_; }
    const BigRat& im() const { return im_; }

    bool is_zero() const { return re_ == 0 && im_ == 0; }
    BigRat norm2() const { return re_ * re_ + im_ * im_; }
    GaussianRational conj() const { return {re_, -im_}; }

    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
        return {a.re_ + b.re_, a.im_ + b.im_};
    }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
        return {a.re_ - b.re_, a.im_ - b.im_};
    }
    GaussianRational operator-() const { return {-re_, -im_}; }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
        return {a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_};
    }
    friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
        if (b.is_zero()) throw DivByZero();
        BigRat n = b.norm2();
        GaussianRational num = a * b.conj();
        return {num.re_ / n, num.im_ / n};
    }
    GaussianRational& operator+=(const GaussianRational& o) { return *this = *this + o; }
    GaussianRational& operator-=(const GaussianRational& o) { return *this = *this - o; }
    GaussianRational& operator*=(const GaussianRational& o) { return *this = *this * o; }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) {
        return !(a == b);
    }

    // (re, im) lexicographic order; fixes canonical branches deterministically
    bool lex_less(const GaussianRational& o) const {
        if (re_ != o.re_) return re_ < o.re_;
        return im_ < o.im_;
    }

    std::complex<double> to_complex() const {
        return {detail::to_double(re_), detail::to_double(im_)};
    }
    double modulus() const { return std::abs(to_complex()); }

    std::string str() const {
        return "(" + re_.str() + ", " + im_.str() + "i)";
    }

private:
    BigRat re_, im_;
};

inline bool approx_equal(const GaussianRational& a, const GaussianRational& b) {
    return a == b;
}

// ---------------------------------------------------------------------------
// Approximate coefficient field: complex doubles, equality up to a tolerance.
// ---------------------------------------------------------------------------

class ApproxComplex {
public:
    static constexpr bool is_exact = false;

    static double& default_tol() {
        static double tol = 1e-10;
        return tol;
    }

    ApproxComplex() : re_(0), im_(0), tol_(default_tol()) {}
    ApproxComplex(double re, double im) : re_(re), im_(im), tol_(default_tol()) {}
    ApproxComplex(double re, double im, double tol) : re_(re), im_(im), tol_(tol) {}

    static ApproxComplex zero() { return {}; }
    static ApproxComplex one() { return {1.0, 0.0}; }
    static ApproxComplex i() { return {0.0, 1.0}; }
    static ApproxComplex from_int(long long n) { return {double(n), 0.0}; }
    static ApproxComplex from_ratio(long long num, long long den) {
        if (den == 0) throw DivByZero("zero denominator");
        return {double(num) / double(den), 0.0};
    }

    double re() const { return re_; }
    double im() const { return im_; }
    double tol() const { return tol_; }

    bool is_zero() const { return std::hypot(re_, im_) <= tol_; }
    ApproxComplex conj() const { return {re_, -im_, tol_}; }

    friend ApproxComplex operator+(const ApproxComplex& a, const ApproxComplex& b) {
        return {a.re_ + b.re_, a.im_ + b.im_, std::max(a.tol_, b.tol_)};
    }
    friend ApproxComplex operator-(const ApproxComplex& a, const ApproxComplex& b) {
        return {a.re_ - b.re_, a.im_ - b.im_, std::max(a.tol_, b.tol_)};
    }
    ApproxComplex operator-() const { return {-re_, -im_, tol_}; }
    friend ApproxComplex operator*(const ApproxComplex& a, const ApproxComplex& b) {
        auto p = std::complex<double>(a.re_, a.im_) * std::complex<double>(b.re_, b.im_);
        return {p.real(), p.imag(), std::max(a.tol_, b.tol_)};
    }
    friend ApproxComplex operator/(const ApproxComplex& a, const ApproxComplex& b) {
        if (b.is_zero()) throw DivByZero();
        auto p = std::complex<double>(a.re_, a.im_) / std::complex<double>(b.re_, b.im_);
        return {p.real(), p.imag(), std::max(a.tol_, b.tol_)};
    }
    ApproxComplex& operator+=(const ApproxComplex& o) { return *this = *this + o; }
    ApproxComplex& operator-=(const ApproxComplex& o) { return *this = *this - o; }
    ApproxComplex& operator*=(const ApproxComplex& o) { return *this = *this * o; }

    friend bool operator==(const ApproxComplex& a, const ApproxComplex& b) {
        return std::hypot(a.re_ - b.re_, a.im_ - b.im_) <= std::max(a.tol_, b.tol_);
    }
    friend bool operator!=(const ApproxComplex& a, const ApproxComplex& b) {
        return !(a == b);
    }

    std::complex<double> to_complex() const { return {re_, im_}; }
    double modulus() const { return std::hypot(re_, im_); }

    std::string str() const {
        return "(" + std::to_string(re_) + ", " + std::to_string(im_) + "i)";
    }

private:
    double re_, im_, tol_;
};

// ---------------------------------------------------------------------------
// Roots
// ---------------------------------------------------------------------------

// Canonical square root: s*s == c with Re(s) > 0, or Re(s) = 0 and Im(s) > 0.
// Solved from x^2 - y^2 = Re(c), 2xy = Im(c) via the quadratic in x^2; only
// rational solutions are accepted.
inline GaussianRational sqrt_unit(const GaussianRational& c) {
    const BigRat& A = c.re();
    const BigRat& B = c.im();
    if (B == 0) {
        if (A == 0) return GaussianRational::zero();
        if (A > 0) {
            auto x = detail::sqrt_rational(A);
            if (!x) throw NotASquareInField();
            return {*x, BigRat(0)};
        }
        auto y = detail::sqrt_rational(-A);
        if (!y) throw NotASquareInField();
        return {BigRat(0), *y};
    }
    auto rho = detail::sqrt_rational(A * A + B * B);
    if (!rho) throw NotASquareInField();
    auto x = detail::sqrt_rational((A + *rho) / 2);
    if (!x || *x == 0) throw NotASquareInField();
    BigRat y = B / (2 * (*x));
    return {*x, y};  // x > 0, canonical branch
}

inline ApproxComplex sqrt_unit(const ApproxComplex& c) {
    auto s = std::sqrt(c.to_complex());
    if (s.real() < 0 || (s.real() == 0 && s.imag() < 0)) s = -s;
    return {s.real(), s.imag(), c.tol()};
}

namespace detail {

// One rounded-Newton run for X^n = c from a fixed numeric branch seed,
// snapped to the forced denominator D and verified exactly.
inline std::optional<GaussianRational> newton_root_candidate(
    const GaussianRational& c, int n, std::complex<double> seed, const BigInt& D) {
    if (seed != seed || !std::isfinite(seed.real()) || !std::isfinite(seed.imag()))
        return std::nullopt;
    GaussianRational X{BigRat(), BigRat()};
    {
        // dyadic start from the double seed
        auto enc = [](double v) {
            int e;
            double m = std::frexp(v, &e);
            long long mi = (long long)std::ldexp(m, 53);
            BigRat r(BigInt(mi), BigInt(1) << 53);
            if (e > 0)
                r *= BigRat(BigInt(1) << e, 1);
            else if (e < 0)
                r /= BigRat(BigInt(1) << (-e), 1);
            return r;
        };
        X = GaussianRational(enc(seed.real()), enc(seed.imag()));
    }
    const unsigned mag_bits =
        std::abs(seed) > 1 ? unsigned(std::log2(std::abs(seed))) + 2 : 2;
    const unsigned target = unsigned(msb(D + 1)) + mag_bits + 48;
    unsigned bits = 64;
    for (int iter = 0; iter < 24; ++iter) {
        // snap-and-check at the current precision
        GaussianRational cand(
            BigRat(round_div(numerator(X.re()) * D, denominator(X.re())), D),
            BigRat(round_div(numerator(X.im()) * D, denominator(X.im())), D));
        GaussianRational p = cand;
        for (int k = 1; k < n; ++k) p = p * cand;
        if (p == c) return cand;
        if (bits >= target && iter > 8) break;
        // X <- ((n-1)X + c / X^{n-1}) / n, rounded to the working precision
        GaussianRational xp = X;
        for (int k = 2; k < n; ++k) xp = xp * X;
        if (xp.is_zero()) return std::nullopt;
        GaussianRational next =
            (GaussianRational::from_int(n - 1) * X + c / xp) /
            GaussianRational::from_int(n);
        bits = std::min(2 * bits, target + 16);
        X = GaussianRational(round_to_dyadic(next.re(), bits),
                             round_to_dyadic(next.im(), bits));
    }
    return std::nullopt;
}

}  // namespace detail

// Canonical n-th root in Q(i), or RootNotInField when none exists there.
// Complete: a root p'/q' in lowest terms forces N(q')^n = N(q) for the reduced
// denominator q of c, so its components are integers over D = N(q)^{1/n}; each
// numeric branch is refined by rounded Newton and verified exactly.
inline GaussianRational nth_root_unit(const GaussianRational& c, int n) {
    if (n < 1) throw BadParameter("nth_root_unit: n < 1");
    if (c.is_zero()) return GaussianRational::zero();
    if (n == 1) return c;
    if (n == 2) return sqrt_unit(c);

    using namespace detail;
    BigInt L = boost::multiprecision::lcm(denominator(c.re()), denominator(c.im()));
    GInt G{numerator(c.re()) * (L / denominator(c.re())),
           numerator(c.im()) * (L / denominator(c.im()))};
    GInt Q{L, 0};
    GInt g = ggcd(G, Q);
    Q = gdiv_exact(Q, g);
    BigInt NQ = Q.norm();
    BigInt D = nth_root_floor(NQ, n);
    if (boost::multiprecision::pow(D, n) != NQ) throw RootNotInField();

    std::complex<double> cz = c.to_complex();
    double mod = std::pow(std::abs(cz), 1.0 / n);
    double arg = std::arg(cz);
    std::optional<GaussianRational> best;
    for (int j = 0; j < n; ++j) {
        auto seed = std::polar(mod, (arg + 2 * M_PI * j) / n);
        auto cand = newton_root_candidate(c, n, seed, D);
        if (cand && (!best || best->lex_less(*cand))) best = cand;
    }
    if (!best) throw RootNotInField();
    return *best;
}

inline ApproxComplex nth_root_unit(const ApproxComplex& c, int n) {
    if (n < 1) throw BadParameter("nth_root_unit: n < 1");
    if (c.is_zero()) return ApproxComplex::zero();
    auto z = c.to_complex();
    auto s = std::polar(std::pow(std::abs(z), 1.0 / n), std::arg(z) / n);
    return {s.real(), s.imag(), c.tol()};
}

// ---------------------------------------------------------------------------
// Root-of-unity comparison: is u = e^{2 pi i m / r}?
// ---------------------------------------------------------------------------

// Exact field: the only roots of unity in Q(i) are {1, -1, i, -i}; a reduced
// order outside {1, 2, 4} can never equal a field element.
inline bool equals_primitive_root_power(const GaussianRational& u, int r, long long m) {
    if (r < 1) throw BadParameter("equals_primitive_root_power: r < 1");
    long long mm = ((m % r) + r) % r;
    long long g = std::gcd(mm, (long long)r);
    long long d = r / g;
    if (d == 1) return u == GaussianRational::one();
    if (d == 2) return u == -GaussianRational::one();
    if (d == 4) {
        long long mp = mm / g;  // 1 or 3
        return u == (mp == 1 ? GaussianRational::i() : -GaussianRational::i());
    }
    return false;
}

inline bool equals_primitive_root_power(const ApproxComplex& u, int r, long long m) {
    if (r < 1) throw BadParameter("equals_primitive_root_power: r < 1");
    long long mm = ((m % r) + r) % r;
    auto target = std::polar(1.0, 2 * M_PI * double(mm) / double(r));
    return std::abs(u.to_complex() - target) <= u.tol();
}

}  // namespace tconn

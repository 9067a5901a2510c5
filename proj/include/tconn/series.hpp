#pragma once

#include <algorithm>
#include <cassert>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tconn/errors.hpp"
#include "tconn/field.hpp"

namespace tconn {

enum class Var { t1, t2, z };

// Per-variable truncation bounds (inclusive max degrees). Fixed for the
// lifetime of a computation; every operand of a binary operation must agree.
struct Orders {
    int t1 = 0, t2 = 0, z = 0;
    friend bool operator==(const Orders&, const Orders&) = default;
    int of(Var v) const { return v == Var::t1 ? t1 : v == Var::t2 ? t2 : z; }
};

// Degrees up to which the stored coefficients agree with the untruncated
// object. Derivatives and monomial divisions shrink these; identity checks
// are only meaningful inside them.
struct Reliability {
    int t1 = 0, t2 = 0, z = 0;
    static Reliability full(const Orders& o) { return {o.t1, o.t2, o.z}; }
    Reliability meet(const Reliability& o) const {
        return {std::min(t1, o.t1), std::min(t2, o.t2), std::min(z, o.z)};
    }
    int& of(Var v) { return v == Var::t1 ? t1 : v == Var::t2 ? t2 : z; }
    int of(Var v) const { return v == Var::t1 ? t1 : v == Var::t2 ? t2 : z; }
    friend bool operator==(const Reliability&, const Reliability&) = default;
};

template <class F>
class TruncSeries {
public:
    TruncSeries() : TruncSeries(Orders{}) {}
    explicit TruncSeries(const Orders& o)
        : ord_(o),
          rel_(Reliability::full(o)),
          c_(std::size_t(o.t1 + 1) * (o.t2 + 1) * (o.z + 1), F::zero()) {}

    static TruncSeries zero(const Orders& o) { return TruncSeries(o); }
    static TruncSeries constant(const Orders& o, const F& v) {
        TruncSeries s(o);
        s.at(0, 0, 0) = v;
        return s;
    }
    static TruncSeries one(const Orders& o) { return constant(o, F::one()); }
    static TruncSeries monomial(const Orders& o, int k1, int k2, int kz, const F& v) {
        TruncSeries s(o);
        if (k1 > o.t1 || k2 > o.t2 || kz > o.z) throw IndexError("monomial degree out of range");
        s.at(k1, k2, kz) = v;
        return s;
    }

    const Orders& orders() const { return ord_; }
    const Reliability& rel() const { return rel_; }
    void set_rel(const Reliability& r) { rel_ = r; }

    F& at(int k1, int k2, int kz) { return c_[idx(k1, k2, kz)]; }
    const F& at(int k1, int k2, int kz) const { return c_[idx(k1, k2, kz)]; }

    bool depends_on(Var v) const {
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int k2 = 0; k2 <= ord_.t2; ++k2)
                for (int kz = 0; kz <= ord_.z; ++kz) {
                    int d = v == Var::t1 ? k1 : v == Var::t2 ? k2 : kz;
                    if (d > 0 && !at(k1, k2, kz).is_zero()) return true;
                }
        return false;
    }
    bool depends_on_reliable(Var v) const {
        for (int k1 = 0; k1 <= std::min(ord_.t1, rel_.t1); ++k1)
            for (int k2 = 0; k2 <= std::min(ord_.t2, rel_.t2); ++k2)
                for (int kz = 0; kz <= std::min(ord_.z, rel_.z); ++kz) {
                    int d = v == Var::t1 ? k1 : v == Var::t2 ? k2 : kz;
                    if (d > 0 && !at(k1, k2, kz).is_zero()) return true;
                }
        return false;
    }
    bool t2_only() const { return !depends_on(Var::t1) && !depends_on(Var::z); }

    // drop all positive t1-degrees; for data known to be t1-independent this
    // removes truncation garbage outside the reliable box
    TruncSeries without_t1() const {
        TruncSeries r(ord_);
        for (int k2 = 0; k2 <= ord_.t2; ++k2)
            for (int kz = 0; kz <= ord_.z; ++kz) r.at(0, k2, kz) = at(0, k2, kz);
        r.rel_ = rel_;
        r.rel_.t1 = ord_.t1;
        return r;
    }

    bool is_zero_full() const {
        for (const auto& v : c_)
            if (!v.is_zero()) return false;
        return true;
    }
    bool is_zero_reliable() const {
        for (int k1 = 0; k1 <= std::min(ord_.t1, rel_.t1); ++k1)
            for (int k2 = 0; k2 <= std::min(ord_.t2, rel_.t2); ++k2)
                for (int kz = 0; kz <= std::min(ord_.z, rel_.z); ++kz)
                    if (!at(k1, k2, kz).is_zero()) return false;
        return true;
    }
    double max_modulus_reliable() const {
        double m = 0;
        for (int k1 = 0; k1 <= std::min(ord_.t1, rel_.t1); ++k1)
            for (int k2 = 0; k2 <= std::min(ord_.t2, rel_.t2); ++k2)
                for (int kz = 0; kz <= std::min(ord_.z, rel_.z); ++kz)
                    m = std::max(m, at(k1, k2, kz).modulus());
        return m;
    }

    // full-grid coefficientwise equality (exact, or within tol per field)
    friend bool operator==(const TruncSeries& a, const TruncSeries& b) {
        if (a.ord_ != b.ord_) return false;
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            if (a.c_[i] != b.c_[i]) return false;
        return true;
    }
    friend bool operator!=(const TruncSeries& a, const TruncSeries& b) { return !(a == b); }

    friend TruncSeries operator+(const TruncSeries& a, const TruncSeries& b) {
        a.check_orders(b);
        TruncSeries r(a.ord_);
        for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = a.c_[i] + b.c_[i];
        r.rel_ = a.rel_.meet(b.rel_);
        return r;
    }
    friend TruncSeries operator-(const TruncSeries& a, const TruncSeries& b) {
        a.check_orders(b);
        TruncSeries r(a.ord_);
        for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = a.c_[i] - b.c_[i];
        r.rel_ = a.rel_.meet(b.rel_);
        return r;
    }
    TruncSeries operator-() const {
        TruncSeries r(ord_);
        for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] = -c_[i];
        r.rel_ = rel_;
        return r;
    }

    friend TruncSeries operator*(const TruncSeries& a, const TruncSeries& b) {
        a.check_orders(b);
        TruncSeries r(a.ord_);
        // zero-skipping dense convolution; most series touch one t1 plane only
        auto nza = a.nonzero_indices();
        auto nzb = b.nonzero_indices();
        for (auto [a1, a2, az] : nza) {
            const F& ca = a.at(a1, a2, az);
            for (auto [b1, b2, bz] : nzb) {
                int k1 = a1 + b1, k2 = a2 + b2, kz = az + bz;
                if (k1 > a.ord_.t1 || k2 > a.ord_.t2 || kz > a.ord_.z) continue;
                r.at(k1, k2, kz) += ca * b.at(b1, b2, bz);
            }
        }
        r.rel_ = a.rel_.meet(b.rel_);
        return r;
    }

    TruncSeries scaled(const F& v) const {
        TruncSeries r(ord_);
        for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] = c_[i] * v;
        r.rel_ = rel_;
        return r;
    }

    // formal partial derivative; top retained degree in `v` becomes unreliable
    TruncSeries derivative(Var v) const {
        TruncSeries r(ord_);
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int k2 = 0; k2 <= ord_.t2; ++k2)
                for (int kz = 0; kz <= ord_.z; ++kz) {
                    int d = v == Var::t1 ? k1 : v == Var::t2 ? k2 : kz;
                    if (d + 1 > ord_.of(v)) continue;
                    int s1 = k1 + (v == Var::t1), s2 = k2 + (v == Var::t2),
                        sz = kz + (v == Var::z);
                    r.at(k1, k2, kz) = at(s1, s2, sz) * F::from_int(d + 1);
                }
        r.rel_ = rel_;
        r.rel_.of(v) = rel_.of(v) - 1;
        return r;
    }

    // antiderivative in t2 with given constant term; gains one reliable degree
    TruncSeries antiderivative_t2(const F& c0) const {
        TruncSeries r(ord_);
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int kz = 0; kz <= ord_.z; ++kz)
                for (int k2 = 0; k2 < ord_.t2; ++k2)
                    r.at(k1, k2 + 1, kz) = at(k1, k2, kz) / F::from_int(k2 + 1);
        r.at(0, 0, 0) = c0;
        r.rel_ = rel_;
        r.rel_.t2 = std::min(ord_.t2, rel_.t2 + 1);
        return r;
    }

    // f(k): the z-independent coefficient series of z^k
    TruncSeries z_slice(int k) const {
        if (k < 0 || k > ord_.z) throw IndexError("z_slice out of range");
        TruncSeries r(ord_);
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int k2 = 0; k2 <= ord_.t2; ++k2) r.at(k1, k2, 0) = at(k1, k2, k);
        r.rel_ = rel_;
        r.rel_.z = ord_.z;
        if (k > rel_.z) r.rel_ = {-1, -1, -1};
        return r;
    }

    void set_z_slice(int k, const TruncSeries& slice) {
        if (k < 0 || k > ord_.z) throw IndexError("set_z_slice out of range");
        check_orders(slice);
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int k2 = 0; k2 <= ord_.t2; ++k2) at(k1, k2, k) = slice.at(k1, k2, 0);
        rel_.t1 = std::min(rel_.t1, slice.rel_.t1);
        rel_.t2 = std::min(rel_.t2, slice.rel_.t2);
    }

    // multiply by a power of one variable (degrees shift up, nothing lost
    // below the cutoff; reliability shifts with them)
    TruncSeries shift_up(Var v, int k) const {
        if (k < 0) throw BadParameter("shift_up: negative power");
        TruncSeries r(ord_);
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int k2 = 0; k2 <= ord_.t2; ++k2)
                for (int kz = 0; kz <= ord_.z; ++kz) {
                    int d1 = k1 + (v == Var::t1 ? k : 0),
                        d2 = k2 + (v == Var::t2 ? k : 0),
                        dz = kz + (v == Var::z ? k : 0);
                    if (d1 > ord_.t1 || d2 > ord_.t2 || dz > ord_.z) continue;
                    r.at(d1, d2, dz) = at(k1, k2, kz);
                }
        r.rel_ = rel_;
        r.rel_.of(v) = std::min(ord_.of(v), rel_.of(v) + k);
        return r;
    }

    // divide by z^k assuming the low z-slices vanish; the freed top slices are
    // zero-filled and flagged unreliable
    TruncSeries z_shift_down(int k = 1) const {
        TruncSeries r(ord_);
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int k2 = 0; k2 <= ord_.t2; ++k2)
                for (int kz = 0; kz + k <= ord_.z; ++kz)
                    r.at(k1, k2, kz) = at(k1, k2, kz + k);
        r.rel_ = rel_;
        r.rel_.z = rel_.z - k;
        return r;
    }

    // s / t2^k, requiring all t2^j coefficients with j < k to vanish
    TruncSeries div_by_t2_power(int k) const {
        if (k < 0) throw BadParameter("div_by_t2_power: negative power");
        for (int k2 = 0; k2 < std::min(k, ord_.t2 + 1); ++k2)
            for (int k1 = 0; k1 <= ord_.t1; ++k1)
                for (int kz = 0; kz <= ord_.z; ++kz)
                    if (!at(k1, k2, kz).is_zero())
                        throw NotDivisible(k2, at(k1, k2, kz).str());
        if (k > ord_.t2 + 1) throw NotDivisible(ord_.t2 + 1, "beyond grid");
        TruncSeries r(ord_);
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int k2 = 0; k2 + k <= ord_.t2; ++k2)
                for (int kz = 0; kz <= ord_.z; ++kz)
                    r.at(k1, k2, kz) = at(k1, k2 + k, kz);
        r.rel_ = rel_;
        r.rel_.t2 = rel_.t2 - k;
        return r;
    }

    // q with q*u = s up to truncation; u must have a unit constant term
    TruncSeries div_by_unit(const TruncSeries& u) const {
        check_orders(u);
        const F& u0 = u.at(0, 0, 0);
        if (u0.is_zero()) throw NotAUnit();
        TruncSeries q(ord_);
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int k2 = 0; k2 <= ord_.t2; ++k2)
                for (int kz = 0; kz <= ord_.z; ++kz) {
                    F acc = at(k1, k2, kz);
                    for (int d1 = 0; d1 <= k1; ++d1)
                        for (int d2 = 0; d2 <= k2; ++d2)
                            for (int dz = 0; dz <= kz; ++dz) {
                                if (d1 == 0 && d2 == 0 && dz == 0) continue;
                                const F& uv = u.at(d1, d2, dz);
                                if (uv.is_zero()) continue;
                                acc -= uv * q.at(k1 - d1, k2 - d2, kz - dz);
                            }
                    q.at(k1, k2, kz) = acc / u0;
                }
        q.rel_ = rel_.meet(u.rel_);
        return q;
    }

    // w with w^2 = s; constant term on the canonical branch
    TruncSeries sqrt_unit_series() const {
        const F& s0 = at(0, 0, 0);
        if (s0.is_zero()) throw NotAUnit("sqrt of a non-unit series");
        TruncSeries w(ord_);
        F w0 = sqrt_unit(s0);
        w.at(0, 0, 0) = w0;
        F two_w0 = w0 + w0;
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int k2 = 0; k2 <= ord_.t2; ++k2)
                for (int kz = 0; kz <= ord_.z; ++kz) {
                    if (k1 == 0 && k2 == 0 && kz == 0) continue;
                    F acc = at(k1, k2, kz);
                    for (int d1 = 0; d1 <= k1; ++d1)
                        for (int d2 = 0; d2 <= k2; ++d2)
                            for (int dz = 0; dz <= kz; ++dz) {
                                if (d1 == 0 && d2 == 0 && dz == 0) continue;
                                if (d1 == k1 && d2 == k2 && dz == kz) continue;
                                const F& wv = w.at(d1, d2, dz);
                                if (wv.is_zero()) continue;
                                acc -= wv * w.at(k1 - d1, k2 - d2, kz - dz);
                            }
                    w.at(k1, k2, kz) = acc / two_w0;
                }
        w.rel_ = rel_;
        return w;
    }

    // w with w^n = s (used for the (r+2)-th roots in the sqrt-power solver)
    TruncSeries nth_root_series(int n) const {
        if (n < 1) throw BadParameter("nth_root_series: n < 1");
        if (n == 1) return *this;
        if (n == 2) return sqrt_unit_series();
        const F& s0 = at(0, 0, 0);
        if (s0.is_zero()) throw NotAUnit("n-th root of a non-unit series");
        TruncSeries w = zero(ord_);
        F w0 = nth_root_unit(s0, n);
        w.at(0, 0, 0) = w0;
        F lead = F::one();
        for (int k = 1; k < n; ++k) lead = lead * w0;
        lead = lead * F::from_int(n);  // n * w0^{n-1}
        // total-degree staging keeps the update triangular
        int maxdeg = ord_.t1 + ord_.t2 + ord_.z;
        for (int deg = 1; deg <= maxdeg; ++deg) {
            TruncSeries p = w.pow(n);
            for (int k1 = 0; k1 <= ord_.t1; ++k1)
                for (int k2 = 0; k2 <= ord_.t2; ++k2)
                    for (int kz = 0; kz <= ord_.z; ++kz) {
                        if (k1 + k2 + kz != deg) continue;
                        w.at(k1, k2, kz) = (at(k1, k2, kz) - p.at(k1, k2, kz)) / lead;
                    }
        }
        w.rel_ = rel_;
        return w;
    }

    TruncSeries pow(int n) const {
        TruncSeries r = one(ord_);
        r.rel_ = rel_;
        for (int k = 0; k < n; ++k) r = r * (*this);
        return r;
    }

    // substitute t2 -> lam(t2); lam must depend only on t2 and vanish at 0
    TruncSeries compose_t2(const TruncSeries& lam) const {
        check_orders(lam);
        if (!lam.t2_only() || !lam.at(0, 0, 0).is_zero())
            throw NotComposable("compose_t2 needs lam = lam(t2) with lam(0) = 0");
        std::vector<TruncSeries> lam_pow;
        lam_pow.push_back(one(ord_));
        for (int j = 1; j <= ord_.t2; ++j) lam_pow.push_back(lam_pow.back() * lam);
        TruncSeries r = zero(ord_);
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int kz = 0; kz <= ord_.z; ++kz)
                for (int k2 = 0; k2 <= ord_.t2; ++k2) {
                    const F& v = at(k1, k2, kz);
                    if (v.is_zero()) continue;
                    const TruncSeries& lp = lam_pow[k2];
                    for (int j = 0; j <= ord_.t2; ++j) {
                        const F& w = lp.at(0, j, 0);
                        if (w.is_zero()) continue;
                        r.at(k1, j, kz) += v * w;
                    }
                }
        r.rel_ = rel_;
        r.rel_.t2 = std::min(rel_.t2, lam.rel_.t2);
        return r;
    }

    // compositional inverse: mu with lam(mu(t2)) = t2
    TruncSeries revert() const {
        if (!t2_only() || !at(0, 0, 0).is_zero())
            throw NotInvertible("revert needs lam = lam(t2) with lam(0) = 0");
        const F& l1 = at(0, 1, 0);
        if (l1.is_zero()) throw NotInvertible("revert needs lam'(0) != 0");
        TruncSeries mu = zero(ord_);
        mu.at(0, 1, 0) = F::one() / l1;
        for (int d = 2; d <= ord_.t2; ++d) {
            TruncSeries err = this->compose_t2(mu);
            mu.at(0, d, 0) = -err.at(0, d, 0) / l1;
        }
        mu.rel_ = rel_;
        return mu;
    }

    // drop every t2-degree above maxdeg (maxdeg = -1 clears the series); the
    // result is polynomial data, reliable on the full grid when the kept
    // degrees were reliable
    TruncSeries t2_truncated(int maxdeg) const {
        TruncSeries r(ord_);
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int k2 = 0; k2 <= std::min(maxdeg, ord_.t2); ++k2)
                for (int kz = 0; kz <= ord_.z; ++kz) r.at(k1, k2, kz) = at(k1, k2, kz);
        r.rel_ = rel_;
        if (rel_.t2 >= maxdeg) r.rel_.t2 = ord_.t2;
        return r;
    }

    // smallest t2-exponent with a nonzero coefficient; nullopt = all retained
    // coefficients vanish (truncation cannot certify a true infinite order)
    std::optional<int> ord_t2() const {
        if (!t2_only()) throw BadInput("ord_t2 needs a series in t2 only");
        for (int j = 0; j <= ord_.t2; ++j)
            if (!at(0, j, 0).is_zero()) return j;
        return std::nullopt;
    }

    std::vector<std::array<int, 3>> nonzero_indices() const {
        std::vector<std::array<int, 3>> out;
        for (int k1 = 0; k1 <= ord_.t1; ++k1)
            for (int k2 = 0; k2 <= ord_.t2; ++k2)
                for (int kz = 0; kz <= ord_.z; ++kz)
                    if (!at(k1, k2, kz).is_zero()) out.push_back({k1, k2, kz});
        return out;
    }

    std::string str(int max_terms = 12) const {
        std::ostringstream os;
        int shown = 0;
        for (int kz = 0; kz <= ord_.z && shown < max_terms; ++kz)
            for (int k1 = 0; k1 <= ord_.t1 && shown < max_terms; ++k1)
                for (int k2 = 0; k2 <= ord_.t2 && shown < max_terms; ++k2) {
                    const F& v = at(k1, k2, kz);
                    if (v.is_zero()) continue;
                    if (shown) os << " + ";
                    os << v.str();
                    if (k1) os << "*t1^" << k1;
                    if (k2) os << "*t2^" << k2;
                    if (kz) os << "*z^" << kz;
                    ++shown;
                }
        if (!shown) os << "0";
        return os.str();
    }

private:
    std::size_t idx(int k1, int k2, int kz) const {
        assert(k1 >= 0 && k1 <= ord_.t1 && k2 >= 0 && k2 <= ord_.t2 && kz >= 0 &&
               kz <= ord_.z);
        return (std::size_t(k1) * (ord_.t2 + 1) + k2) * (ord_.z + 1) + kz;
    }
    void check_orders(const TruncSeries& o) const {
        if (!(ord_ == o.ord_)) throw OrderMismatch();
    }

    Orders ord_;
    Reliability rel_;
    std::vector<F> c_;
};

// equality restricted to the joint reliable box
template <class F>
bool equals_reliable(const TruncSeries<F>& a, const TruncSeries<F>& b) {
    if (!(a.orders() == b.orders())) throw OrderMismatch();
    Reliability r = a.rel().meet(b.rel());
    for (int k1 = 0; k1 <= std::min(a.orders().t1, r.t1); ++k1)
        for (int k2 = 0; k2 <= std::min(a.orders().t2, r.t2); ++k2)
            for (int kz = 0; kz <= std::min(a.orders().z, r.z); ++kz)
                if (a.at(k1, k2, kz) != b.at(k1, k2, kz)) return false;
    return true;
}

template <class F>
double max_modulus_diff_reliable(const TruncSeries<F>& a, const TruncSeries<F>& b) {
    if (!(a.orders() == b.orders())) throw OrderMismatch();
    Reliability r = a.rel().meet(b.rel());
    double m = 0;
    for (int k1 = 0; k1 <= std::min(a.orders().t1, r.t1); ++k1)
        for (int k2 = 0; k2 <= std::min(a.orders().t2, r.t2); ++k2)
            for (int kz = 0; kz <= std::min(a.orders().z, r.z); ++kz)
                m = std::max(m, (a.at(k1, k2, kz) - b.at(k1, k2, kz)).modulus());
    return m;
}

}  // namespace tconn

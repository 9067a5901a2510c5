#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tconn/errors.hpp"
#include "tconn/series.hpp"

namespace tconn {

// The two irreducible 2-dimensional germs: I2(m) has d2 o d2 = t2^{m-2} d1,
// N2 has d2 o d2 = 0.
struct Germ {
    enum class Kind { I2, N2 };
    Kind kind = Kind::N2;
    int m = 0;  // only for I2, m >= 3

    static Germ I2(int m) {
        if (m < 3) throw BadParameter("I2 germ needs m >= 3");
        return {Kind::I2, m};
    }
    static Germ N2() { return {Kind::N2, 0}; }
    bool is_i2() const { return kind == Kind::I2; }
    friend bool operator==(const Germ&, const Germ&) = default;
    std::string str() const {
        return is_i2() ? "I2(" + std::to_string(m) + ")" : "N2";
    }
};

template <class F>
class Mat2Series {
public:
    Mat2Series() = default;
    explicit Mat2Series(const Orders& o)
        : e_{TruncSeries<F>(o), TruncSeries<F>(o), TruncSeries<F>(o), TruncSeries<F>(o)} {}

    static Mat2Series zeros(const Orders& o) { return Mat2Series(o); }
    static Mat2Series identity(const Orders& o) {
        Mat2Series m(o);
        m.at(1, 1) = TruncSeries<F>::one(o);
        m.at(2, 2) = TruncSeries<F>::one(o);
        return m;
    }
    static Mat2Series from_entries(TruncSeries<F> a11, TruncSeries<F> a12,
                                   TruncSeries<F> a21, TruncSeries<F> a22) {
        Mat2Series m(a11.orders());
        m.at(1, 1) = std::move(a11);
        m.at(1, 2) = std::move(a12);
        m.at(2, 1) = std::move(a21);
        m.at(2, 2) = std::move(a22);
        return m;
    }

    const Orders& orders() const { return e_[0].orders(); }

    TruncSeries<F>& at(int i, int j) { return e_[(i - 1) * 2 + (j - 1)]; }
    const TruncSeries<F>& at(int i, int j) const { return e_[(i - 1) * 2 + (j - 1)]; }

    friend Mat2Series operator+(const Mat2Series& a, const Mat2Series& b) {
        Mat2Series r(a.orders());
        for (int k = 0; k < 4; ++k) r.e_[k] = a.e_[k] + b.e_[k];
        return r;
    }
    friend Mat2Series operator-(const Mat2Series& a, const Mat2Series& b) {
        Mat2Series r(a.orders());
        for (int k = 0; k < 4; ++k) r.e_[k] = a.e_[k] - b.e_[k];
        return r;
    }
    Mat2Series operator-() const {
        Mat2Series r(orders());
        for (int k = 0; k < 4; ++k) r.e_[k] = -e_[k];
        return r;
    }
    friend Mat2Series operator*(const Mat2Series& a, const Mat2Series& b) {
        Mat2Series r(a.orders());
        for (int i = 1; i <= 2; ++i)
            for (int j = 1; j <= 2; ++j)
                r.at(i, j) = a.at(i, 1) * b.at(1, j) + a.at(i, 2) * b.at(2, j);
        return r;
    }
    Mat2Series scaled(const TruncSeries<F>& s) const {
        Mat2Series r(orders());
        for (int k = 0; k < 4; ++k) r.e_[k] = e_[k] * s;
        return r;
    }
    Mat2Series scaled(const F& v) const {
        Mat2Series r(orders());
        for (int k = 0; k < 4; ++k) r.e_[k] = e_[k].scaled(v);
        return r;
    }
    friend bool operator==(const Mat2Series& a, const Mat2Series& b) {
        return a.e_[0] == b.e_[0] && a.e_[1] == b.e_[1] && a.e_[2] == b.e_[2] &&
               a.e_[3] == b.e_[3];
    }
    friend bool operator!=(const Mat2Series& a, const Mat2Series& b) { return !(a == b); }

    Mat2Series derivative(Var v) const {
        Mat2Series r(orders());
        for (int k = 0; k < 4; ++k) r.e_[k] = e_[k].derivative(v);
        return r;
    }
    Mat2Series shift_up(Var v, int k) const {
        Mat2Series r(orders());
        for (int q = 0; q < 4; ++q) r.e_[q] = e_[q].shift_up(v, k);
        return r;
    }
    Mat2Series z_shift_down(int k = 1) const {
        Mat2Series r(orders());
        for (int q = 0; q < 4; ++q) r.e_[q] = e_[q].z_shift_down(k);
        return r;
    }
    Mat2Series z_slice(int k) const {
        Mat2Series r(orders());
        for (int q = 0; q < 4; ++q) r.e_[q] = e_[q].z_slice(k);
        return r;
    }
    Mat2Series compose_t2(const TruncSeries<F>& lam) const {
        Mat2Series r(orders());
        for (int q = 0; q < 4; ++q) r.e_[q] = e_[q].compose_t2(lam);
        return r;
    }

    TruncSeries<F> det() const {
        return at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1);
    }
    Mat2Series adjugate() const {
        Mat2Series r(orders());
        r.at(1, 1) = at(2, 2);
        r.at(1, 2) = -at(1, 2);
        r.at(2, 1) = -at(2, 1);
        r.at(2, 2) = at(1, 1);
        return r;
    }
    // adj(T)/det(T); needs only det(T)(0,0,0) != 0
    Mat2Series inverse() const {
        TruncSeries<F> d = det();
        if (d.at(0, 0, 0).is_zero()) throw NotInvertible("singular leading matrix");
        TruncSeries<F> dinv = TruncSeries<F>::one(orders()).div_by_unit(d);
        return adjugate().scaled(dinv);
    }
    bool invertible_at_origin() const { return !det().at(0, 0, 0).is_zero(); }

    bool is_zero_reliable() const {
        for (int k = 0; k < 4; ++k)
            if (!e_[k].is_zero_reliable()) return false;
        return true;
    }
    double max_modulus_reliable() const {
        double m = 0;
        for (int k = 0; k < 4; ++k) m = std::max(m, e_[k].max_modulus_reliable());
        return m;
    }
    Reliability rel() const {
        return e_[0].rel().meet(e_[1].rel()).meet(e_[2].rel()).meet(e_[3].rel());
    }
    void set_rel(const Reliability& r) {
        for (int k = 0; k < 4; ++k) e_[k].set_rel(r);
    }

    std::string str() const {
        return "[[" + at(1, 1).str() + ", " + at(1, 2).str() + "], [" +
               at(2, 1).str() + ", " + at(2, 2).str() + "]]";
    }

private:
    std::array<TruncSeries<F>, 4> e_;
};

template <class F>
bool equals_reliable(const Mat2Series<F>& a, const Mat2Series<F>& b) {
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
            if (!equals_reliable(a.at(i, j), b.at(i, j))) return false;
    return true;
}

template <class F>
double max_modulus_diff_reliable(const Mat2Series<F>& a, const Mat2Series<F>& b) {
    double m = 0;
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
            m = std::max(m, max_modulus_diff_reliable(a.at(i, j), b.at(i, j)));
    return m;
}

// ---------------------------------------------------------------------------
// The basis matrices C1, C2, D, E and the germ-dependent decomposition
// ---------------------------------------------------------------------------

// t2^{m-2} for I2(m), identically 0 for N2
template <class F>
TruncSeries<F> germ_weight(const Germ& g, const Orders& o) {
    if (!g.is_i2()) return TruncSeries<F>::zero(o);
    if (g.m - 2 > o.t2) return TruncSeries<F>::zero(o);  // beyond the grid
    return TruncSeries<F>::monomial(o, 0, g.m - 2, 0, F::one());
}

template <class F>
Mat2Series<F> basis_c1(const Orders& o) {
    return Mat2Series<F>::identity(o);
}

template <class F>
Mat2Series<F> basis_c2(const Germ& g, const Orders& o) {
    Mat2Series<F> m(o);
    m.at(1, 2) = germ_weight<F>(g, o);
    m.at(2, 1) = TruncSeries<F>::one(o);
    return m;
}

template <class F>
Mat2Series<F> basis_d(const Orders& o) {
    Mat2Series<F> m(o);
    m.at(1, 1) = TruncSeries<F>::one(o);
    m.at(2, 2) = -TruncSeries<F>::one(o);
    return m;
}

template <class F>
Mat2Series<F> basis_e(const Orders& o) {
    Mat2Series<F> m(o);
    m.at(1, 2) = TruncSeries<F>::one(o);
    return m;
}

template <class F>
struct CdeParts {
    TruncSeries<F> c1, c2, d, e;
};

// M = tau1*C1 + tau2*C2 + tau3*D + tau4*E, O-basis coordinates:
//   tau2 = m21, tau1 = (m11+m22)/2, tau3 = (m11-m22)/2,
//   tau4 = m12 - tau2 * t2^{m-2}   (the last term drops for N2)
template <class F>
CdeParts<F> cde_decompose(const Mat2Series<F>& M, const Germ& g) {
    const Orders& o = M.orders();
    F half = F::one() / F::from_int(2);
    CdeParts<F> p{TruncSeries<F>(o), TruncSeries<F>(o), TruncSeries<F>(o),
                  TruncSeries<F>(o)};
    p.c2 = M.at(2, 1);
    p.c1 = (M.at(1, 1) + M.at(2, 2)).scaled(half);
    p.d = (M.at(1, 1) - M.at(2, 2)).scaled(half);
    p.e = M.at(1, 2) - p.c2 * germ_weight<F>(g, o);
    return p;
}

template <class F>
Mat2Series<F> cde_recompose(const CdeParts<F>& p, const Germ& g) {
    const Orders& o = p.c1.orders();
    return basis_c1<F>(o).scaled(p.c1) + basis_c2<F>(g, o).scaled(p.c2) +
           basis_d<F>(o).scaled(p.d) + basis_e<F>(o).scaled(p.e);
}

// Gauge between two preliminary forms C2 + z f E and C2 + z ftilde E, built
// from the free coordinates tau1, tau2:
//   T = tau1 C1 + tau2 C2 + z tau3 D + z tau4 E,
//   tau3 = -d2(tau2)/2,  tau4 = tau2 (f + ftilde)/2 - z d2^2(tau2)/2
template <class F>
Mat2Series<F> gauge_from_tau(const TruncSeries<F>& tau1, const TruncSeries<F>& tau2,
                             const TruncSeries<F>& f, const TruncSeries<F>& ftilde,
                             const Germ& germ) {
    const Orders& o = tau1.orders();
    const F half = F::one() / F::from_int(2);
    TruncSeries<F> tau3 = tau2.derivative(Var::t2).scaled(-half);
    TruncSeries<F> tau4 = (tau2 * (f + ftilde)).scaled(half) -
                          tau2.derivative(Var::t2).derivative(Var::t2)
                              .scaled(half)
                              .shift_up(Var::z, 1);
    return basis_c1<F>(o).scaled(tau1) + basis_c2<F>(germ, o).scaled(tau2) +
           basis_d<F>(o).scaled(tau3.shift_up(Var::z, 1)) +
           basis_e<F>(o).scaled(tau4.shift_up(Var::z, 1));
}

// ---------------------------------------------------------------------------
// (T)-structures
// ---------------------------------------------------------------------------

template <class F>
struct TStructure {
    Germ germ;
    Orders orders;
    Mat2Series<F> A1, A2;
};

// z d1 A2 - z d2 A1 + [A1, A2]; all-zero within reliable orders certifies
// flatness of the truncated data
template <class F>
Mat2Series<F> flatness_residual(const TStructure<F>& s) {
    return s.A2.derivative(Var::t1).shift_up(Var::z, 1) -
           s.A1.derivative(Var::t2).shift_up(Var::z, 1) +
           (s.A1 * s.A2 - s.A2 * s.A1);
}

template <class F>
bool a1_is_identity_at_z0(const TStructure<F>& s) {
    Mat2Series<F> a10 = s.A1.z_slice(0);
    return equals_reliable(a10, Mat2Series<F>::identity(s.orders));
}

template <class F>
TStructure<F> make_structure(const Germ& germ, const Orders& orders,
                             Mat2Series<F> A1, Mat2Series<F> A2,
                             bool unchecked = false) {
    TStructure<F> s{germ, orders, std::move(A1), std::move(A2)};
    if (!unchecked) {
        if (!a1_is_identity_at_z0(s))
            throw BadInput("A1 at z=0 must be the identity matrix");
        if (!flatness_residual(s).is_zero_reliable())
            throw NotFlat("flatness residual is nonzero");
    }
    return s;
}

// new trivialization by T: A_i -> T^{-1} (z d_i T + A_i T)
template <class F>
TStructure<F> gauge_apply(const Mat2Series<F>& T, const TStructure<F>& s) {
    if (!T.invertible_at_origin()) throw NotInvertible("gauge matrix T(0)(0) singular");
    Mat2Series<F> Tinv = T.inverse();
    auto transform = [&](Var v, const Mat2Series<F>& A) {
        return Tinv * (T.derivative(v).shift_up(Var::z, 1) + A * T);
    };
    TStructure<F> r{s.germ, s.orders, transform(Var::t1, s.A1), transform(Var::t2, s.A2)};
    return r;
}

// pull back along (t1, t2) -> (t1, lam(t2)): A1 -> A1 o h, A2 -> lam' (A2 o h).
// Over I2(m) only the finite automorphism group lam = lam0 t2, lam0^m = 1 is
// admissible; anything else would change the induced germ.
template <class F>
TStructure<F> base_pullback(const TruncSeries<F>& lam, const TStructure<F>& s) {
    if (!lam.t2_only() || !lam.at(0, 0, 0).is_zero())
        throw NotComposable("base map must be t2 -> lam(t2), lam(0) = 0");
    if (lam.at(0, 1, 0).is_zero())
        throw NotComposable("base map needs lam'(0) != 0");
    if (s.germ.is_i2()) {
        const F lam0 = lam.at(0, 1, 0);
        for (int j = 2; j <= s.orders.t2; ++j)
            if (!lam.at(0, j, 0).is_zero())
                throw NotAnAutomorphism("I2 base maps are linear");
        F p = F::one();
        for (int k = 0; k < s.germ.m; ++k) p = p * lam0;
        if (!(p == F::one()))
            throw NotAnAutomorphism("I2 base maps need lam0^m = 1");
    }
    TruncSeries<F> dlam = lam.derivative(Var::t2);
    TStructure<F> r{s.germ, s.orders, s.A1.compose_t2(lam),
                    (s.A2.compose_t2(lam)).scaled(dlam)};
    return r;
}

// Frame the structure so that A2(0) = C2 exactly: pick a basis vector zeta
// cyclic for A2(0) at the origin and gauge by T0 = [zeta | A2(0) zeta].
template <class F>
std::pair<Mat2Series<F>, TStructure<F>> primitive_frame(const TStructure<F>& s) {
    const Orders& o = s.orders;
    Mat2Series<F> P = s.A2.z_slice(0);
    if (!a1_is_identity_at_z0(s))
        throw WrongGerm("A1(0) must be the identity");
    // germ condition on the square of the z^0 part
    Mat2Series<F> P2 = P * P;
    Mat2Series<F> want = basis_c1<F>(o).scaled(germ_weight<F>(s.germ, o));
    if (!equals_reliable(P2, want))
        throw WrongGerm("A2(0)^2 does not match the germ relation");
    if (!s.germ.is_i2()) {
        bool zero = P.is_zero_reliable();
        if (zero) throw NoUnfolding("A2(0) = 0 admits no cyclic vector");
    }
    // zeta = e1 first, then e2; the frame must be invertible at the origin
    for (int col : {1, 2}) {
        Mat2Series<F> T0(o);
        T0.at(1, 1) = col == 1 ? TruncSeries<F>::one(o) : TruncSeries<F>::zero(o);
        T0.at(2, 1) = col == 1 ? TruncSeries<F>::zero(o) : TruncSeries<F>::one(o);
        T0.at(1, 2) = P.at(1, col);
        T0.at(2, 2) = P.at(2, col);
        if (!T0.invertible_at_origin()) continue;
        return {T0, gauge_apply(T0, s)};
    }
    throw NoUnfolding("no basis vector is cyclic for A2(0) at the origin");
}

// ---------------------------------------------------------------------------
// Gauge certificates
// ---------------------------------------------------------------------------

template <class F>
struct GaugeStep {
    Mat2Series<F> T;
};

// base map followed by a gauge: S -> gauge_apply(T, base_pullback(lam, S))
template <class F>
struct BaseChangeStep {
    TruncSeries<F> lam;
    Mat2Series<F> T;
};

template <class F>
using CertStep = std::variant<GaugeStep<F>, BaseChangeStep<F>>;

template <class F>
struct GaugeCertificate {
    std::vector<CertStep<F>> steps;
};

template <class F>
TStructure<F> apply_step(const CertStep<F>& step, const TStructure<F>& s) {
    if (std::holds_alternative<GaugeStep<F>>(step))
        return gauge_apply(std::get<GaugeStep<F>>(step).T, s);
    const auto& bc = std::get<BaseChangeStep<F>>(step);
    return gauge_apply(bc.T, base_pullback(bc.lam, s));
}

template <class F>
TStructure<F> apply_certificate(const GaugeCertificate<F>& cert, TStructure<F> s) {
    for (const auto& step : cert.steps) s = apply_step(step, s);
    return s;
}

// inverse of a single step: a gauge T inverts to T^{-1}; a base change
// (lam, T) inverts to (mu, (T o mu)^{-1}) with mu the compositional inverse
template <class F>
CertStep<F> invert_step(const CertStep<F>& step) {
    if (std::holds_alternative<GaugeStep<F>>(step))
        return GaugeStep<F>{std::get<GaugeStep<F>>(step).T.inverse()};
    const auto& bc = std::get<BaseChangeStep<F>>(step);
    TruncSeries<F> mu = bc.lam.revert();
    return BaseChangeStep<F>{mu, bc.T.compose_t2(mu).inverse()};
}

struct StepReport {
    double relation_residual = 0;  // max modulus of the compatibility relation
    bool ok = true;
    std::string error;
};

struct CertificateReport {
    std::vector<StepReport> steps;
    double final_mismatch = 0;
    bool pass = false;
    std::string error;
};

// Replays the certificate on src, checking the compatibility relation
// z d_i T + (base terms) - T A~_i = 0 per step within reliable orders, and the
// final structure against dst.
template <class F>
CertificateReport verify_certificate(const GaugeCertificate<F>& cert,
                                     const TStructure<F>& src,
                                     const TStructure<F>& dst) {
    CertificateReport rep;
    TStructure<F> cur = src;
    for (const auto& step : cert.steps) {
        StepReport sr;
        try {
            TStructure<F> next = apply_step(step, cur);
            const Mat2Series<F>* T;
            TStructure<F> pulled = cur;
            if (std::holds_alternative<BaseChangeStep<F>>(step)) {
                const auto& bc = std::get<BaseChangeStep<F>>(step);
                pulled = base_pullback(bc.lam, cur);
                T = &bc.T;
            } else {
                T = &std::get<GaugeStep<F>>(step).T;
            }
            auto residual = [&](Var v, const Mat2Series<F>& A,
                                const Mat2Series<F>& Anew) {
                return T->derivative(v).shift_up(Var::z, 1) + A * (*T) - (*T) * Anew;
            };
            Mat2Series<F> r1 = residual(Var::t1, pulled.A1, next.A1);
            Mat2Series<F> r2 = residual(Var::t2, pulled.A2, next.A2);
            sr.relation_residual =
                std::max(r1.max_modulus_reliable(), r2.max_modulus_reliable());
            sr.ok = r1.is_zero_reliable() && r2.is_zero_reliable();
            cur = next;
        } catch (const Error& e) {
            sr.ok = false;
            sr.error = e.code();
            rep.steps.push_back(sr);
            rep.pass = false;
            rep.error = e.code();
            return rep;
        }
        rep.steps.push_back(sr);
    }
    rep.final_mismatch =
        std::max(max_modulus_diff_reliable(cur.A1, dst.A1),
                 max_modulus_diff_reliable(cur.A2, dst.A2));
    bool final_ok = equals_reliable(cur.A1, dst.A1) && equals_reliable(cur.A2, dst.A2);
    rep.pass = final_ok;
    for (const auto& sr : rep.steps) rep.pass = rep.pass && sr.ok;
    return rep;
}

}  // namespace tconn

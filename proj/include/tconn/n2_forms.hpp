#pragma once

#include <optional>
#include <vector>

#include "tconn/connection.hpp"
#include "tconn/errors.hpp"
#include "tconn/odekit.hpp"
#include "tconn/reduce.hpp"

namespace tconn {

// f(0), plus f(1) whenever f(0) vanishes on the reliable grid; r = ord f(0),
// nullopt meaning the order is unbounded at this truncation
template <class F>
struct N2Invariants {
    TruncSeries<F> f0;
    std::optional<TruncSeries<F>> f1;
    std::optional<int> r;
};

template <class F>
N2Invariants<F> invariants_n2(const TruncSeries<F>& f) {
    if (f.depends_on(Var::t1)) throw BadInput("f must depend on (t2, z) only");
    N2Invariants<F> inv{f.z_slice(0), std::nullopt, std::nullopt};
    if (inv.f0.is_zero_reliable()) {
        inv.f1 = f.z_slice(1);
    } else {
        inv.r = inv.f0.ord_t2();
    }
    return inv;
}

// ---------------------------------------------------------------------------
// Unique gauge normal form over N2
// ---------------------------------------------------------------------------

template <class F>
struct N2GaugeNormal {
    TruncSeries<F> ftilde;
    TruncSeries<F> tau1, tau2;
    Mat2Series<F> T;  // gauge mapping C2 + z f E to C2 + z ftilde E
    int reliable_z = 0;
};

namespace detail {

// f(0) = 0 case: target ftilde = z f(1), gauge data from the third-order
// system with leading parts d2 tau1 and d2^3 tau2. Free data: tau1 = 1 at
// t2 = 0 and the three low t2-coefficients of tau2 set to 0.
template <class F>
N2GaugeNormal<F> gauge_normal_zero_case(const TruncSeries<F>& f, const F& tau1_seed) {
    const Orders& o = f.orders();
    const F half = F::one() / F::from_int(2);
    TruncSeries<F> f1 = f.z_slice(1);
    TruncSeries<F> ftilde = f1.shift_up(Var::z, 1);
    TruncSeries<F> g = (f - ftilde).z_shift_down(2);
    TruncSeries<F> u = f1.scaled(F::from_int(2)) + g.shift_up(Var::z, 1);

    TruncSeries<F> tau1(o), tau2(o);
    tau1.at(0, 0, 0) = tau1_seed;
    for (int j = 0; j <= o.t2; ++j) {
        if (j + 1 <= o.t2) {
            TruncSeries<F> p1 = (tau2 * g).scaled(half).shift_up(Var::z, 2);
            for (int kz = 0; kz <= o.z; ++kz)
                tau1.at(0, j + 1, kz) = -p1.at(0, j, kz) / F::from_int(j + 1);
        }
        if (j + 3 <= o.t2) {
            TruncSeries<F> rhs = (tau1 * g).scaled(F::from_int(2)) +
                                 (tau2 * u).derivative(Var::t2) +
                                 u * tau2.derivative(Var::t2);
            F den = F::from_int((j + 1) * (j + 2) * (j + 3));
            for (int kz = 0; kz <= o.z; ++kz)
                tau2.at(0, j + 3, kz) = rhs.at(0, j, kz) / den;
        }
    }
    Reliability rel = f.rel();
    rel.z = rel.z - 2;  // the double z-shift feeding g
    tau1.set_rel(tau1.rel().meet(rel));
    tau2.set_rel(tau2.rel().meet(rel));
    Mat2Series<F> T = gauge_from_tau(tau1, tau2, f, ftilde, Germ::N2());
    return {ftilde, tau1, tau2, T, std::max(0, f.rel().z)};
}

// f(0) != 0 case: keep ftilde(0) = f(0); for r <= 1 kill every higher slice,
// for r >= 2 force each slice into C[t2]_{<= r-2}. Stage n extracts the
// z^{n+1} coefficient of
//   tau1 (f - ftilde) + z/2 ( d2(tau2 (f+ftilde)) - z d2^3 tau2
//                             + (f+ftilde) d2 tau2 )
// with the stage unknowns zeroed, then solves the symmetric equation with
// leading coefficient f(0).
template <class F>
N2GaugeNormal<F> gauge_normal_order_case(const TruncSeries<F>& f, int r,
                                         const F& tau1_seed) {
    const Orders& o = f.orders();
    const F half = F::one() / F::from_int(2);
    TruncSeries<F> f0 = f.z_slice(0);
    TruncSeries<F> ftilde(o), tau1(o), tau2(o);
    ftilde.set_z_slice(0, f0);
    tau1.at(0, 0, 0) = tau1_seed;
    int reliable_z = f0.rel().t2 >= std::max(0, r - 2) ? 1 : 0;
    bool trusted = reliable_z == 1;

    for (int n = 0; n < o.z; ++n) {
        TruncSeries<F> d = f - ftilde;
        if (n >= 1) {
            TruncSeries<F> r1 = tau1.derivative(Var::t2) + (tau2 * d).scaled(half);
            tau1.set_z_slice(n, (-r1.z_slice(n)).antiderivative_t2(F::zero()));
        }
        TruncSeries<F> ssum = f + ftilde;
        TruncSeries<F> r2 =
            tau1 * d + ((tau2 * ssum).derivative(Var::t2) -
                        tau2.derivative(Var::t2).derivative(Var::t2)
                            .derivative(Var::t2)
                            .shift_up(Var::z, 1) +
                        ssum * tau2.derivative(Var::t2))
                           .scaled(half)
                           .shift_up(Var::z, 1);
        TruncSeries<F> A = r2.z_slice(n + 1);
        const F tau1_0 = tau1.at(0, 0, 0);  // constant by construction
        TruncSeries<F> ftn(o), c(o);
        if (r <= 1) {
            c = -A;
        } else {
            ftn = A.t2_truncated(r - 2).scaled(F::one() / tau1_0);
            c = ftn.scaled(tau1_0) - A;
        }
        std::optional<F> h0;
        if (r == 0) h0 = F::zero();
        TruncSeries<F> t2n = solve_sym_ode(f0, c, h0);
        // a stage whose corrections vanish identically is exactly consistent
        // even when the tracked bounds have shrunk (fixed-point input)
        bool stage_ok = A.rel().t2 >= std::max(0, r - 2) ||
                        (c.is_zero_full() && t2n.is_zero_full());
        if (!stage_ok) ftn = TruncSeries<F>(o);  // drop unverifiable slices
        ftilde.set_z_slice(n + 1, ftn);
        tau2.set_z_slice(n, t2n);
        trusted = trusted && stage_ok;
        if (trusted) reliable_z = n + 2;
    }
    Mat2Series<F> T = gauge_from_tau(tau1, tau2, f, ftilde, Germ::N2());
    return {ftilde, tau1, tau2, T, std::min(reliable_z, o.z + 1)};
}

}  // namespace detail

template <class F>
N2GaugeNormal<F> gauge_normal_form_n2(const TruncSeries<F>& f,
                                      const F& tau1_seed = F::one()) {
    if (f.depends_on(Var::t1)) throw BadInput("f must depend on (t2, z) only");
    if (tau1_seed.is_zero()) throw BadParameter("tau1 seed must be a unit");
    TruncSeries<F> f0 = f.z_slice(0);
    if (f0.is_zero_reliable()) return detail::gauge_normal_zero_case(f, tau1_seed);
    return detail::gauge_normal_order_case(f, *f0.ord_t2(), tau1_seed);
}

// ---------------------------------------------------------------------------
// Base changes (isomorphisms over nontrivial automorphisms of N2)
// ---------------------------------------------------------------------------

template <class F>
struct BaseChangeResult {
    TruncSeries<F> fprime;
    TruncSeries<F> lam;  // base map of the paper's construction
    TruncSeries<F> a;    // gauge datum, T = [[a, z a'], [0, 1/a]]
    CertStep<F> step;    // forward step: (C2 + z f E) -> (C2 + z fprime E)
};

namespace detail {

template <class F>
Mat2Series<F> upper_gauge(const TruncSeries<F>& a) {
    const Orders& o = a.orders();
    Mat2Series<F> T(o);
    T.at(1, 1) = a;
    T.at(1, 2) = a.derivative(Var::t2).shift_up(Var::z, 1);
    T.at(2, 2) = TruncSeries<F>::one(o).div_by_unit(a);
    return T;
}

}  // namespace detail

// With f(0) = 0, produce fprime with fprime(0) = fprime(1) = 0 via the base
// change lam' = a^{-2} where a solves a'' = f(1) a, a(0) = 1, a'(0) = 0.
// fprime is recovered from fprime o lam = a^4 f - z a^3 a''; its first two
// slices vanish identically and are set so.
template <class F>
BaseChangeResult<F> base_change_kill_f1(const TruncSeries<F>& f) {
    const Orders& o = f.orders();
    if (!f.z_slice(0).is_zero_reliable())
        throw BadCase("base_change_kill_f1 needs f(0) = 0");
    TruncSeries<F> f1 = f.z_slice(1);
    TruncSeries<F> a(o);
    a.at(0, 0, 0) = F::one();
    for (int j = 0; j + 2 <= o.t2; ++j) {
        TruncSeries<F> p = f1 * a;
        a.at(0, j + 2, 0) = p.at(0, j, 0) / F::from_int((j + 1) * (j + 2));
    }
    a.set_rel(a.rel().meet(Reliability{o.t1, std::min(o.t2, f1.rel().t2 + 2), o.z}));
    TruncSeries<F> lam = TruncSeries<F>::one(o).div_by_unit(a * a)
                             .antiderivative_t2(F::zero());
    TruncSeries<F> mu = lam.revert();
    TruncSeries<F> a4 = (a * a) * (a * a);
    TruncSeries<F> fprime(o);
    for (int k = 2; k <= o.z; ++k)
        fprime.set_z_slice(k, (a4 * f.z_slice(k)).compose_t2(mu));
    CertStep<F> back = BaseChangeStep<F>{lam, detail::upper_gauge(a)};
    return {fprime, lam, a, invert_step(back)};
}

// With r = ord f(0) finite, produce fprime with fprime(0) = t2^r exactly.
// lam solves lam^r (lam')^2 = f(0); a = (lam')^{-1/2};
// fprime(1) o lam = f(1) a^4 - a^3 a'', fprime(k) o lam = f(k) a^4 for k >= 2.
template <class F>
BaseChangeResult<F> base_change_monomial(const TruncSeries<F>& f) {
    const Orders& o = f.orders();
    TruncSeries<F> f0 = f.z_slice(0);
    auto r_opt = f0.ord_t2();
    if (!r_opt) throw BadCase("base_change_monomial needs f(0) != 0");
    const int r = *r_opt;
    TruncSeries<F> lam = solve_sqrt_power(f0);
    TruncSeries<F> dlam = lam.derivative(Var::t2);
    TruncSeries<F> a;
    try {
        a = TruncSeries<F>::one(o).div_by_unit(dlam.sqrt_unit_series());
    } catch (const NotASquareInField&) {
        throw RootNotInField("sqrt of lam'(0) missing in the field");
    }
    TruncSeries<F> mu = lam.revert();
    TruncSeries<F> a4 = (a * a) * (a * a);
    TruncSeries<F> addot = a.derivative(Var::t2).derivative(Var::t2);
    TruncSeries<F> fprime(o);
    fprime.set_z_slice(0, TruncSeries<F>::monomial(
                               o, 0, std::min(r, o.t2), 0,
                               r <= o.t2 ? F::one() : F::zero()));
    if (o.z >= 1)
        fprime.set_z_slice(
            1, (a4 * f.z_slice(1) - (a * a * a) * addot).compose_t2(mu));
    for (int k = 2; k <= o.z; ++k)
        fprime.set_z_slice(k, (a4 * f.z_slice(k)).compose_t2(mu));
    CertStep<F> back = BaseChangeStep<F>{lam, detail::upper_gauge(a)};
    return {fprime, lam, a, invert_step(back)};
}

// ---------------------------------------------------------------------------
// Classification (Theorem-5.3-style labels) and the 5.20 isomorphism decision
// ---------------------------------------------------------------------------

enum class N2Label { A, B, Zero, R };

inline const char* to_string(N2Label l) {
    switch (l) {
        case N2Label::A: return "A";
        case N2Label::B: return "B";
        case N2Label::Zero: return "Zero";
        case N2Label::R: return "R";
    }
    return "?";
}

template <class F>
struct N2Class {
    N2Label label = N2Label::Zero;
    int r = 0;                            // order, for label R
    std::vector<TruncSeries<F>> slices;   // f(k), k = 1..nz, each in C[t2]_{<=r-2}
    GaugeCertificate<F> cert;
    int reliable_z = 0;
    bool truncation_caveat = false;  // f(0) = 0 decided at finite truncation only
};

template <class F>
N2Class<F> classify_n2(const TStructure<F>& s, const F& tau1_seed = F::one()) {
    if (s.germ.is_i2()) throw WrongGerm("classify_n2 needs an N2 structure");
    PreliminaryForm<F> pre = preliminary_normal_form(s);
    N2Class<F> out;
    out.cert = pre.cert;
    TruncSeries<F> f = pre.f;
    N2Invariants<F> inv = invariants_n2(f);
    if (!inv.r) {
        out.truncation_caveat = true;
        BaseChangeResult<F> bc = base_change_kill_f1(f);
        out.cert.steps.push_back(bc.step);
        N2GaugeNormal<F> gn = gauge_normal_form_n2(bc.fprime, tau1_seed);
        out.cert.steps.push_back(GaugeStep<F>{gn.T});
        out.label = N2Label::Zero;
        out.reliable_z = gn.reliable_z;
        return out;
    }
    BaseChangeResult<F> bc = base_change_monomial(f);
    out.cert.steps.push_back(bc.step);
    N2GaugeNormal<F> gn = gauge_normal_form_n2(bc.fprime, tau1_seed);
    out.cert.steps.push_back(GaugeStep<F>{gn.T});
    out.reliable_z = gn.reliable_z;
    const int r = *inv.r;
    if (r == 0) {
        out.label = N2Label::A;
    } else if (r == 1) {
        out.label = N2Label::B;
    } else {
        out.label = N2Label::R;
        out.r = r;
        for (int k = 1; k <= f.orders().z; ++k)
            out.slices.push_back(gn.ftilde.z_slice(k));
    }
    return out;
}

// lambda0 = zeta_r^s; carries the exact value when it lies in {1,-1,i,-i}
template <class F>
struct Lambda0 {
    int r = 1, s = 0;
    std::optional<F> exact_value;
};

template <class F>
std::optional<F> root_of_unity_in_field(int r, int s) {
    long long mm = ((s % r) + r) % r;
    long long g = std::gcd(mm, (long long)r);
    long long d = r / g;
    if (d == 1) return F::one();
    if (d == 2) return -F::one();
    if (d == 4) return (mm / g) == 1 ? F::i() : -F::i();
    if constexpr (!F::is_exact) {
        auto v = std::polar(1.0, 2 * M_PI * double(mm) / double(r));
        return F(v.real(), v.imag());
    }
    return std::nullopt;
}

// Are two 5.20-type forms with the same r related by a root-of-unity twist
// ftilde(k)(t2) = lambda0^{-2} f(k)(t2 / lambda0)? Coefficientwise the test is
// c~_{k,j} = lambda0^{-(2+j)} c_{k,j}; candidates lambda0 = zeta_r^s are tried
// in order s = 0, 1, ..., r-1 and the first match is returned.
template <class F>
std::optional<Lambda0<F>> iso_decide_520(const N2Class<F>& nf1, const N2Class<F>& nf2) {
    if (nf1.label != N2Label::R || nf2.label != N2Label::R)
        throw NotComparable("iso_decide_520 needs two class-R forms");
    if (nf1.r != nf2.r)
        throw NotComparable("class-R forms with different r are never isomorphic");
    const int r = nf1.r;
    const std::size_t nk = std::min(nf1.slices.size(), nf2.slices.size());
    for (int s = 0; s < r; ++s) {
        bool ok = true;
        for (std::size_t k = 0; k < nk && ok; ++k) {
            const auto& from = nf1.slices[k];
            const auto& to = nf2.slices[k];
            const int jmax = std::min(from.orders().t2, r - 2);
            for (int j = 0; j <= jmax && ok; ++j) {
                const F& c = from.at(0, j, 0);
                const F& ct = to.at(0, j, 0);
                if (c.is_zero() && ct.is_zero()) continue;
                if (c.is_zero() != ct.is_zero()) {
                    ok = false;
                    break;
                }
                long long m = -(long long)(s) * (2 + j);
                ok = equals_primitive_root_power(ct / c, r, m);
            }
        }
        if (ok) return Lambda0<F>{r, s, root_of_unity_in_field<F>(r, s)};
    }
    return std::nullopt;
}

}  // namespace tconn

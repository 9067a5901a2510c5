#pragma once

#include <optional>
#include <utility>

#include "tconn/errors.hpp"
#include "tconn/series.hpp"

namespace tconn {

inline bool is_positive_real(const GaussianRational& v) {
    return v.im() == 0 && v.re() > 0;
}
inline bool is_positive_real(const ApproxComplex& v) {
    return std::abs(v.im()) <= v.tol() && v.re() > v.tol();
}

// which case of the symmetric first-order equation applies, by the vanishing
// order of the leading coefficient
enum class OdeCase { Unit, SimpleZero, HigherZero };

template <class F>
OdeCase classify_ode_case(const TruncSeries<F>& a) {
    auto o = a.ord_t2();
    if (!o) throw BadParameter("leading coefficient is identically zero");
    return *o == 0 ? OdeCase::Unit : *o == 1 ? OdeCase::SimpleZero : OdeCase::HigherZero;
}

// d/dt2 (a h) + a dh/dt2 = c, solved coefficientwise. The t2^{N-1}
// coefficient of the equation reads sum_{i+j=N} (N+j) a_i h_j = c_{N-1}; the
// top term is (2M+o) a_o h_M with M = N-o, so h is determined by forward
// substitution once the case-dependent free data is fixed:
//   ord(a) = 0:  h(0) must be supplied
//   ord(a) = 1:  no freedom
//   ord(a) = o >= 2:  solvable iff ord(c) >= o-1, no freedom
template <class F>
TruncSeries<F> solve_sym_ode(const TruncSeries<F>& a, const TruncSeries<F>& c,
                             std::optional<F> h0 = std::nullopt) {
    if (!a.t2_only() || !c.t2_only())
        throw BadInput("solve_sym_ode needs series in t2 only");
    if (!(a.orders() == c.orders())) throw OrderMismatch();
    const int n2 = a.orders().t2;
    auto oo = a.ord_t2();
    if (!oo) throw BadParameter("leading coefficient is identically zero");
    const int o = *oo;
    if (o == 0 && !h0) throw BadInitialData("case ord(a)=0 needs h(0)");
    if (o > 0 && h0) throw BadInitialData("cases ord(a)>=1 admit no h(0)");
    if (o >= 2)
        for (int j = 0; j <= std::min(o - 2, n2); ++j)
            if (!c.at(0, j, 0).is_zero())
                throw NoFormalSolution("needs ord(c) >= ord(a) - 1");

    TruncSeries<F> h(a.orders());
    const F& ao = a.at(0, o, 0);
    int m_start = 0;
    if (o == 0) {
        h.at(0, 0, 0) = *h0;
        m_start = 1;
    }
    for (int M = m_start; M <= n2; ++M) {
        if (M + o - 1 > n2) break;  // equation beyond the retained grid
        F acc = M + o - 1 >= 0 ? c.at(0, M + o - 1, 0) : F::zero();
        for (int j = 0; j < M; ++j) {
            int i = M + o - j;
            if (i > n2) continue;
            const F& ai = a.at(0, i, 0);
            if (ai.is_zero()) continue;
            acc -= ai * h.at(0, j, 0) * F::from_int(M + o + j);
        }
        h.at(0, M, 0) = acc / (ao * F::from_int(2 * M + o));
    }
    Reliability r = a.rel().meet(c.rel());
    r.t2 = r.t2 - std::max(0, o - 1);
    h.set_rel(r);
    return h;
}

// lambda with lambda(0) = 0, lambda'(0) != 0 and (lambda')^2 lambda^r = f,
// r = ord(f). Steps: strip t2^r, take the square root of the unit part, solve
// 2 t2 y' + (r+2) y = (r+2) k, take the (r+2)-th root, multiply back by t2.
template <class F>
TruncSeries<F> solve_sqrt_power(const TruncSeries<F>& f) {
    if (!f.t2_only()) throw BadInput("solve_sqrt_power needs a series in t2 only");
    auto oo = f.ord_t2();
    if (!oo) throw ZeroInput("solve_sqrt_power needs f != 0");
    const int r = *oo;
    TruncSeries<F> g = f.div_by_t2_power(r);
    TruncSeries<F> k;
    try {
        k = g.sqrt_unit_series();
    } catch (const NotASquareInField&) {
        throw RootNotInField("unit part of f is not a square in the field");
    }
    const int n2 = f.orders().t2;
    TruncSeries<F> y(f.orders());
    for (int n = 0; n <= n2; ++n)
        y.at(0, n, 0) = k.at(0, n, 0) * F::from_int(r + 2) / F::from_int(2 * n + r + 2);
    y.set_rel(k.rel());
    TruncSeries<F> w;
    try {
        w = y.nth_root_series(r + 2);
    } catch (const NotASquareInField&) {
        throw RootNotInField("(r+2)-th root of the constant term missing in the field");
    }
    return (w * w).shift_up(Var::t2, 1);
}

// The coupled system
//   g1' + g2 h1 + h2 = 0
//   (r + t2 d/dt2) g2 + g1 h3 + h4 = 0
// with r > 0, solved by the interleaved coefficient recursion: g2^(n) from the
// second equation, then g1^(n+1) from the first.
template <class F>
std::pair<TruncSeries<F>, TruncSeries<F>> solve_coupled(
    const F& r, const TruncSeries<F>& h1, const TruncSeries<F>& h2,
    const TruncSeries<F>& h3, const TruncSeries<F>& h4, const F& g1_0) {
    if (!is_positive_real(r)) throw BadParameter("solve_coupled needs r > 0");
    for (const auto* h : {&h1, &h2, &h3, &h4})
        if (!h->t2_only()) throw BadInput("solve_coupled needs series in t2 only");
    if (!(h1.orders() == h2.orders()) || !(h1.orders() == h3.orders()) ||
        !(h1.orders() == h4.orders()))
        throw OrderMismatch();
    const int n2 = h1.orders().t2;
    TruncSeries<F> g1(h1.orders()), g2(h1.orders());
    g1.at(0, 0, 0) = g1_0;
    for (int n = 0; n <= n2; ++n) {
        F acc = h4.at(0, n, 0);
        for (int k = 0; k <= n; ++k) {
            const F& h3v = h3.at(0, n - k, 0);
            if (h3v.is_zero()) continue;
            acc += g1.at(0, k, 0) * h3v;
        }
        g2.at(0, n, 0) = -acc / (r + F::from_int(n));
        if (n + 1 <= n2) {
            F acc1 = h2.at(0, n, 0);
            for (int k = 0; k <= n; ++k) {
                const F& h1v = h1.at(0, n - k, 0);
                if (h1v.is_zero()) continue;
                acc1 += g2.at(0, k, 0) * h1v;
            }
            g1.at(0, n + 1, 0) = -acc1 / F::from_int(n + 1);
        }
    }
    Reliability rel = h1.rel().meet(h2.rel()).meet(h3.rel()).meet(h4.rel());
    g1.set_rel(rel);
    g2.set_rel(rel);
    return {g1, g2};
}

}  // namespace tconn

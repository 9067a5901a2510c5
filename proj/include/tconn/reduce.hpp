#pragma once

#include <utility>
#include <vector>

#include "tconn/connection.hpp"
#include "tconn/errors.hpp"

namespace tconn {

// A1 = C1, A2 = C2 + z f E, with the gauge chain that produced it
template <class F>
struct PreliminaryForm {
    Germ germ;
    TruncSeries<F> f;
    GaugeCertificate<F> cert;
};

template <class F>
struct ReduceStep {
    TStructure<F> out;
    std::vector<Mat2Series<F>> gauges;  // identity gauges are omitted
};

namespace detail {

template <class F>
bool framed(const TStructure<F>& s) {
    return equals_reliable(s.A1.z_slice(0), Mat2Series<F>::identity(s.orders)) &&
           equals_reliable(s.A2.z_slice(0), basis_c2<F>(s.germ, s.orders));
}

// coordinates of (A2 - C2)/z in the C1, C2, D, E basis
template <class F>
CdeParts<F> a2_parts(const TStructure<F>& s) {
    return cde_decompose((s.A2 - basis_c2<F>(s.germ, s.orders)).z_shift_down(1),
                         s.germ);
}

}  // namespace detail

// Kill the t1-dependence: T solves d1 T = -(sum_{k>=1} A1(k) z^{k-1}) T with
// T = Id at t1 = 0, by recursion in the t1-degree. Afterwards A1 = C1,
// A2(0) = C2 and d1 A2 = 0.
template <class F>
ReduceStep<F> step1_flatten_t1(const TStructure<F>& s) {
    if (!detail::framed(s)) throw NotFramed("step1 needs A1(0) = C1, A2(0) = C2");
    const Orders& o = s.orders;
    Mat2Series<F> id = Mat2Series<F>::identity(o);
    if (s.A1 == id) return {s, {}};  // A1 = C1 exactly on the grid
    Mat2Series<F> M = (s.A1 - s.A1.z_slice(0)).z_shift_down(1);
    Mat2Series<F> T = id;
    for (int j = 0; j < o.t1; ++j) {
        Mat2Series<F> P = M * T;
        for (int i = 1; i <= 2; ++i)
            for (int jj = 1; jj <= 2; ++jj)
                for (int k2 = 0; k2 <= o.t2; ++k2)
                    for (int kz = 0; kz <= o.z; ++kz)
                        T.at(i, jj).at(j + 1, k2, kz) =
                            -P.at(i, jj).at(j, k2, kz) / F::from_int(j + 1);
    }
    T.set_rel(M.rel());
    TStructure<F> out = gauge_apply(T, s);
    if (!equals_reliable(out.A1, basis_c1<F>(o)))
        throw BadForm("step1 failed to reach A1 = C1; input not flat?");
    // the true output is exactly t1-free and has A1 = C1; replace the
    // truncation garbage outside the reliable box by those known values
    out.A1 = basis_c1<F>(o);
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
            if (out.A2.at(i, j).depends_on_reliable(Var::t1))
                throw BadForm("step1 failed to reach d1 A2 = 0; input not flat?");
            out.A2.at(i, j) = out.A2.at(i, j).without_t1();
        }
    return {out, {T}};
}

// Erase the C1 part of A2: with A2 = C2 + z(a1 C1 + ...), gauge by
// tau1 C1 where d2 tau1 = -a1 tau1, tau1(z, 0) = 1. The C2, D, E parts of
// A2 are untouched.
template <class F>
ReduceStep<F> step2_remove_c1(const TStructure<F>& s) {
    const Orders& o = s.orders;
    if (!equals_reliable(s.A1, basis_c1<F>(o)))
        throw BadForm("step2 needs A1 = C1");
    CdeParts<F> p = detail::a2_parts(s);
    if (p.c1.depends_on(Var::t1))
        throw BadForm("step2 needs d1 A2 = 0");
    if (p.c1.is_zero_full()) return {s, {}};
    TruncSeries<F> tau1(o);
    tau1.at(0, 0, 0) = F::one();
    for (int kz = 1; kz <= o.z; ++kz) tau1.at(0, 0, kz) = F::zero();
    {
        // t2-degree recursion for all z-slices at once
        for (int j = 0; j < o.t2; ++j) {
            TruncSeries<F> prod = p.c1 * tau1;
            for (int kz = 0; kz <= o.z; ++kz)
                tau1.at(0, j + 1, kz) = -prod.at(0, j, kz) / F::from_int(j + 1);
        }
    }
    tau1.set_rel(p.c1.rel());
    Mat2Series<F> T = basis_c1<F>(o).scaled(tau1);
    // the output shape is known in closed form (C2, D, E parts unchanged);
    // building it directly keeps the reliability of the input data
    Mat2Series<F> A2 =
        basis_c2<F>(s.germ, o) +
        cde_recompose(CdeParts<F>{TruncSeries<F>(o), p.c2, p.d, p.e}, s.germ)
            .shift_up(Var::z, 1);
    return {TStructure<F>{s.germ, o, basis_c1<F>(o), A2}, {T}};
}

// Remove the C2 and D parts of A2. With A2 = C2 + z(a2 C2 + a3 D + a4 E) the
// compatibility relation splits over the basis into
//   C2:  2 tau3 + a2 + z a2 tau3 = 0
//   C1:  a~1 = z (a3 tau3 + a2 tau4 / 2)
//   D :  tau4 (1 + z a2/2 (1 + z tau3)) = a3 + z d2 tau3 - z^2 a3 tau3^2
//   E :  a~4 (1 + z tau3) = a4 - 4 t2^{m-2} tau3
//        + z (d2 tau4 - 2 t2^{m-2} a2 tau3 - a4 tau3 + a3 tau4 - a~1 tau4)
// and the second step is re-applied to kill the leftover a~1.
template <class F>
ReduceStep<F> step3_remove_c2_d(const TStructure<F>& s) {
    const Orders& o = s.orders;
    if (!equals_reliable(s.A1, basis_c1<F>(o)))
        throw BadForm("step3 needs A1 = C1");
    CdeParts<F> p = detail::a2_parts(s);
    if (!p.c1.is_zero_reliable())
        throw BadForm("step3 needs the C1 part of A2 already removed");
    const F half = F::one() / F::from_int(2);
    if (p.c2.is_zero_full() && p.d.is_zero_full()) return {s, {}};

    TruncSeries<F> one = TruncSeries<F>::one(o);
    TruncSeries<F> tau3 =
        (-p.c2).div_by_unit(one.scaled(F::from_int(2)) + p.c2.shift_up(Var::z, 1));
    TruncSeries<F> num4 = p.d + tau3.derivative(Var::t2).shift_up(Var::z, 1) -
                          (p.d * tau3 * tau3).shift_up(Var::z, 2);
    TruncSeries<F> den4 = one + p.c2.scaled(half).shift_up(Var::z, 1) +
                          (p.c2 * tau3).scaled(half).shift_up(Var::z, 2);
    TruncSeries<F> tau4 = num4.div_by_unit(den4);
    TruncSeries<F> w = germ_weight<F>(s.germ, o);
    TruncSeries<F> a1_new =
        (p.d * tau3 + (p.c2 * tau4).scaled(half)).shift_up(Var::z, 1);
    TruncSeries<F> numE =
        p.e - (w * tau3).scaled(F::from_int(4)) +
        (tau4.derivative(Var::t2) - (w * p.c2 * tau3).scaled(F::from_int(2)) -
         p.e * tau3 + p.d * tau4 - a1_new * tau4)
            .shift_up(Var::z, 1);
    TruncSeries<F> a4_new = numE.div_by_unit(one + tau3.shift_up(Var::z, 1));

    Mat2Series<F> T = basis_c1<F>(o) + basis_d<F>(o).scaled(tau3.shift_up(Var::z, 1)) +
                      basis_e<F>(o).scaled(tau4.shift_up(Var::z, 1));
    Mat2Series<F> A2 = basis_c2<F>(s.germ, o) +
                       (basis_c1<F>(o).scaled(a1_new) + basis_e<F>(o).scaled(a4_new))
                           .shift_up(Var::z, 1);
    TStructure<F> mid{s.germ, o, basis_c1<F>(o), A2};
    ReduceStep<F> fin = step2_remove_c1(mid);
    std::vector<Mat2Series<F>> gauges{T};
    for (auto& g : fin.gauges) gauges.push_back(g);
    return {fin.out, std::move(gauges)};
}

// primitive frame -> step1 -> step2 -> step3; the certificate replays
// src -> (C1, C2 + z f E)
template <class F>
PreliminaryForm<F> preliminary_normal_form(const TStructure<F>& s) {
    GaugeCertificate<F> cert;
    TStructure<F> cur = s;
    if (!detail::framed(cur)) {
        auto [T0, framed_s] = primitive_frame(cur);
        if (!(T0 == Mat2Series<F>::identity(s.orders)))
            cert.steps.push_back(GaugeStep<F>{T0});
        cur = framed_s;
    }
    for (auto* step : {&step1_flatten_t1<F>, &step2_remove_c1<F>, &step3_remove_c2_d<F>}) {
        ReduceStep<F> r = (*step)(cur);
        for (auto& g : r.gauges) cert.steps.push_back(GaugeStep<F>{g});
        cur = r.out;
    }
    CdeParts<F> p = detail::a2_parts(cur);
    if (!p.c1.is_zero_reliable() || !p.c2.is_zero_reliable() || !p.d.is_zero_reliable())
        throw BadForm("reduction did not reach C2 + z f E");
    return {s.germ, p.e, std::move(cert)};
}

}  // namespace tconn

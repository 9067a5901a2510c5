#pragma once

#include "tconn/connection.hpp"
#include "tconn/errors.hpp"
#include "tconn/odekit.hpp"

namespace tconn {

// Unique normal form over I2(m): every z-slice of ftilde is a polynomial of
// degree at most m-4 (ftilde = 0 when m = 3). tau1, tau2 are the gauge data
// connecting C2 + z f E to C2 + z ftilde E; tau3, tau4 derive from them.
template <class F>
struct I2NormalForm {
    int m = 3;
    TruncSeries<F> ftilde;
    TruncSeries<F> tau1, tau2;
    // number of leading z-slices of ftilde whose extraction stayed inside the
    // reliable window of the staged recursion
    int reliable_z = 0;
};

// The z-order recursion behind the unique form. Stage n reads the two
// compatibility equations
//   d2 tau1 + tau2 (f - ftilde)/2 = 0
//   t2^{m-3}((m-2) + 2 t2 d2) tau2 + tau1 (f - ftilde)
//     + z/2 ( d2(tau2 (f + ftilde)) - z d2^3 tau2 + (f + ftilde) d2 tau2 ) = 0
// at z-order n, picks ftilde(n) in C[t2]_{<= m-4} as the unique polynomial
// making the t2^{m-3} division possible, and solves the reduced coupled
// system with r = (m-2)/2. Free constants: tau1(0)(0) = 1, tau1(n)(0) = 0.
template <class F>
I2NormalForm<F> unique_normal_form_i2(const TruncSeries<F>& f, int m,
                                      const F& tau1_seed = F::one()) {
    if (m < 3) throw BadParameter("I2 normal form needs m >= 3");
    if (tau1_seed.is_zero()) throw BadParameter("tau1 seed must be a unit");
    if (f.depends_on(Var::t1)) throw BadInput("f must depend on (t2, z) only");
    const Orders& o = f.orders();
    const F half = F::one() / F::from_int(2);
    const F r_param = F::from_int(m - 2) / F::from_int(2);

    TruncSeries<F> f0 = f.z_slice(0);
    TruncSeries<F> ftilde(o), tau1(o), tau2(o);
    I2NormalForm<F> out{m, ftilde, tau1, tau2, 0};

    // stage 0
    TruncSeries<F> ft0 = f0.t2_truncated(m - 4);
    TruncSeries<F> diff0 = f0 - ft0;  // [f(0)]_{>= m-3}, divisible by design
    TruncSeries<F> quot0 = diff0.div_by_t2_power(m - 3);
    auto [t10, t20] = solve_coupled(r_param, diff0.scaled(half), TruncSeries<F>(o),
                                    quot0.scaled(half), TruncSeries<F>(o), tau1_seed);
    ftilde.set_z_slice(0, ft0);
    tau1.set_z_slice(0, t10);
    tau2.set_z_slice(0, t20);
    bool trusted = f0.rel().t2 >= m - 4;
    out.reliable_z = trusted ? 1 : 0;

    for (int n = 1; n <= o.z; ++n) {
        // assemble both residuals with the stage-n unknowns left at zero
        TruncSeries<F> d = f - ftilde;
        TruncSeries<F> ssum = f + ftilde;
        TruncSeries<F> r1 = tau1.derivative(Var::t2) + (tau2 * d).scaled(half);
        TruncSeries<F> op = tau2.scaled(F::from_int(m - 2)) +
                            tau2.derivative(Var::t2).shift_up(Var::t2, 1)
                                .scaled(F::from_int(2));
        TruncSeries<F> r2 =
            op.shift_up(Var::t2, m - 3) + tau1 * d +
            ((tau2 * ssum).derivative(Var::t2) -
             tau2.derivative(Var::t2).derivative(Var::t2).derivative(Var::t2)
                 .shift_up(Var::z, 1) +
             ssum * tau2.derivative(Var::t2))
                .scaled(half)
                .shift_up(Var::z, 1);

        TruncSeries<F> A1n = r1.z_slice(n);  // = tau2(0) f(n)/2 + h1(n)
        TruncSeries<F> A2n = r2.z_slice(n);  // = tau1(0) f(n) + h2(n)

        // ftilde(n): cancel the low t2-degrees of A2n / tau1(0)
        TruncSeries<F> W = A2n.div_by_unit(t10);
        TruncSeries<F> ftn = W.t2_truncated(m - 4);
        TruncSeries<F> numer = A2n - t10 * ftn;  // ord >= m-3 exactly
        TruncSeries<F> quot = numer.div_by_t2_power(m - 3);
        TruncSeries<F> h3 = A1n - (t20 * ftn).scaled(half);

        auto [t1n, t2n] = solve_coupled(r_param, diff0.scaled(half), h3,
                                        quot0.scaled(half), quot.scaled(half),
                                        F::zero());
        // a stage with identically vanishing corrections is exactly
        // consistent even when the tracked bounds have shrunk
        bool stage_ok = (W.rel().t2 >= m - 4 && A1n.rel().t2 >= 0) ||
                        (quot.is_zero_full() && h3.is_zero_full() &&
                         t1n.is_zero_full() && t2n.is_zero_full());
        if (!stage_ok) ftn = TruncSeries<F>(o);  // drop unverifiable slices
        ftilde.set_z_slice(n, ftn);
        tau1.set_z_slice(n, t1n);
        tau2.set_z_slice(n, t2n);
        trusted = trusted && stage_ok;
        if (trusted) out.reliable_z = n + 1;
    }

    out.ftilde = ftilde;
    out.tau1 = tau1;
    out.tau2 = tau2;
    return out;
}

}  // namespace tconn

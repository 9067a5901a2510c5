#pragma once

// shared generators and helpers for the test suites

#include <random>
#include <vector>

#include "tconn/tconn.hpp"

namespace tsup {

using namespace tconn;

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <class F>
F random_scalar(Rng& rng, bool allow_imag = true) {
    long long num = uniform(rng, -9, 9);
    long long den = uniform(rng, 1, 9);
    F v = F::from_ratio(num, den);
    if (allow_imag && uniform(rng, 0, 2) == 0)
        v = v + F::i() * F::from_ratio(uniform(rng, -9, 9), uniform(rng, 1, 9));
    return v;
}

template <class F>
F random_nonzero_scalar(Rng& rng, bool allow_imag = true) {
    for (;;) {
        F v = random_scalar<F>(rng, allow_imag);
        if (!v.is_zero()) return v;
    }
}

// sparse random series: `terms` monomials within the given degree caps
template <class F>
TruncSeries<F> random_series(Rng& rng, const Orders& o, int max_t1, int max_t2,
                             int max_z, int terms) {
    TruncSeries<F> s(o);
    for (int k = 0; k < terms; ++k) {
        int k1 = uniform(rng, 0, std::min(max_t1, o.t1));
        int k2 = uniform(rng, 0, std::min(max_t2, o.t2));
        int kz = uniform(rng, 0, std::min(max_z, o.z));
        s.at(k1, k2, kz) += random_scalar<F>(rng);
    }
    return s;
}

template <class F>
TruncSeries<F> random_t2_series(Rng& rng, const Orders& o, int max_t2, int terms) {
    return random_series<F>(rng, o, 0, max_t2, 0, terms);
}

// invertible gauge, polynomial in z (degree <= 3) and t2 (degree <= 2)
template <class F>
Mat2Series<F> random_gauge(Rng& rng, const Orders& o, bool t1_dependent = false) {
    for (;;) {
        Mat2Series<F> T(o);
        for (int i = 1; i <= 2; ++i)
            for (int j = 1; j <= 2; ++j)
                T.at(i, j) = random_series<F>(rng, o, t1_dependent ? 1 : 0, 2,
                                              std::min(3, o.z), 3);
        if (T.invertible_at_origin()) return T;
    }
}

// A1 = C1, A2 = C2 + z f E
template <class F>
TStructure<F> normal_form_structure(const Germ& g, const TruncSeries<F>& f) {
    const Orders& o = f.orders();
    Mat2Series<F> A2 = basis_c2<F>(g, o) + basis_e<F>(o).scaled(f.shift_up(Var::z, 1));
    return make_structure(g, o, basis_c1<F>(o), A2);
}

// random f legal as an I2(m) unique normal form: z-slices of degree <= m-4
template <class F>
TruncSeries<F> random_i2_normal_f(Rng& rng, const Orders& o, int m) {
    TruncSeries<F> f(o);
    if (m < 4) return f;
    for (int kz = 0; kz <= o.z; ++kz)
        for (int k2 = 0; k2 <= std::min(m - 4, o.t2); ++k2)
            if (uniform(rng, 0, 1) == 0) f.at(0, k2, kz) = random_scalar<F>(rng);
    return f;
}

template <class F>
TruncSeries<F> random_n2_f(Rng& rng, const Orders& o) {
    return random_series<F>(rng, o, 0, std::min(4, o.t2), o.z, 6);
}

// base map for N2: lam = c1 t2 + ... with c1 != 0
template <class F>
TruncSeries<F> random_base_map(Rng& rng, const Orders& o) {
    TruncSeries<F> lam(o);
    lam.at(0, 1, 0) = random_nonzero_scalar<F>(rng, false);
    for (int k2 = 2; k2 <= std::min(3, o.t2); ++k2)
        if (uniform(rng, 0, 1) == 0) lam.at(0, k2, 0) = random_scalar<F>(rng, false);
    return lam;
}

// ---------------------------------------------------------------------------
// dense linear-algebra oracle: exact Gaussian elimination
// ---------------------------------------------------------------------------

// Solves M x = b where M is square and nonsingular. Throws if singular.
template <class G>
std::vector<G> dense_solve(std::vector<std::vector<G>> M, std::vector<G> b);

// Dense oracle for d/dt(ah) + a h' = c: assemble the linear system
// sum_{i+j=N} (N+j) a_i h_j = c_{N-1} over all unknown coefficients of h and
// solve it by elimination. Unknowns run up to the reliable degree.
template <class G>
TruncSeries<G> oracle_sym_ode(const TruncSeries<G>& a, const TruncSeries<G>& c,
                              std::optional<G> h0) {
    const int n2 = a.orders().t2;
    const int o = *a.ord_t2();
    const int top = o == 0 ? n2 : n2 + 1 - o;  // highest solvable h-degree
    const int n_unknowns = top + 1;
    std::vector<std::vector<G>> M(n_unknowns, std::vector<G>(n_unknowns, G::zero()));
    std::vector<G> b(n_unknowns, G::zero());
    int row = 0;
    if (o == 0) {
        M[row][0] = G::one();
        b[row] = *h0;
        ++row;
    }
    for (int N = std::max(1, o); row < n_unknowns; ++N, ++row) {
        for (int j = 0; j <= std::min(N, top); ++j) {
            int i = N - j;
            if (i > n2) continue;
            M[row][j] = a.at(0, i, 0) * G::from_int(N + j);
        }
        if (N - 1 <= n2) b[row] = c.at(0, N - 1, 0);
    }
    auto x = dense_solve(M, b);
    TruncSeries<G> h(a.orders());
    for (int j = 0; j <= top; ++j) h.at(0, j, 0) = x[j];
    return h;
}

// Dense oracle for the coupled system (g1' + g2 h1 + h2 = 0,
// (r + t d/dt) g2 + g1 h3 + h4 = 0): one linear solve in all coefficients.
template <class G>
std::pair<TruncSeries<G>, TruncSeries<G>> oracle_coupled(
    const G& r, const TruncSeries<G>& h1, const TruncSeries<G>& h2,
    const TruncSeries<G>& h3, const TruncSeries<G>& h4, const G& g1_0) {
    const int n2 = h1.orders().t2;
    // unknowns: g1_1..g1_n2 (indices 0..n2-1), then g2_0..g2_n2
    const int n_unknowns = 2 * n2 + 1;
    auto g1_idx = [&](int k) { return k - 1; };
    auto g2_idx = [&](int k) { return n2 + k; };
    std::vector<std::vector<G>> M(n_unknowns, std::vector<G>(n_unknowns, G::zero()));
    std::vector<G> b(n_unknowns, G::zero());
    int row = 0;
    for (int n = 1; n <= n2; ++n, ++row) {  // coefficient n-1 of equation 1
        M[row][g1_idx(n)] = G::from_int(n);
        for (int k = 0; k <= n - 1; ++k)
            M[row][g2_idx(k)] = M[row][g2_idx(k)] + h1.at(0, n - 1 - k, 0);
        b[row] = -h2.at(0, n - 1, 0);
    }
    for (int n = 0; n <= n2; ++n, ++row) {  // coefficient n of equation 2
        M[row][g2_idx(n)] = r + G::from_int(n);
        G rhs = -h4.at(0, n, 0);
        for (int k = 0; k <= n; ++k) {
            if (k == 0)
                rhs = rhs - g1_0 * h3.at(0, n, 0);
            else
                M[row][g1_idx(k)] = M[row][g1_idx(k)] + h3.at(0, n - k, 0);
        }
        b[row] = rhs;
    }
    auto x = dense_solve(M, b);
    TruncSeries<G> g1(h1.orders()), g2(h1.orders());
    g1.at(0, 0, 0) = g1_0;
    for (int k = 1; k <= n2; ++k) g1.at(0, k, 0) = x[g1_idx(k)];
    for (int k = 0; k <= n2; ++k) g2.at(0, k, 0) = x[g2_idx(k)];
    return {g1, g2};
}

template <class F>
std::vector<F> dense_solve(std::vector<std::vector<F>> M, std::vector<F> b) {
    const std::size_t n = M.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && M[piv][col].is_zero()) ++piv;
        if (piv == n) throw std::runtime_error("oracle: singular system");
        std::swap(M[piv], M[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col || M[row][col].is_zero()) continue;
            F factor = M[row][col] / M[col][col];
            for (std::size_t k = col; k < n; ++k)
                M[row][k] = M[row][k] - factor * M[col][k];
            b[row] = b[row] - factor * b[col];
        }
    }
    std::vector<F> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / M[i][i];
    return x;
}

}  // namespace tsup

#pragma once

// Monic orthogonal polynomials of a family and the classical properties they
// must satisfy on the lattice: orthogonality, orthogonality of differences,
// the hypergeometric-type difference equation, the Rodrigues formula, the
// three-term recurrence and the Pade conditions at infinity.

#include <optional>
#include <vector>

#include "families.hpp"
#include "functionals.hpp"
#include "lattice_poly.hpp"

namespace qstieltjes {

template <Scalar T>
struct OrthoBasis {
    std::vector<LatticePoly<T>> polys; // P_0..P_n, monic
    std::vector<T> norms;              // <U, P_k^2>
    std::vector<T> beta;               // x P_k = P_{k+1} + beta_k P_k + gamma_k P_{k-1}
    std::vector<T> gamma;              // gamma_0 = 0

    [[nodiscard]] long n_max() const noexcept { return static_cast<long>(polys.size()) - 1; }
    [[nodiscard]] const LatticePoly<T>& operator[](long k) const { return polys.at(static_cast<std::size_t>(k)); }

    /// P_k(w) through the recurrence. Near the accumulation point 1/(1-q) the
    /// monomial form cancels badly (all roots crowd there); the recurrence does not.
    [[nodiscard]] T value(long k, const T& w) const
    {
        if (k < 0 || k > n_max()) throw Error(ErrorKind::precondition, "degree outside the basis");
        T prev(0), cur(1);
        for (long j = 0; j < k; ++j) {
            T next = (w - beta[j]) * cur;
            if (j > 0) next = next - gamma[j] * prev;
            prev = std::move(cur);
            cur = std::move(next);
        }
        return cur;
    }

    /// Same recurrence on magnitudes: a bound on what rounding in value() can reach.
    [[nodiscard]] T abs_value(long k, const T& w) const
    {
        if (k < 0 || k > n_max()) throw Error(ErrorKind::precondition, "degree outside the basis");
        T prev(0), cur(1);
        for (long j = 0; j < k; ++j) {
            T next = magnitude(T(w - beta[j])) * cur;
            if (j > 0) next = next + magnitude(gamma[j]) * prev;
            prev = std::move(cur);
            cur = std::move(next);
        }
        return cur;
    }
};

/// Largest degree the measure supports: one less than the number of support points.
template <Scalar T>
[[nodiscard]] long max_degree(const Family<T>& fam, long wanted)
{
    if (const auto last = fam.support_last()) return std::min(wanted, *last);
    return wanted;
}

namespace detail {

template <Scalar T>
T inner(const Measure<T>& m, const std::vector<T>& a, const std::vector<T>& b)
{
    T acc(0);
    for (long s = 0; s <= m.last(); ++s) acc = acc + a[s] * b[s] * m.mass.at(s);
    return acc;
}

template <Scalar T>
std::vector<T> sample(const Measure<T>& m, const OrthoBasis<T>& b, long k)
{
    std::vector<T> v;
    v.reserve(static_cast<std::size_t>(m.last() + 1));
    for (long s = 0; s <= m.last(); ++s) v.push_back(b.value(k, m.x.at(s)));
    return v;
}

template <Scalar T>
bool non_positive(const T& v, const QContext<T>& ctx)
{
    return v <= T(0) || ctx.negligible(v);
}

} // namespace detail

/// Recurrence coefficients of a discrete measure.
template <Scalar T>
struct Recurrence {
    std::vector<T> beta;  // beta_k
    std::vector<T> gamma; // gamma_0 = total mass, gamma_k = n_k / n_{k-1}
};

/// Stieltjes procedure: beta_k = <x P_k, P_k>/n_k and gamma_k = n_k/n_{k-1}
/// from lattice inner products, P_k sampled through the recurrence. Accurate
/// in exact mode; in float mode it loses orthogonality once n approaches the
/// number of nodes, which is why build_basis uses rkpw_recurrence.
template <Scalar T>
[[nodiscard]] Recurrence<T> stieltjes_recurrence(const Measure<T>& m, long n_max)
{
    Recurrence<T> r;
    std::vector<T> cur(static_cast<std::size_t>(m.last() + 1), T(1));
    std::vector<T> prev;
    T norm_prev(0);
    for (long k = 0; k <= n_max; ++k) {
        const T norm = detail::inner(m, cur, cur);
        std::vector<T> xcur(cur.size());
        for (long s = 0; s <= m.last(); ++s) xcur[s] = m.x.at(s) * cur[s];
        r.beta.push_back(detail::inner(m, xcur, cur) / norm);
        r.gamma.push_back(k == 0 ? norm : norm / norm_prev);
        norm_prev = norm;
        std::vector<T> nv(cur.size());
        for (long s = 0; s <= m.last(); ++s) {
            nv[s] = (m.x.at(s) - r.beta[k]) * cur[s];
            if (k > 0) nv[s] = nv[s] - r.gamma[k] * prev[s];
        }
        prev = std::move(cur);
        cur = std::move(nv);
    }
    return r;
}

/// Rutishauser-Kahan-Pal-Walker updating: the orthogonal reduction of diag(x)
/// to the Jacobi matrix, adding one node at a time. Stable for discrete measures
/// whose masses span many orders of magnitude; uses field operations only.
template <Scalar T>
[[nodiscard]] Recurrence<T> rkpw_recurrence(const Measure<T>& m, long n_max)
{
    const long count = m.last() + 1;
    if (n_max >= count) throw Error(ErrorKind::precondition, "more recurrence terms than nodes");
    std::vector<T> p0(m.x.values);
    std::vector<T> p1(static_cast<std::size_t>(count), T(0));
    p1[0] = m.mass.at(0);
    for (long n = 1; n < count; ++n) {
        T pn = m.mass.at(n);
        T gam(1), sig(0), t(0);
        const T& lam = m.x.at(n);
        for (long k = 0; k <= n; ++k) {
            const T rho = p1[k] + pn;
            const T tmp = gam * rho;
            const T tsig = sig;
            if (rho <= T(0)) {
                gam = T(1);
                sig = T(0);
            } else {
                gam = p1[k] / rho;
                sig = pn / rho;
            }
            const T tk = sig * (p0[k] - lam) - gam * t;
            p0[k] = p0[k] - (tk - t);
            t = tk;
            pn = sig <= T(0) ? T(tsig * p1[k]) : T(t * t / sig);
            p1[k] = tmp;
        }
    }
    Recurrence<T> r;
    r.beta.assign(p0.begin(), p0.begin() + n_max + 1);
    r.gamma.assign(p1.begin(), p1.begin() + n_max + 1);
    return r;
}

/// Monic orthogonal polynomials P_0..P_{n_max} of the measure,
///   P_{k+1} = (w - beta_k) P_k - gamma_k P_{k-1}.
template <Scalar T>
[[nodiscard]] OrthoBasis<T> build_basis(const Family<T>& fam, const Measure<T>& m, long n_max)
{
    if (const auto last = fam.support_last(); last && n_max > *last)
        throw Error(ErrorKind::precondition, "degree " + std::to_string(n_max) + " needs more than the " +
                                                 std::to_string(*last + 1) + " support points");
    const auto& ctx = fam.ctx();
    const Recurrence<T> rec = rkpw_recurrence(m, n_max);
    OrthoBasis<T> b;
    const LatticePoly<T> w{T(0), T(1)};
    b.polys.push_back(LatticePoly<T>::constant(T(1)));
    for (long k = 0; k <= n_max; ++k) {
        const T norm = k == 0 ? rec.gamma[0] : b.norms[k - 1] * rec.gamma[k];
        if (detail::non_positive(norm, ctx))
            throw Error(ErrorKind::moment_inconsistency, "non-positive norm at degree " + std::to_string(k));
        b.norms.push_back(norm);
        b.beta.push_back(rec.beta[k]);
        b.gamma.push_back(k == 0 ? T(0) : rec.gamma[k]);
        if (k == n_max) break;
        LatticePoly<T> next = (w - LatticePoly<T>::constant(b.beta[k])) * b.polys[k];
        if (k > 0) next = next - b.gamma[k] * b.polys[k - 1];
        b.polys.push_back(next);
    }
    return b;
}

/// Residual normalization |a| / sqrt(n_k n_m). Exact mode has no square root;
/// it uses the arithmetic mean (n_k + n_m)/2, which only matters for nonzero residuals.
template <Scalar T>
[[nodiscard]] T normalized(const T& a, const T& nk, const T& nm)
{
    if constexpr (is_exact_v<T>) {
        return magnitude(a) / ((nk + nm) / T(2));
    } else {
        return magnitude(a) / boost::multiprecision::sqrt(T(nk * nm));
    }
}

/// max_{k != m} |<U, P_k P_m>| / (|P_k| |P_m|). In float mode the denominator
/// is at least sum_s m_s A_k(s) A_m(s), A from abs_value: for strongly skewed
/// masses the sampled values carry more rounding than the norms suggest.
template <Scalar T>
[[nodiscard]] T orthogonality_check(const OrthoBasis<T>& b, const Measure<T>& m)
{
    std::vector<std::vector<T>> vals, mags;
    for (long k = 0; k <= b.n_max(); ++k) {
        vals.push_back(detail::sample(m, b, k));
        std::vector<T> a;
        for (long s = 0; s <= m.last(); ++s) a.push_back(b.abs_value(k, m.x.at(s)));
        mags.push_back(std::move(a));
    }
    T worst(0);
    for (long k = 0; k <= b.n_max(); ++k)
        for (long j = 0; j < k; ++j) {
            const T ip = detail::inner(m, vals[k], vals[j]);
            if constexpr (is_exact_v<T>) {
                worst = max_of(worst, normalized(ip, b.norms[k], b.norms[j]));
            } else {
                const T cond = max_of(T(boost::multiprecision::sqrt(T(b.norms[k] * b.norms[j]))),
                                      detail::inner(m, mags[k], mags[j]));
                worst = max_of(worst, T(magnitude(ip) / cond));
            }
        }
    return worst;
}

/// Orthogonality of Delta P_k / Delta x(s) against rho_1(s) = rho(s+1) sigma(s+1)
/// with weight Delta x(s) = q^s. `omit_sigma` drops sigma(s+1) (negative control).
template <Scalar T>
[[nodiscard]] T diff_orthogonality_check(const OrthoBasis<T>& b, const Family<T>& fam, const Measure<T>& m,
                                         bool omit_sigma = false)
{
    const auto& ctx = fam.ctx();
    const long last = m.last() - 1;
    std::vector<T> w1;
    for (long s = 0; s <= last; ++s) {
        T rho1 = m.rho.at(s + 1);
        if (!omit_sigma) rho1 = rho1 * fam.sigma()(m.x.at(s + 1));
        w1.push_back(rho1 * ctx.rpow(2 * s));
    }
    std::vector<std::vector<T>> diffs;
    for (long k = 0; k <= b.n_max(); ++k) {
        std::vector<T> d;
        for (long s = 0; s <= last; ++s)
            d.push_back((b.value(k, m.x.at(s + 1)) - b.value(k, m.x.at(s))) / ctx.rpow(2 * s));
        diffs.push_back(std::move(d));
    }
    auto pair = [&](long k, long j) {
        T acc(0);
        for (long s = 0; s <= last; ++s) acc = acc + diffs[k][s] * diffs[j][s] * w1[s];
        return acc;
    };
    T worst(0);
    for (long k = 1; k <= b.n_max(); ++k)
        for (long j = 1; j < k; ++j) {
            const T nk = pair(k, k);
            const T nj = pair(j, j);
            if (nk == T(0) || nj == T(0)) continue;
            worst = max_of(worst, normalized(pair(k, j), nk, nj));
        }
    return worst;
}

/// L[y](s) = sigma(s) (1/Delta x(s-1/2)) Delta[nabla y / nabla x](s) + tau(s) Delta y(s)/Delta x(s)
/// on the interior points s = 1..last-1 of a grid function y(s), s = 0..last.
template <Scalar T>
[[nodiscard]] std::vector<T> eqdif_operator(const Family<T>& fam, const std::vector<T>& y)
{
    const auto& ctx = fam.ctx();
    const long last = static_cast<long>(y.size()) - 1;
    std::vector<T> out;
    for (long s = 1; s < last; ++s) {
        const T xs = lattice_x<T>(s, ctx);
        const T g_here = (y[s] - y[s - 1]) / ctx.rpow(2 * s - 2);
        const T g_next = (y[s + 1] - y[s]) / ctx.rpow(2 * s);
        const T second = (g_next - g_here) / ctx.rpow(2 * s - 1);
        const T first = (y[s + 1] - y[s]) / ctx.rpow(2 * s);
        out.push_back(fam.sigma()(xs) * second + fam.tau()(xs) * first);
    }
    return out;
}

template <Scalar T>
struct EigenResult {
    T lambda{0};
    T residual{0};        // max_s |L[P_n] + lambda P_n| / max_s |L[P_n]|
    T lambda_spread{0};   // relative spread of -L[P_n](s)/P_n(s) over non-root points
    T lambda_leading{0};  // from the leading coefficient of L[w^n]
};

/// Grid length for checks on infinite supports. Deep grid points crowd towards
/// 1/(1-q) and nested divided differences there lose about 2 s |log10 q| digits,
/// so the default stays a few points past the degree.
inline long default_grid_last(long n, long grid_last)
{
    return grid_last >= 0 ? std::max(grid_last, n + 3) : n + 6;
}

/// Fits lambda_n in L[P_n] + lambda_n P_n = 0 and reports the residual over the grid.
template <Scalar T>
[[nodiscard]] EigenResult<T> hypergeometric_eq_residual(const OrthoBasis<T>& b, const Family<T>& fam, long n,
                                                        long grid_last = -1)
{
    if (n < 1) throw Error(ErrorKind::precondition, "eigenvalue fit needs n >= 1");
    const auto& ctx = fam.ctx();
    // L[P_n] = -lambda_n P_n is a polynomial identity, so the grid may run past
    // a finite support; it needs n + 1 interior points for the leading term.
    const long last = std::max(fam.support_last().value_or(default_grid_last(n, grid_last)), n + 2);
    std::vector<T> y, mono, xs;
    for (long s = 0; s <= last; ++s) {
        xs.push_back(lattice_x<T>(s, ctx));
        y.push_back(b.value(n, xs.back()));
        mono.push_back(ipow(xs.back(), n));
    }
    const std::vector<T> ly = eqdif_operator(fam, y);
    if (ly.empty()) throw Error(ErrorKind::fit, "grid too small for the difference operator");
    // Fit at the interior point where |P_n| is largest.
    long best = -1;
    for (long i = 0; i < static_cast<long>(ly.size()); ++i)
        if (!fam.ctx().negligible(y[i + 1]) && (best < 0 || magnitude(y[i + 1]) > magnitude(y[best + 1]))) best = i;
    if (best < 0) throw Error(ErrorKind::fit, "every interior grid point is a root of P_n");
    EigenResult<T> out;
    out.lambda = -ly[best] / y[best + 1];
    T worst(0), scale(0), spread(0);
    for (long i = 0; i < static_cast<long>(ly.size()); ++i) {
        worst = max_of(worst, magnitude(T(ly[i] + out.lambda * y[i + 1])));
        scale = max_of(scale, magnitude(ly[i]));
        if (!fam.ctx().negligible(y[i + 1]) && magnitude(y[i + 1]) > magnitude(y[best + 1]) * T(Rational(1, 1000)))
            spread = max_of(spread, relative_residual(T(-ly[i] / y[i + 1]), out.lambda));
    }
    out.residual = scale == T(0) ? T(0) : worst / scale;
    out.lambda_spread = spread;
    // Leading coefficient of L[w^n] as a polynomial in w: n-th divided difference
    // over the first n+1 interior nodes.
    const std::vector<T> lm = eqdif_operator(fam, mono);
    if (static_cast<long>(lm.size()) >= n + 1) {
        std::vector<T> dd(lm.begin(), lm.begin() + n + 1);
        for (long order = 1; order <= n; ++order)
            for (long i = n; i >= order; --i) dd[i] = (dd[i] - dd[i - 1]) / (xs[i + 1] - xs[i + 1 - order]);
        out.lambda_leading = -dd[n];
    }
    return out;
}

/// (1/rho(s)) nabla^{(n)}[rho_n(s)] on s = 0..last with
///   rho_n(s) = rho(s+n) prod_{m=1..n} sigma(s+m),
///   nabla^{(n)} = (nabla/nabla x_1)...(nabla/nabla x_n),  nabla x_k(s) = q^{s+k/2-1},
/// rho extended by zero outside the support. The normalizing constant B_n is left at 1.
template <Scalar T>
[[nodiscard]] GridFunction<T> rodrigues_poly(const Family<T>& fam, long n, long grid_last = -1)
{
    if (n < 0) throw Error(ErrorKind::precondition, "negative Rodrigues order");
    const auto& ctx = fam.ctx();
    const long last = fam.support_last().value_or(default_grid_last(n, grid_last));
    if (last < 0) throw Error(ErrorKind::support, "empty support");
    auto rho = [&](long s) { return fam.in_support(s) ? fam.weight_alt(s) : T(0); };
    // f on s = -n..last, index offset n.
    std::vector<T> f;
    for (long s = -n; s <= last; ++s) {
        T v = rho(s + n);
        for (long m = 1; m <= n && v != T(0); ++m) v = v * fam.sigma()(lattice_x<T>(s + m, ctx));
        f.push_back(v);
    }
    long first = -n;
    for (long k = n; k >= 1; --k) {
        std::vector<T> g;
        for (long s = first + 1; s <= last; ++s) {
            const long i = s - first;
            g.push_back((f[i] - f[i - 1]) / ctx.rpow(2 * s + k - 2));
        }
        f = std::move(g);
        ++first;
    }
    GridFunction<T> out;
    out.first = 0;
    for (long s = 0; s <= last; ++s) out.values.push_back(f[s] / rho(s));
    return out;
}

/// Relative spread of rodrigues(s) / P_n(x(s)) over grid points away from roots.
template <Scalar T>
[[nodiscard]] T rodrigues_proportionality(const GridFunction<T>& rod, const OrthoBasis<T>& b, long n,
                                          const QContext<T>& ctx)
{
    std::vector<T> ratios;
    T peak(0);
    for (long s = rod.first; s <= rod.last(); ++s) peak = max_of(peak, magnitude(b.value(n, lattice_x<T>(s, ctx))));
    for (long s = rod.first; s <= rod.last(); ++s) {
        const T v = b.value(n, lattice_x<T>(s, ctx));
        if (ctx.negligible(v) || magnitude(v) < peak * T(Rational(1, 1000))) continue;
        ratios.push_back(rod.at(s) / v);
    }
    if (ratios.empty()) throw Error(ErrorKind::fit, "no usable grid points for the proportionality fit");
    T worst(0);
    for (const T& r : ratios) worst = max_of(worst, relative_residual(r, ratios.front()));
    return worst;
}

/// The coefficient form of P_0..P_n against the recurrence: max over the grid
/// and k < n_max of |x P_k - P_{k+1} - beta_k P_k - gamma_k P_{k-1}|, each term
/// evaluated from coefficients and the whole normalized by the same sum with
/// every coefficient taken in absolute value.
template <Scalar T>
[[nodiscard]] T ttrr_check(const OrthoBasis<T>& b, const Measure<T>& m)
{
    T worst(0);
    for (long k = 0; k < b.n_max(); ++k) {
        for (long s = 0; s <= m.last(); ++s) {
            const T x = m.x.at(s);
            const T ax = magnitude(x);
            const T lhs = x * b[k](x);
            T rhs = b[k + 1](x) + b.beta[k] * b[k](x);
            T scale = ax * b[k].abs_eval(x) + b[k + 1].abs_eval(x) + magnitude(b.beta[k]) * b[k].abs_eval(x);
            if (k > 0) {
                rhs = rhs + b.gamma[k] * b[k - 1](x);
                scale = scale + magnitude(b.gamma[k]) * b[k - 1].abs_eval(x);
            }
            if (scale != T(0)) worst = max_of(worst, magnitude(T(lhs - rhs)) / scale);
        }
    }
    return worst;
}

template <Scalar T>
struct PadeResult {
    T residual{0};             // max_j |sum_i alpha_i u_{i+j}| / sum_i |alpha_i u_{i+j}|
    LatticePoly<T> numerator;  // Q_{n-1}
};

/// Pade conditions at infinity for P_n with power moments u: the coefficients
/// of z^{-(j+1)}, j < n, in P_n(z) S(z) - Q_{n-1}(z) vanish.
template <Scalar T>
[[nodiscard]] PadeResult<T> pade_check(const LatticePoly<T>& pn, const MomentSequence<T>& u)
{
    const long n = pn.degree();
    if (u.size() < 2 * n) throw Error(ErrorKind::precondition, "pade check needs moments u_0..u_{2n-1}");
    PadeResult<T> out;
    for (long j = 0; j < n; ++j) {
        T acc(0), scale(0);
        for (long i = 0; i <= n; ++i) {
            const T term = pn.coeff(i) * u[i + j];
            acc = acc + term;
            scale = scale + magnitude(term);
        }
        if (scale != T(0)) out.residual = max_of(out.residual, magnitude(acc) / scale);
    }
    // Q_{n-1}(z) = <U_x, (P_n(z) - P_n(x))/(z - x)>: coefficient of z^j is sum_{i>j} alpha_i u_{i-1-j}.
    std::vector<T> q(static_cast<std::size_t>(std::max<long>(n, 0)), T(0));
    for (long j = 0; j < n; ++j)
        for (long i = j + 1; i <= n; ++i) q[j] = q[j] + pn.coeff(i) * u[i - 1 - j];
    out.numerator = LatticePoly<T>(std::move(q));
    return out;
}

} // namespace qstieltjes

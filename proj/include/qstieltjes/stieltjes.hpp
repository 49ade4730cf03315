#pragma once

// The q-Stieltjes function S(z) = <U, 1/(x(z) - x(s))> in three forms (moment
// series, lattice sum, closed hypergeometric) and the residual of the first
// order non-homogeneous difference equation it satisfies:
//
//   nabla[p(z) S(z)] / nabla x(z+1/2) - tau(z) S(z) = C_q.

#include <cmath>
#include <vector>

#include "families.hpp"
#include "functionals.hpp"

namespace qstieltjes {

/// Float mode rejects points closer than this to a pole, measured by |1 - q^s t|.
inline const Rational pole_exclusion{1, 1000000};

/// Throws pole-error when t = q^{-s} (or is too close to it in float mode)
/// for some s in the support.
template <Scalar T>
void require_off_poles(const Family<T>& fam, const EvalPoint<T>& at)
{
    const auto& ctx = fam.ctx();
    const T& t = at.t();
    const auto last = fam.support_last();
    const T half = T(1) / T(2);
    T qs(1);
    for (long s = 0;; ++s) {
        if (last && s > *last) break;
        const T prod = qs * t;
        if (!last && magnitude(prod) < half) break; // |1 - q^s t| >= 1/2 from here on
        const T gap = magnitude(T(T(1) - prod));
        bool hit = false;
        if constexpr (is_exact_v<T>) {
            hit = gap == T(0);
        } else {
            hit = gap < T(pole_exclusion);
        }
        if (hit)
            throw Error(ErrorKind::pole, "evaluation point t = " + format(t) + " sits on the node s = " +
                                             std::to_string(s) + " of " + fam.spec().str());
        qs = qs * ctx.q();
    }
}

/// Lattice sum  sum_s rho(s) q^{s-1/2} / (x(z) - x(s)).
template <Scalar T>
[[nodiscard]] SeriesResult<T> stieltjes_lattice(const Family<T>& fam, const Measure<T>& m, const EvalPoint<T>& at)
{
    require_off_poles(fam, at);
    const auto& ctx = fam.ctx();
    const T& t = at.t();
    const T num = t * (ctx.q() - T(1));
    SeriesResult<T> out;
    T qs(1);
    for (long s = 0; s <= m.last(); ++s) {
        out.value = out.value + m.mass.at(s) * num / (T(1) - qs * t);
        qs = qs * ctx.q();
    }
    out.terms_used = m.last() + 1;
    if (m.truncated) {
        // Past the grid |1 - q^s t| >= 1 - q^{M+1}|t|, which is positive by the pole scan.
        const T gap = T(1) - qs * magnitude(t);
        out.tail_bound = gap > T(0) ? m.tail_mass * magnitude(num) / gap : T(0);
    }
    return out;
}

template <Scalar T>
[[nodiscard]] SeriesResult<T> stieltjes_lattice(const Family<T>& fam, const EvalPoint<T>& at)
{
    return stieltjes_lattice(fam, build_measure(fam), at);
}

/// Partial sum of the formal expansion sum_k u_k^q / (q^k [z]^{(k+1)}) with
///   [z]^{(k)} = (t;q)_k (q-1)^{-k} t^{-k} q^{-k(k-1)/2}.
/// The expansion is asymptotic; tail_bound holds |last term| as a quality
/// indicator, not a certified bound.
template <Scalar T>
[[nodiscard]] SeriesResult<T> stieltjes_series(const Family<T>& fam, const MomentSequence<T>& u,
                                               const EvalPoint<T>& at, long n_terms)
{
    if (n_terms < 1) throw Error(ErrorKind::precondition, "stieltjes series needs at least one term");
    if (u.size() < n_terms) throw Error(ErrorKind::precondition, "not enough moments for the requested terms");
    require_off_poles(fam, at);
    const auto& ctx = fam.ctx();
    const T& q = ctx.q();
    const T& t = at.t();
    SeriesResult<T> out;
    T last(0);
    for (long k = 0; k < n_terms; ++k) {
        const long m = k + 1;
        const T falling = qpochhammer(t, m, ctx) / (ipow(T(q - T(1)), m) * ipow(t, m)) * ctx.rpow(-m * (m - 1));
        last = u[k] / (ipow(q, k) * falling);
        out.value = out.value + last;
    }
    out.terms_used = n_terms;
    out.tail_bound = magnitude(last);
    return out;
}

template <Scalar T>
[[nodiscard]] SeriesResult<T> stieltjes_series(const Family<T>& fam, const EvalPoint<T>& at, long n_terms)
{
    return stieltjes_series(fam, closed_moments(fam, n_terms - 1), at, n_terms);
}

// ---------------------------------------------------------------------------
// The difference equation

template <Scalar T>
struct TheoremResidual {
    T t{0};
    T lhs{0};       // nabla[p S]/nabla x(z+1/2) - tau S, the fitted constant at this t
    T c_q{0};
    T residual{0};  // |lhs - C_q| / max(1, |C_q|)
    T homogeneous{0}; // |lhs| / max(1, |C_q|), the residual with C_q dropped
};

/// Residual of the difference equation at t and q t, using lattice sums for S.
template <Scalar T>
[[nodiscard]] TheoremResidual<T> theorem_residual(const Family<T>& fam, const Measure<T>& m, const EvalPoint<T>& at)
{
    const auto& ctx = fam.ctx();
    const EvalPoint<T> prev = at.shifted(ctx);
    const T s_here = stieltjes_lattice(fam, m, at).value;
    const T s_prev = stieltjes_lattice(fam, m, prev).value;
    const T xz = at.x(ctx);
    const T xz1 = prev.x(ctx);
    const auto& p = fam.p();
    TheoremResidual<T> out;
    out.t = at.t();
    out.lhs = (p(xz) * s_here - p(xz1) * s_prev) / at.nabla_step(ctx) - fam.tau()(xz) * s_here;
    out.c_q = fam.c_constant();
    const T scale = max_of(T(1), magnitude(out.c_q));
    out.residual = magnitude(T(out.lhs - out.c_q)) / scale;
    out.homogeneous = magnitude(out.lhs) / scale;
    return out;
}

template <Scalar T>
[[nodiscard]] TheoremResidual<T> theorem_residual(const Family<T>& fam, const EvalPoint<T>& at)
{
    return theorem_residual(fam, build_measure(fam), at);
}

template <Scalar T>
struct RepresentationReport {
    T lattice{0};
    T closed{0};
    T pretransform{0};
    T closed_vs_lattice{0};
    T pretransform_vs_lattice{0};
    T closed_vs_pretransform{0};
    T ratio{1}; // closed / lattice; equality means 1
    [[nodiscard]] T max_difference() const
    {
        return max_of(closed_vs_lattice, max_of(pretransform_vs_lattice, closed_vs_pretransform));
    }
};

template <Scalar T>
[[nodiscard]] RepresentationReport<T> compare_representations(const Family<T>& fam, const Measure<T>& m,
                                                              const EvalPoint<T>& at)
{
    RepresentationReport<T> out;
    out.lattice = stieltjes_lattice(fam, m, at).value;
    out.closed = fam.stieltjes_closed(at);
    out.pretransform = fam.stieltjes_pretransform(at);
    out.closed_vs_lattice = relative_residual(out.closed, out.lattice);
    out.pretransform_vs_lattice = relative_residual(out.pretransform, out.lattice);
    out.closed_vs_pretransform = relative_residual(out.closed, out.pretransform);
    if (out.lattice != T(0)) out.ratio = out.closed / out.lattice;
    return out;
}

/// Deterministic sample of rational evaluation points: |t| log-spaced in
/// [q^{n+2}, q^{-2}] (n = support length, 6 for infinite supports), every
/// fifth point negated, points with t or q t near a node nudged away.
template <Scalar T>
[[nodiscard]] std::vector<Rational> sample_points(const Family<T>& fam, long count)
{
    const double q = fam.spec().q.template convert_to<double>();
    const long n = fam.support_last().value_or(5) + 1;
    const double lo = std::log(q) * static_cast<double>(n + 2);
    const double hi = -2.0 * std::log(q);
    const long den = 4096;
    std::vector<Rational> out;
    for (long i = 0; i < count; ++i) {
        const double e = count == 1 ? 0.0 : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
        double t = std::exp(e);
        auto near_node = [&](double v) {
            for (long s = 0; s < 64; ++s) {
                const double g = std::abs(1.0 - std::pow(q, static_cast<double>(s)) * v);
                if (g < 1e-3) return true;
            }
            return false;
        };
        int guard = 0;
        while ((near_node(t) || near_node(q * t)) && guard++ < 100) t *= 1.0 + 1.0 / 37.0;
        Rational r(static_cast<long long>(std::llround(t * den)), den);
        if (r == 0) r = Rational(1, den);
        if (i % 5 == 4) r = -r;
        out.push_back(r);
    }
    return out;
}

} // namespace qstieltjes

#pragma once

// Lattice geometry and q-calculus primitives on x(s) = (q^s - 1)/(q - 1).

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "context.hpp"
#include "errors.hpp"
#include "scalar.hpp"

namespace qstieltjes {

/// Value of a (possibly truncated) sum or product. tail_bound is an absolute
/// bound on what the truncation left out; zero for finite computations.
template <Scalar T>
struct SeriesResult {
    T value{0};
    long terms_used = 0;
    T tail_bound{0};
};

// ---------------------------------------------------------------------------
// Lattice

/// x(s) given q^s.
template <Scalar T>
[[nodiscard]] T lattice_x_from_power(const T& q_to_s, const QContext<T>& ctx)
{
    return (q_to_s - T(1)) / (ctx.q() - T(1));
}

template <Scalar T>
[[nodiscard]] T lattice_x(const Rational& s, const QContext<T>& ctx)
{
    return lattice_x_from_power(ctx.qpow(s), ctx);
}

template <Scalar T>
[[nodiscard]] T lattice_x(long s, const QContext<T>& ctx)
{
    return lattice_x_from_power(ctx.rpow(2 * s), ctx);
}

/// x(s + 1/2) - x(s - 1/2) = q^{s - 1/2}; the mass factor of the lattice sums.
template <Scalar T>
[[nodiscard]] T lattice_step(long s, const QContext<T>& ctx)
{
    return ctx.rpow(2 * s - 1);
}

/// Off-lattice evaluation point, parameterized by t = q^{-z} so that every
/// derived quantity is rational in t and q^{1/2}.
template <Scalar T>
class EvalPoint {
public:
    EvalPoint() = default;
    explicit EvalPoint(T t) : t_(std::move(t))
    {
        if (t_ == T(0)) throw Error(ErrorKind::precondition, "evaluation point t = q^{-z} must be nonzero");
    }

    [[nodiscard]] const T& t() const noexcept { return t_; }

    /// x(z) = (1 - t)/(t (q - 1)).
    [[nodiscard]] T x(const QContext<T>& ctx) const { return (T(1) - t_) / (t_ * (ctx.q() - T(1))); }

    /// q^{1-z} = q t.
    [[nodiscard]] T q_one_minus_z(const QContext<T>& ctx) const { return ctx.q() * t_; }

    /// The point z - 1, i.e. t -> q t.
    [[nodiscard]] EvalPoint shifted(const QContext<T>& ctx) const { return EvalPoint(ctx.q() * t_); }

    /// grad x(z + 1/2) = q^{z - 1/2} = q^{-1/2}/t.
    [[nodiscard]] T nabla_step(const QContext<T>& ctx) const { return T(1) / (ctx.r() * t_); }

    /// x(z) - x(s) = (1 - q^s t)/(t (q - 1)).
    [[nodiscard]] T distance_to_node(long s, const QContext<T>& ctx) const
    {
        return (T(1) - ctx.rpow(2 * s) * t_) / (t_ * (ctx.q() - T(1)));
    }

private:
    T t_{1};
};

// ---------------------------------------------------------------------------
// q-numbers, factorials, Pochhammer symbols

/// Symmetric q-number [s]_q = (q^{s/2} - q^{-s/2})/(q^{1/2} - q^{-1/2}).
template <Scalar T>
[[nodiscard]] T qnumber(const Rational& s, const QContext<T>& ctx)
{
    return (ctx.qpow(s / 2) - ctx.qpow(-s / 2)) / (ctx.r() - T(1) / ctx.r());
}

template <Scalar T>
[[nodiscard]] T qnumber(long s, const QContext<T>& ctx)
{
    return (ctx.rpow(s) - ctx.rpow(-s)) / (ctx.r() - T(1) / ctx.r());
}

template <Scalar T>
[[nodiscard]] T qfactorial(long n, const QContext<T>& ctx)
{
    if (n < 0) throw Error(ErrorKind::precondition, "q-factorial of a negative integer");
    T result(1);
    for (long k = 2; k <= n; ++k) result = result * qnumber(k, ctx);
    return result;
}

/// (a; q)_k = prod_{j<k} (1 - a q^j).
template <Scalar T>
[[nodiscard]] T qpochhammer(const T& a, long k, const QContext<T>& ctx)
{
    if (k < 0) throw Error(ErrorKind::precondition, "negative Pochhammer length");
    T result(1);
    T term = a;
    for (long j = 0; j < k; ++j) {
        result = result * (T(1) - term);
        term = term * ctx.q();
    }
    return result;
}

/// (a; q)_infinity, float mode only. The truncation stops once the bound on
/// the omitted factors, |log prod_{j>=J}(1 - a q^j)| <= |a q^J| / ((1-q)(1-|a q^J|)),
/// is far below tol; the absolute tail bound is recorded.
template <Scalar T>
[[nodiscard]] SeriesResult<T> qpochhammer_inf(const T& a, const QContext<T>& ctx, long max_factors = 1000000)
{
    if constexpr (is_exact_v<T>) {
        throw Error(ErrorKind::unsupported_exact_input, "infinite q-Pochhammer product in exact mode");
    } else {
        const T q = ctx.q();
        const T target = ctx.tol() / T(1000);
        SeriesResult<T> out;
        out.value = T(1);
        T term = a;
        for (long j = 0; j < max_factors; ++j) {
            const T m = magnitude(term);
            if (m < T(1) / T(2)) {
                const T log_bound = m / ((T(1) - q) * (T(1) - m));
                if (log_bound < target) {
                    out.terms_used = j;
                    out.tail_bound = T(2) * log_bound * magnitude(out.value);
                    return out;
                }
            }
            out.value = out.value * (T(1) - term);
            term = term * q;
        }
        throw Error(ErrorKind::truncation, "infinite product did not reach tolerance");
    }
}

/// q-falling factorial [s]_q^{(k)} = prod_{j<k} x(s - j).
template <Scalar T>
[[nodiscard]] T qfalling(const Rational& s, long k, const QContext<T>& ctx)
{
    if (k < 0) throw Error(ErrorKind::precondition, "negative falling-factorial order");
    T result(1);
    for (long j = 0; j < k; ++j) result = result * lattice_x(s - j, ctx);
    return result;
}

/// The same quantity through (q^{-s}; q)_k (q-1)^{-k} q^{k(s-(k-1)/2)}.
template <Scalar T>
[[nodiscard]] T qfalling_pochhammer(const Rational& s, long k, const QContext<T>& ctx)
{
    if (k == 0) return T(1);
    const T base = qpochhammer(ctx.qpow(-s), k, ctx) / ipow(T(ctx.q() - T(1)), k);
    return base * ctx.qpow(Rational(k) * (s - Rational(k - 1, 2)));
}

template <Scalar T>
[[nodiscard]] T qfalling(long s, long k, const QContext<T>& ctx)
{
    if (k < 0) throw Error(ErrorKind::precondition, "negative falling-factorial order");
    T result(1);
    for (long j = 0; j < k; ++j) result = result * lattice_x(s - j, ctx);
    return result;
}

// ---------------------------------------------------------------------------
// q-Gamma

/// Gamma_q(s) = (1-q)^{1-s} (q;q)_inf / (q^s;q)_inf; finite product for positive integers.
template <Scalar T>
[[nodiscard]] T qgamma(const Rational& s, const QContext<T>& ctx)
{
    if (denominator(s) == 1) {
        const long n = static_cast<long>(numerator(s));
        if (n <= 0) throw Error(ErrorKind::pole, "Gamma_q has a pole at " + qstieltjes::to_string(s));
        return qpochhammer(ctx.q(), n - 1, ctx) / ipow(T(T(1) - ctx.q()), n - 1);
    }
    if constexpr (is_exact_v<T>) {
        throw Error(ErrorKind::unsupported_exact_input, "Gamma_q at a non-integer argument");
    } else {
        const T num = qpochhammer_inf(ctx.q(), ctx).value;
        const T den = qpochhammer_inf(ctx.qpow(s), ctx).value;
        return boost::multiprecision::pow(T(T(1) - ctx.q()), T(Rational(1) - s)) * num / den;
    }
}

/// Gamma~_q(s) = q^{-(s-1)(s-2)/4} Gamma_q(s) for 0 < q < 1.
template <Scalar T>
[[nodiscard]] T qgamma_tilde(const Rational& s, const QContext<T>& ctx)
{
    return ctx.qpow(-(s - 1) * (s - 2) / 4) * qgamma(s, ctx);
}

// ---------------------------------------------------------------------------
// q-exponential e_q(z) = sum z^n / (q;q)_n

/// Sum of the first n_terms terms with a rigorous tail bound. The term ratio
/// z/(1 - q^{n+1}) decreases in magnitude, so the current ratio bounds all later ones.
template <Scalar T>
[[nodiscard]] SeriesResult<T> qexp_partial(const T& z, long n_terms, const QContext<T>& ctx)
{
    if (n_terms < 1) throw Error(ErrorKind::precondition, "qexp_partial needs at least one term");
    SeriesResult<T> out;
    T term(1);
    T qn = ctx.q(); // q^{n+1} for the ratio after term n
    for (long n = 0; n < n_terms; ++n) {
        out.value = out.value + term;
        term = term * z / (T(1) - qn);
        qn = qn * ctx.q();
    }
    out.terms_used = n_terms;
    const T ratio = magnitude(z) / (T(1) - qn);
    if (!(ratio < T(1))) throw Error(ErrorKind::truncation, "too few terms for a q-exponential tail bound");
    out.tail_bound = magnitude(term) / (T(1) - ratio);
    return out;
}

/// e_q(z) for |z| < 1 in float mode, summed until the tail bound is below tol.
template <Scalar T>
[[nodiscard]] SeriesResult<T> qexp(const T& z, const QContext<T>& ctx, long max_terms = 1000000)
{
    if (!(magnitude(z) < T(1))) throw Error(ErrorKind::divergence, "e_q(z) requires |z| < 1");
    if constexpr (is_exact_v<T>) {
        throw Error(ErrorKind::unsupported_exact_input, "e_q is an infinite series; use qexp_partial in exact mode");
    } else {
        SeriesResult<T> out;
        T term(1);
        T qn = ctx.q();
        const T target = ctx.tol() / T(1000);
        for (long n = 0; n < max_terms; ++n) {
            out.value = out.value + term;
            term = term * z / (T(1) - qn);
            qn = qn * ctx.q();
            const T ratio = magnitude(z) / (T(1) - qn);
            if (!(ratio < T(1))) continue; // early terms may still grow
            const T tail = magnitude(term) / (T(1) - ratio);
            if (tail <= target * magnitude(out.value)) {
                out.terms_used = n + 1;
                out.tail_bound = tail;
                return out;
            }
        }
        throw Error(ErrorKind::truncation, "e_q did not reach tolerance");
    }
}

// ---------------------------------------------------------------------------
// Adaptive summation of slowly-known infinite sums (lattice sums over an
// infinite support, non-terminating hypergeometric series).

/// Sums term(k) for k = first, first+1, ... until `quiet_run` consecutive terms
/// are each below tol*|partial| with an observed term ratio below one, then adds
/// a geometric tail estimate built from the largest recent ratio.
template <Scalar T, class TermFn>
[[nodiscard]] SeriesResult<T> sum_adaptive(TermFn&& term, const QContext<T>& ctx, long first = 0,
                                           long max_terms = 200000, int quiet_run = 10)
{
    if constexpr (is_exact_v<T>) {
        throw Error(ErrorKind::unsupported_exact_input, "adaptive infinite summation in exact mode");
    } else {
        SeriesResult<T> out;
        const T target = ctx.tol() / T(1000);
        std::deque<T> recent;
        int quiet = 0;
        T previous(0);
        for (long k = first; k < first + max_terms; ++k) {
            const T t = term(k);
            out.value = out.value + t;
            const T m = magnitude(t);
            if (k > first && previous != T(0)) {
                recent.push_back(m / previous);
                if (recent.size() > static_cast<std::size_t>(quiet_run)) recent.pop_front();
            }
            previous = m;
            if (m <= target * magnitude(out.value)) {
                ++quiet;
            } else {
                quiet = 0;
            }
            if (quiet >= quiet_run) {
                T ratio(0);
                for (const T& r : recent) ratio = max_of(ratio, r);
                if (m == T(0)) {
                    out.terms_used = k - first + 1;
                    return out;
                }
                if (ratio < T(1)) {
                    out.terms_used = k - first + 1;
                    out.tail_bound = m * ratio / (T(1) - ratio);
                    return out;
                }
            }
        }
        throw Error(ErrorKind::truncation, "series did not settle within " + std::to_string(max_terms) + " terms");
    }
}

// ---------------------------------------------------------------------------
// Grid functions and lattice differences

/// Samples f(s) on s = first..first+size-1. Truncated infinite supports record
/// the omitted mass in tail_bound.
template <Scalar T>
struct GridFunction {
    long first = 0;
    std::vector<T> values;
    T tail_bound{0};

    [[nodiscard]] long size() const noexcept { return static_cast<long>(values.size()); }
    [[nodiscard]] long last() const noexcept { return first + size() - 1; }
    [[nodiscard]] bool contains(long s) const noexcept { return s >= first && s <= last(); }
    [[nodiscard]] const T& at(long s) const
    {
        if (!contains(s)) throw Error(ErrorKind::support, "grid point " + std::to_string(s) + " outside support");
        return values[static_cast<std::size_t>(s - first)];
    }

    template <class F>
    static GridFunction sample(long first, long last, F&& f)
    {
        GridFunction g;
        g.first = first;
        g.values.reserve(static_cast<std::size_t>(last - first + 1));
        for (long s = first; s <= last; ++s) g.values.push_back(f(s));
        return g;
    }
};

/// Delta f(s) = (f(s+1) - f(s)) / (x(s+1/2) - x(s-1/2)), on first..last-1.
template <Scalar T>
[[nodiscard]] GridFunction<T> fwd_diff(const GridFunction<T>& f, const QContext<T>& ctx)
{
    if (f.size() < 2) throw Error(ErrorKind::support, "forward difference needs at least two points");
    return GridFunction<T>::sample(f.first, f.last() - 1,
                                   [&](long s) { return (f.at(s + 1) - f.at(s)) / lattice_step(s, ctx); });
}

/// nabla f(s) = (f(s) - f(s-1)) / (x(s+1/2) - x(s-1/2)), on first+1..last.
template <Scalar T>
[[nodiscard]] GridFunction<T> bwd_diff(const GridFunction<T>& f, const QContext<T>& ctx)
{
    if (f.size() < 2) throw Error(ErrorKind::support, "backward difference needs at least two points");
    return GridFunction<T>::sample(f.first + 1, f.last(),
                                   [&](long s) { return (f.at(s) - f.at(s - 1)) / lattice_step(s, ctx); });
}

} // namespace qstieltjes

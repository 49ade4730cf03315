#pragma once

// Basic hypergeometric series r_phi_s and the transformation identities used
// to move between the closed forms of the q-Stieltjes functions.
//
// Convention (pinned by tests, other texts differ):
//   r_phi_s(a; b; q, z) = sum_k prod(a_i;q)_k / prod(b_j;q)_k
//                               * [(-1)^k q^{k(k-1)/2}]^{1+s-r} * z^k / (q;q)_k

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "context.hpp"
#include "qcore.hpp"

namespace qstieltjes {

template <Scalar T>
struct HyperSpec {
    std::vector<T> upper;
    std::vector<T> lower;
    T z{0};
};

/// Evaluates r_phi_s term by term through the term ratio. Terminating series
/// (some 1 - a_i q^k vanishing) are summed exactly; the others need float mode
/// and stop on a rigorous geometric tail bound.
template <Scalar T>
[[nodiscard]] SeriesResult<T> eval_hyper(const HyperSpec<T>& spec, const QContext<T>& ctx, long max_terms = 200000)
{
    const long r = static_cast<long>(spec.upper.size());
    const long s = static_cast<long>(spec.lower.size());
    const long e = 1 + s - r;
    const T& q = ctx.q();

    SeriesResult<T> out;
    out.value = T(1);
    out.terms_used = 1;
    if (spec.z == T(0)) return out;
    if constexpr (is_exact_v<T>) {
        // Some upper parameter must be q^{-m}; otherwise the loop below would
        // grind through max_terms ever larger rationals.
        bool finite = false;
        for (const T& a : spec.upper) {
            T v = a;
            for (long m = 0; m < max_terms && !finite && v >= T(1); ++m) {
                if (v == T(1)) finite = true;
                v = v * q;
            }
        }
        if (!finite)
            throw Error(ErrorKind::unsupported_exact_input, "non-terminating basic hypergeometric series in exact mode");
    }

    T term(1);
    T qk(1); // q^k
    const T target = ctx.tol() / T(1000);
    for (long k = 0; k < max_terms; ++k) {
        T num(1);
        bool terminates = false;
        for (const T& a : spec.upper) {
            const T f = T(1) - a * qk;
            if (ctx.negligible(f)) terminates = true;
            num = num * f;
        }
        if (terminates) {
            out.terms_used = k + 1;
            out.tail_bound = T(0);
            return out;
        }
        T den = T(1) - qk * q;
        for (const T& b : spec.lower) {
            const T f = T(1) - b * qk;
            if (ctx.negligible(f))
                throw Error(ErrorKind::pole, "lower parameter hits (b;q)_k = 0 before the series terminates");
            den = den * f;
        }
        T ratio = num / den * spec.z;
        if (e != 0) ratio = ratio * ipow(T(-qk), e);
        term = term * ratio;
        out.value = out.value + term;
        qk = qk * q;

        if constexpr (is_exact_v<T>) {
            continue;
        } else {
            if (e < 0 || (e == 0 && !(magnitude(spec.z) < T(1)))) {
                // Term ratios tend to infinity or to |z| >= 1.
                if (k > 64) throw Error(ErrorKind::divergence, "non-terminating series with divergent term ratio");
                continue;
            }
            // Upper bound on every later |ratio| once all |b_j| q^k < 1: each factor
            // below is monotone in k.
            bool bounded = true;
            T bound = magnitude(spec.z) / (T(1) - qk * q);
            for (const T& a : spec.upper) bound = bound * (T(1) + magnitude(a) * qk);
            for (const T& b : spec.lower) {
                const T m = magnitude(b) * qk;
                if (!(m < T(1))) {
                    bounded = false;
                    break;
                }
                bound = bound / (T(1) - m);
            }
            if (!bounded) continue;
            if (e > 0) bound = bound * ipow(qk, e);
            if (bound < T(1)) {
                const T tail = magnitude(term) * bound / (T(1) - bound);
                if (tail <= target * magnitude(out.value) || tail == T(0)) {
                    out.terms_used = k + 2;
                    out.tail_bound = tail;
                    return out;
                }
            }
        }
    }
    if constexpr (is_exact_v<T>) {
        throw Error(ErrorKind::unsupported_exact_input, "non-terminating basic hypergeometric series in exact mode");
    } else {
        throw Error(ErrorKind::divergence, "series did not converge within " + std::to_string(max_terms) + " terms");
    }
}

template <Scalar T>
[[nodiscard]] T hyper(std::vector<T> upper, std::vector<T> lower, T z, const QContext<T>& ctx)
{
    return eval_hyper(HyperSpec<T>{std::move(upper), std::move(lower), std::move(z)}, ctx).value;
}

// ---------------------------------------------------------------------------
// Transformation identities

enum class IdentityTag {
    chu_vandermonde,
    heine,
    jackson,
    q_binomial,
    phi32,
    pochhammer_shift,
};

inline constexpr std::array<IdentityTag, 6> all_identities = {
    IdentityTag::chu_vandermonde, IdentityTag::heine, IdentityTag::jackson,
    IdentityTag::q_binomial,      IdentityTag::phi32, IdentityTag::pochhammer_shift,
};

constexpr std::string_view to_string(IdentityTag tag) noexcept
{
    switch (tag) {
    case IdentityTag::chu_vandermonde: return "chu-vandermonde";
    case IdentityTag::heine: return "heine";
    case IdentityTag::jackson: return "jackson";
    case IdentityTag::q_binomial: return "q-binomial";
    case IdentityTag::phi32: return "phi32";
    case IdentityTag::pochhammer_shift: return "pochhammer-shift";
    }
    return "";
}

inline std::optional<IdentityTag> parse_identity(std::string_view name)
{
    for (IdentityTag tag : all_identities)
        if (to_string(tag) == name) return tag;
    return std::nullopt;
}

/// Parameters shared by all identities; each identity reads the fields it needs.
///   chu-vandermonde : n, b, c          2phi1(q^-n, b; c; q, q^n c/b) = (c/b;q)_n / (c;q)_n
///   heine           : a, c, z          2phi1(a, 0; c; q, z) = e_q(z) 1phi1(c/a; c; q, a z)
///   jackson         : a (or n), b, c, z
///                     2phi1(a, b; c; q, z) = (az;q)_inf/(z;q)_inf 2phi2(a, c/b; c, az; q, b z)
///   q-binomial      : a (or n), z      1phi0(a; -; q, z) = (az;q)_inf / (z;q)_inf
///   phi32           : n, a, b, c, d    3phi2(q^-n, a, b; c, d; q, q)
///                     = b^n (d/b;q)_n/(d;q)_n 3phi2(q^-n, b, c/a; c, q^{1-n} b/d; q, a q/d)
///   pochhammer-shift: n, a             (a q^-n;q)_n = (q/a;q)_n (-a)^n q^{-n(n+1)/2}
/// For jackson and q-binomial, n > 0 replaces a by q^-n and the infinite
/// product ratio by the finite (q^-n z;q)_n, which keeps exact mode available.
template <Scalar T>
struct IdentityParams {
    T a{0};
    T b{0};
    T c{0};
    T d{0};
    T z{0};
    long n = 0;
};

template <Scalar T>
struct IdentityResult {
    T lhs{0};
    T rhs{0};
    T residual{0};
};

/// |lhs - rhs| / max(|lhs|, |rhs|, 1).
template <Scalar T>
[[nodiscard]] T relative_residual(const T& lhs, const T& rhs)
{
    const T scale = max_of(T(1), max_of(magnitude(lhs), magnitude(rhs)));
    return magnitude(T(lhs - rhs)) / scale;
}

namespace detail {

template <Scalar T>
void require(bool ok, std::string_view what)
{
    if (!ok) throw Error(ErrorKind::precondition, std::string(what));
}

template <Scalar T>
T product_ratio(const IdentityParams<T>& p, const T& a, const QContext<T>& ctx)
{
    if (p.n > 0) return qpochhammer(T(ctx.rpow(-2 * p.n) * p.z), p.n, ctx);
    return qpochhammer_inf(T(a * p.z), ctx).value / qpochhammer_inf(p.z, ctx).value;
}

} // namespace detail

template <Scalar T>
[[nodiscard]] IdentityResult<T> verify_identity(IdentityTag tag, const IdentityParams<T>& p, const QContext<T>& ctx)
{
    using detail::require;
    const T& q = ctx.q();
    IdentityResult<T> out;
    switch (tag) {
    case IdentityTag::chu_vandermonde: {
        require<T>(p.n >= 0, "chu-vandermonde needs n >= 0");
        require<T>(p.b != T(0), "chu-vandermonde needs b != 0");
        const T cpoch = qpochhammer(p.c, p.n, ctx);
        require<T>(!ctx.negligible(cpoch), "chu-vandermonde needs (c;q)_n != 0");
        const T qmn = ctx.rpow(-2 * p.n);
        out.lhs = hyper<T>({qmn, p.b}, {p.c}, ctx.rpow(2 * p.n) * p.c / p.b, ctx);
        out.rhs = qpochhammer(T(p.c / p.b), p.n, ctx) / cpoch;
        break;
    }
    case IdentityTag::heine: {
        require<T>(p.a != T(0), "heine needs a != 0");
        require<T>(magnitude(p.z) < T(1), "heine needs |z| < 1");
        out.lhs = hyper<T>({p.a, T(0)}, {p.c}, p.z, ctx);
        out.rhs = qexp(p.z, ctx).value * hyper<T>({p.c / p.a}, {p.c}, p.a * p.z, ctx);
        break;
    }
    case IdentityTag::jackson: {
        require<T>(p.b != T(0), "jackson needs b != 0");
        const T a = p.n > 0 ? ctx.rpow(-2 * p.n) : p.a;
        require<T>(p.n > 0 || magnitude(p.z) < T(1), "jackson needs |z| < 1 for a non-terminating 2phi1");
        out.lhs = hyper<T>({a, p.b}, {p.c}, p.z, ctx);
        out.rhs = detail::product_ratio(p, a, ctx) * hyper<T>({a, p.c / p.b}, {p.c, a * p.z}, p.b * p.z, ctx);
        break;
    }
    case IdentityTag::q_binomial: {
        const T a = p.n > 0 ? ctx.rpow(-2 * p.n) : p.a;
        require<T>(p.n > 0 || magnitude(p.z) < T(1), "q-binomial theorem needs |z| < 1");
        out.lhs = hyper<T>({a}, {}, p.z, ctx);
        out.rhs = detail::product_ratio(p, a, ctx);
        break;
    }
    case IdentityTag::phi32: {
        require<T>(p.n >= 0, "phi32 needs a terminating parameter q^-n, n >= 0");
        require<T>(p.a != T(0) && p.b != T(0) && p.d != T(0), "phi32 needs a, b, d != 0");
        const T dpoch = qpochhammer(p.d, p.n, ctx);
        require<T>(!ctx.negligible(dpoch), "phi32 needs (d;q)_n != 0");
        const T qmn = ctx.rpow(-2 * p.n);
        out.lhs = hyper<T>({qmn, p.a, p.b}, {p.c, p.d}, q, ctx);
        const T pre = ipow(p.b, p.n) * qpochhammer(T(p.d / p.b), p.n, ctx) / dpoch;
        out.rhs = pre * hyper<T>({qmn, p.b, p.c / p.a}, {p.c, ctx.rpow(2 - 2 * p.n) * p.b / p.d}, p.a * q / p.d, ctx);
        break;
    }
    case IdentityTag::pochhammer_shift: {
        require<T>(p.a != T(0), "pochhammer-shift needs a != 0");
        require<T>(p.n >= 0, "pochhammer-shift needs n >= 0");
        out.lhs = qpochhammer(T(p.a * ctx.rpow(-2 * p.n)), p.n, ctx);
        out.rhs = qpochhammer(T(q / p.a), p.n, ctx) * ipow(T(-p.a), p.n) * ctx.rpow(-p.n * (p.n + 1));
        break;
    }
    }
    out.residual = relative_residual(out.lhs, out.rhs);
    return out;
}

} // namespace qstieltjes

#pragma once

// The moment functional <U, f> = sum_s f(s) rho(s) q^{s-1/2} realized as a
// lattice sum, and the checks that live on it: Pearson equations, boundary
// condition, summation by parts and the three-term moment recurrence.

#include <algorithm>
#include <array>
#include <concepts>
#include <string>
#include <vector>

#include "families.hpp"
#include "lattice_poly.hpp"
#include "qcore.hpp"

namespace qstieltjes {

/// rho and the masses rho(s) q^{s-1/2} on s = 0..M. For infinite supports M
/// is chosen adaptively and tail_mass bounds the omitted masses.
template <Scalar T>
struct Measure {
    GridFunction<T> rho;
    GridFunction<T> mass;
    GridFunction<T> x; // lattice nodes x(s)
    T tail_mass{0};
    T tail_ratio{0}; // bound on mass(s+1)/mass(s) beyond M
    bool truncated = false;

    [[nodiscard]] long last() const noexcept { return rho.last(); }
    [[nodiscard]] T rho_or_zero(long s) const { return rho.contains(s) ? rho.at(s) : T(0); }
};

/// Builds the measure of a family. Infinite supports grow until ten
/// consecutive masses are below 1e-12 tol relative to the running total and
/// the tail ratio bound is below one; `min_last` forces a longer grid.
template <Scalar T>
[[nodiscard]] Measure<T> build_measure(const Family<T>& fam, long min_last = 0, long max_points = 20000)
{
    const auto& ctx = fam.ctx();
    Measure<T> m;
    m.rho.first = m.mass.first = m.x.first = 0;
    auto push = [&](long s, const T& rho) {
        m.rho.values.push_back(rho);
        m.mass.values.push_back(rho * lattice_step(s, ctx));
        m.x.values.push_back(lattice_x<T>(s, ctx));
    };
    if (const auto last = fam.support_last()) {
        for (long s = 0; s <= *last; ++s) push(s, fam.weight_alt(s));
        return m;
    }
    if constexpr (is_exact_v<T>) {
        throw Error(ErrorKind::unsupported_exact_input, "infinite support in exact mode");
    } else {
        const T target = ctx.tol() * T(Rational(1, 1000000000000LL));
        T rho = fam.weight_alt(0);
        T total(0);
        int quiet = 0;
        for (long s = 0; s < max_points; ++s) {
            push(s, rho);
            total = total + m.mass.values.back();
            quiet = magnitude(m.mass.values.back()) <= target * magnitude(total) ? quiet + 1 : 0;
            if (quiet >= 10 && s >= min_last) {
                const T ratio = fam.tail_ratio_bound(s) * ctx.q();
                if (ratio < T(1)) {
                    m.truncated = true;
                    m.tail_ratio = ratio;
                    m.tail_mass = magnitude(m.mass.values.back()) * ratio / (T(1) - ratio);
                    return m;
                }
            }
            rho = rho * fam.weight_ratio(s);
        }
        throw Error(ErrorKind::truncation, "measure of " + fam.spec().str() + " did not settle within " +
                                               std::to_string(max_points) + " points");
    }
}

// ---------------------------------------------------------------------------
// Moments

enum class MomentBasis { q_falling, power };
enum class Provenance { closed_form, brute_force };

constexpr std::string_view to_string(Provenance p) noexcept
{
    return p == Provenance::closed_form ? "closed-form" : "brute-force";
}
constexpr std::string_view to_string(MomentBasis b) noexcept
{
    return b == MomentBasis::q_falling ? "q-falling" : "power";
}

template <Scalar T>
struct MomentSequence {
    std::vector<T> values;
    MomentBasis basis = MomentBasis::q_falling;
    Provenance provenance = Provenance::closed_form;
    T tail_bound{0};       // absolute bound on the truncation error of each value
    long truncation_last = -1; // last grid point summed; -1 for closed forms

    [[nodiscard]] long size() const noexcept { return static_cast<long>(values.size()); }
    [[nodiscard]] const T& operator[](long k) const { return values.at(static_cast<std::size_t>(k)); }
};

/// <U, f> for a callable f(s).
template <Scalar T, class F>
    requires std::invocable<F&, long>
[[nodiscard]] T apply_functional(const Measure<T>& m, F&& f)
{
    T acc(0);
    for (long s = 0; s <= m.last(); ++s) acc = acc + f(s) * m.mass.at(s);
    return acc;
}

/// <U, f> for f sampled on a grid that must cover the measure.
template <Scalar T>
[[nodiscard]] T apply_functional(const Measure<T>& m, const GridFunction<T>& f)
{
    if (f.first > 0 || f.last() < m.last())
        throw Error(ErrorKind::support, "grid function does not cover the support of the measure");
    return apply_functional(m, [&](long s) { return f.at(s); });
}

/// Bound on |x(s)| over the whole lattice s >= 0, used to scale tail bounds.
template <Scalar T>
[[nodiscard]] T lattice_bound(const QContext<T>& ctx)
{
    return T(1) / (T(1) - ctx.q());
}

template <Scalar T>
[[nodiscard]] MomentSequence<T> bruteforce_qmoments(const Measure<T>& m, long k_max, const QContext<T>& ctx)
{
    MomentSequence<T> out;
    out.provenance = Provenance::brute_force;
    out.truncation_last = m.last();
    out.values.assign(static_cast<std::size_t>(k_max + 1), T(0));
    for (long s = 0; s <= m.last(); ++s) {
        T falling(1);
        for (long k = 0; k <= k_max; ++k) {
            if (k > 0) falling = falling * lattice_x<T>(s - k + 1, ctx);
            if (falling == T(0)) break;
            out.values[static_cast<std::size_t>(k)] = out.values[static_cast<std::size_t>(k)] + falling * m.mass.at(s);
        }
    }
    out.tail_bound = m.tail_mass * ipow(lattice_bound(ctx), k_max);
    return out;
}

template <Scalar T>
[[nodiscard]] T bruteforce_qmoment(const Family<T>& fam, long k)
{
    const Measure<T> m = build_measure(fam);
    return bruteforce_qmoments(m, k, fam.ctx()).values.back();
}

template <Scalar T>
[[nodiscard]] MomentSequence<T> closed_moments(const Family<T>& fam, long k_max)
{
    MomentSequence<T> out;
    for (long k = 0; k <= k_max; ++k) out.values.push_back(fam.closed_moment(k));
    return out;
}

/// Power-basis moments u_k = <U, x(s)^k>.
template <Scalar T>
[[nodiscard]] MomentSequence<T> power_moments(const Measure<T>& m, long k_max, const QContext<T>& ctx)
{
    MomentSequence<T> out;
    out.basis = MomentBasis::power;
    out.provenance = Provenance::brute_force;
    out.truncation_last = m.last();
    out.values.assign(static_cast<std::size_t>(k_max + 1), T(0));
    for (long s = 0; s <= m.last(); ++s) {
        T xk = m.mass.at(s);
        for (long k = 0; k <= k_max; ++k) {
            out.values[static_cast<std::size_t>(k)] = out.values[static_cast<std::size_t>(k)] + xk;
            xk = xk * m.x.at(s);
        }
    }
    out.tail_bound = m.tail_mass * ipow(lattice_bound(ctx), k_max);
    return out;
}

/// Converts q-falling moments to power moments through the triangular change
/// of basis x^k = sum_j c_{kj} [s]^{(j)}.
template <Scalar T>
[[nodiscard]] MomentSequence<T> qfalling_to_power(const MomentSequence<T>& u, const QContext<T>& ctx)
{
    // x(s) = q^j x(s-j) + x(j), so x(s) [s]^{(j)} = q^j [s]^{(j+1)} + x(j) [s]^{(j)}.
    const long n = u.size();
    std::vector<T> row{T(1)}; // coefficients of x^k in the falling basis
    MomentSequence<T> out = u;
    out.basis = MomentBasis::power;
    for (long k = 0; k < n; ++k) {
        T acc(0);
        for (long j = 0; j < static_cast<long>(row.size()); ++j) acc = acc + row[j] * u[j];
        out.values[static_cast<std::size_t>(k)] = acc;
        std::vector<T> next(row.size() + 1, T(0));
        for (long j = 0; j < static_cast<long>(row.size()); ++j) {
            next[j] = next[j] + lattice_x<T>(j, ctx) * row[j];
            next[j + 1] = next[j + 1] + ctx.rpow(2 * j) * row[j];
        }
        row = std::move(next);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pearson equations and boundary condition

/// |a - b| / max(|a|, |b|), zero when both vanish.
template <Scalar T>
[[nodiscard]] T pointwise_residual(const T& a, const T& b)
{
    const T scale = max_of(magnitude(a), magnitude(b));
    if (scale == T(0)) return T(0);
    return magnitude(T(a - b)) / scale;
}

template <Scalar T>
struct PearsonResidual {
    T forward{0};  // Delta[sigma rho] = tau rho
    T backward{0}; // nabla[(sigma + tau grad x(s+1/2)) rho] = tau rho
    [[nodiscard]] T max() const { return max_of(forward, backward); }
};

/// Pointwise residuals of both Pearson forms over the support (finite) or the
/// truncated grid (infinite), rho extended by zero. Each point is normalized by
/// the size of its ingredients before cancellation, sum |c_i||w|^i for the
/// polynomials, since p(x(s)) itself decays like q^s while its coefficients do not.
template <Scalar T>
[[nodiscard]] PearsonResidual<T> pearson_residual(const Family<T>& fam, const Measure<T>& m)
{
    const auto& ctx = fam.ctx();
    const auto& sigma = fam.sigma();
    const auto& tau = fam.tau();
    const auto& p = fam.p();
    const long last = m.last() - (m.truncated ? 1 : 0);
    auto rel = [](const T& a, const T& b, const T& cond) {
        const T scale = max_of(cond, max_of(magnitude(a), magnitude(b)));
        return scale == T(0) ? T(0) : magnitude(T(a - b)) / scale;
    };
    PearsonResidual<T> out;
    for (long s = 0; s <= last; ++s) {
        const T xs = lattice_x<T>(s, ctx);
        const T xn = lattice_x<T>(s + 1, ctx);
        const T xp = lattice_x<T>(s - 1, ctx);
        const T rho = m.rho_or_zero(s);
        const T rho_n = m.rho_or_zero(s + 1);
        const T rho_p = m.rho_or_zero(s - 1);
        const T step = lattice_step(s, ctx);
        const T rhs = tau(xs) * rho;
        const T rhs_size = tau.abs_eval(xs) * magnitude(rho);
        const T fwd = (sigma(xn) * rho_n - sigma(xs) * rho) / step;
        const T fwd_size = (sigma.abs_eval(xn) * magnitude(rho_n) + sigma.abs_eval(xs) * magnitude(rho)) / step;
        const T bwd = (p(xs) * rho - p(xp) * rho_p) / step;
        const T bwd_size = (p.abs_eval(xs) * magnitude(rho) + p.abs_eval(xp) * magnitude(rho_p)) / step;
        out.forward = max_of(out.forward, rel(fwd, rhs, max_of(fwd_size, rhs_size)));
        out.backward = max_of(out.backward, rel(bwd, rhs, max_of(bwd_size, rhs_size)));
    }
    return out;
}

/// max over k <= k_max of |sigma(s) rho(s) x(s-1/2)^k| at s = 0 and at the far
/// edge: s = last+1 for finite supports (rho continued by its Pochhammer form),
/// the truncation point relative to u_0 for infinite ones.
template <Scalar T>
[[nodiscard]] T boundary_check(const Family<T>& fam, const Measure<T>& m, long k_max)
{
    const auto& ctx = fam.ctx();
    auto product = [&](long s, const T& rho) {
        T worst(0);
        const T sig = fam.sigma()(lattice_x<T>(s, ctx)) * rho;
        const T xh = lattice_x<T>(Rational(2 * s - 1, 2), ctx);
        T pw(1);
        for (long k = 0; k <= k_max; ++k) {
            worst = max_of(worst, magnitude(T(sig * pw)));
            pw = pw * xh;
        }
        return worst;
    };
    T out = product(0, m.rho.at(0));
    if (const auto last = fam.support_last()) {
        const long edge = *last + 1;
        // sigma vanishes at the edge for hahn with alpha = 0, where the
        // Pochhammer form is 0/0; the product is zero either way.
        if (fam.sigma()(lattice_x<T>(edge, ctx)) != T(0)) out = max_of(out, product(edge, fam.weight_formula(edge)));
    } else {
        out = max_of(out, product(m.last(), m.rho.at(m.last())) / fam.u0());
    }
    return out;
}

/// Summation by parts for the functional pU: with g = P rho,
///   sum_s f(s) nabla g(s) dx(s-1/2)  +  sum_s g(s) Delta f(s) dx(s-1/2) = 0,
/// the first sum running one point past the grid where g has dropped to zero.
/// Tested on f = [s]^{(j)}, j = 0..j_max; returns the largest normalized residual.
template <Scalar T>
[[nodiscard]] T adjoint_check(const Family<T>& fam, const Measure<T>& m, const LatticePoly<T>& poly, long j_max = 4)
{
    const auto& ctx = fam.ctx();
    const long last = m.last();
    auto g = [&](long s) { return (s < 0 || s > last) ? T(0) : poly(m.x.at(s)) * m.rho.at(s); };
    T worst(0);
    for (long j = 0; j <= j_max; ++j) {
        auto f = [&](long s) { return qfalling<T>(s, j, ctx); };
        T lhs(0), rhs(0), scale(0);
        for (long s = 0; s <= last + 1; ++s) {
            // nabla g(s) dx(s-1/2) = g(s) - g(s-1); Delta f(s) dx(s-1/2) = f(s+1) - f(s)
            const T a = f(s) * (g(s) - g(s - 1));
            lhs = lhs + a;
            scale = scale + magnitude(a);
            if (s <= last) {
                const T b = g(s) * (f(s + 1) - f(s));
                rhs = rhs + b;
                scale = scale + magnitude(b);
            }
        }
        if (scale != T(0)) worst = max_of(worst, magnitude(T(lhs + rhs)) / scale);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Three-term moment recurrence Gamma_k + Psi_k = Xi_k

template <Scalar T>
struct RecurrenceTerms {
    T gamma{0}, psi{0}, xi{0};
    T scale{0};    // the same expression with every term replaced by its magnitude
    T residual{0}; // |Gamma + Psi - Xi| / scale
};

namespace detail {

/// Magnitude arithmetic: evaluating a formula in Mag gives the sum of the
/// absolute values of all its terms, a cancellation-free scale.
template <Scalar T>
struct Mag {
    T v{0};
    Mag() = default;
    Mag(const T& x) : v(magnitude(x)) {}
    friend Mag operator+(const Mag& a, const Mag& b) { return Mag(T(a.v + b.v)); }
    friend Mag operator-(const Mag& a, const Mag& b) { return Mag(T(a.v + b.v)); }
    friend Mag operator*(const Mag& a, const Mag& b) { return Mag(T(a.v * b.v)); }
    friend Mag operator/(const Mag& a, const Mag& b) { return Mag(T(a.v / b.v)); }
    Mag operator-() const { return *this; }
};

/// Gamma_k, Psi_k, Xi_k for a value type V built from T.
template <class V, Scalar T>
std::array<V, 3> recurrence_formula(const TildeCoeffs<T>& c, const V& um, const V& uk, const V& up, long k,
                                    const QContext<T>& ctx)
{
    const T& qt = ctx.q();
    const V q(qt);
    const V one(T(1));
    const V two(T(2));
    const V half(T(1) / T(2));
    auto n = [&](long j) { return V(qnumber<T>(j, ctx)); };
    auto qh = [&](long twice) { return V(ctx.rpow(twice)); }; // q^{twice/2}
    const V a2(c.a2), a1(c.a1), a0(c.a0), b1(c.b1), b0(c.b0);

    const V gamma = -(a2 * qh(3 * k - 2) + half * b1 * (q - one) * qh(3 * k - 3)) * n(k + 2) * up -
                    n(k + 1) *
                        (two * a2 * qh(2 * k - 2) * n(k) - a2 * qh(3 * k - 3) + a1 * qh(k - 1) +
                         half * b1 * qh(k - 2) * (qh(2 * k - 2) + qh(2 * k) - one) +
                         half * b0 * qh(k - 2) * (q - one)) *
                        uk -
                    n(k) *
                        (a2 * qh(k - 2) * n(k - 1) * n(k - 1) + (a1 + half * b1 * qh(2 * k - 3)) * n(k - 1) +
                         (a0 + half * b0 * qh(2 * k - 3)) * qh(2 - k)) *
                        um;
    const V psi = (a2 * qh(2 * k - 3) * (q + one) + half * b1 * qh(2 * k - 4) * (q * q - one)) * up +
                  (a2 * (qh(k - 4) * (q + one) * n(k) - qh(-3)) + a1 * qh(-1) +
                   half * b1 * (qh(k - 1) * (one - one / (q * q)) * n(k) + qh(-4)) + half * ((q - one) / q) * b0) *
                      uk;
    const V xi = b1 * qh(2 * k) * up + (b1 * qh(k - 1) * n(k) + b0) * uk;
    return {gamma, psi, xi};
}

} // namespace detail

/// Evaluates the recurrence linking u_{k-1}, u_k, u_{k+1} (k >= 1).
template <Scalar T>
[[nodiscard]] RecurrenceTerms<T> moment_recurrence_terms(const TildeCoeffs<T>& c, const MomentSequence<T>& u, long k,
                                                         const QContext<T>& ctx)
{
    if (k < 1 || k + 1 >= u.size()) throw Error(ErrorKind::precondition, "recurrence needs 1 <= k and u_{k+1}");
    const auto v = detail::recurrence_formula<T>(c, u[k - 1], u[k], u[k + 1], k, ctx);
    using M = detail::Mag<T>;
    const auto a = detail::recurrence_formula<M>(c, M(u[k - 1]), M(u[k]), M(u[k + 1]), k, ctx);
    RecurrenceTerms<T> out;
    out.gamma = v[0];
    out.psi = v[1];
    out.xi = v[2];
    out.scale = a[0].v + a[1].v + a[2].v;
    out.residual = out.scale == T(0) ? T(0) : magnitude(T(out.gamma + out.psi - out.xi)) / out.scale;
    return out;
}

template <Scalar T>
[[nodiscard]] T moment_recurrence_residual(const Family<T>& fam, const MomentSequence<T>& u, long k)
{
    return moment_recurrence_terms(fam.tilde_coeffs(), u, k, fam.ctx()).residual;
}

template <Scalar T>
[[nodiscard]] T moment_recurrence_residual(const Family<T>& fam, long k)
{
    return moment_recurrence_residual(fam, closed_moments(fam, k + 1), k);
}

} // namespace qstieltjes

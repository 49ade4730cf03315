#pragma once

// Named verification checks. Each one sweeps a residual over samples (t
// points, moment orders, degrees, random draws) and folds the sweep into a
// record with a pass flag. The CLI and the acceptance run share these.

#include <cstdint>
#include <exception>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "functionals.hpp"
#include "orthopoly.hpp"
#include "qhyper.hpp"
#include "stieltjes.hpp"

namespace qstieltjes {

struct CheckRow {
    std::string sample;
    std::string residual;
    bool pass = true;
};

struct CheckRecord {
    std::string name;
    std::string anchor; // "<module>/<property>", unique across checks
    std::string residual;
    std::string tol;
    bool pass = true;
    Float max_residual{0};
    std::vector<CheckRow> rows;
};

/// Float mode passes on residual < tol, exact mode only on residual == 0.
template <Scalar T>
[[nodiscard]] bool within(const T& residual, const T& tol)
{
    if constexpr (is_exact_v<T>) {
        (void)tol;
        return residual == T(0);
    } else {
        return residual < tol;
    }
}

template <Scalar T>
class RecordBuilder {
public:
    RecordBuilder(std::string name, std::string anchor, T tol) : tol_(std::move(tol))
    {
        rec_.name = std::move(name);
        rec_.anchor = std::move(anchor);
        rec_.tol = format(tol_, 6);
    }

    void add(std::string sample, const T& residual)
    {
        const bool ok = within(residual, tol_);
        rec_.rows.push_back({std::move(sample), format(residual, 6), ok});
        rec_.pass = rec_.pass && ok;
        if (first_ || worst_ < residual) worst_ = residual;
        first_ = false;
    }

    /// A row that fails for a reason other than its residual.
    void fail(std::string sample, std::string why)
    {
        rec_.rows.push_back({std::move(sample), std::move(why), false});
        rec_.pass = false;
    }

    [[nodiscard]] CheckRecord finish()
    {
        rec_.residual = format(worst_, 6);
        rec_.max_residual = to_float(worst_);
        return std::move(rec_);
    }

private:
    CheckRecord rec_;
    T tol_;
    T worst_{0};
    bool first_ = true;
};

/// Runs f(0..n-1) on up to `jobs` threads and returns results in index order.
/// The first exception by index is rethrown, so failures are deterministic too.
template <class F>
auto parallel_map(long n, unsigned jobs, F&& f) -> std::vector<decltype(f(0L))>
{
    using R = decltype(f(0L));
    std::vector<R> out(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(n));
    auto work = [&](long i) {
        try {
            out[static_cast<std::size_t>(i)] = f(i);
        } catch (...) {
            errs[static_cast<std::size_t>(i)] = std::current_exception();
        }
    };
    if (jobs <= 1 || n <= 1) {
        for (long i = 0; i < n; ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        const long stride = static_cast<long>(jobs);
        for (long j = 0; j < stride && j < n; ++j)
            pool.emplace_back([&, j] {
                for (long i = j; i < n; i += stride) work(i);
            });
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

inline std::string t_label(const Rational& t) { return "t=" + to_string(t); }

// ---------------------------------------------------------------------------
// Per-family checks

struct SweepOptions {
    long points = 20;
    long k_first = 0;
    long k_last = 8;
    std::vector<Rational> t_values; // empty: the deterministic sample of `points` points
    long n_max = 6;
    unsigned jobs = 1;
};

template <Scalar T>
class FamilyChecks {
public:
    FamilyChecks(const Family<T>& fam, SweepOptions opt)
        : fam_(fam), opt_(std::move(opt)), m_(build_measure(fam)),
          t_grid_(opt_.t_values.empty() ? sample_points(fam, opt_.points) : opt_.t_values)
    {
        if (opt_.k_first < 0 || opt_.k_last < opt_.k_first)
            throw Error(ErrorKind::precondition, "moment range must satisfy 0 <= first <= last");
    }

    [[nodiscard]] const Measure<T>& measure() const noexcept { return m_; }
    [[nodiscard]] const std::vector<Rational>& t_grid() const noexcept { return t_grid_; }
    [[nodiscard]] long n_max() const { return max_degree(fam_, opt_.n_max); }

    [[nodiscard]] CheckRecord pearson() const
    {
        auto b = builder("pearson", "functionals/pearson-equation");
        const auto r = pearson_residual(fam_, m_);
        b.add("forward", r.forward);
        b.add("backward", r.backward);
        return b.finish();
    }

    [[nodiscard]] CheckRecord boundary() const
    {
        auto b = builder("boundary", "functionals/boundary-condition");
        b.add("k<=" + std::to_string(opt_.k_last), boundary_check(fam_, m_, opt_.k_last));
        return b.finish();
    }

    [[nodiscard]] CheckRecord summation_by_parts() const
    {
        auto b = builder("summation-by-parts", "functionals/summation-by-parts");
        std::vector<T> c{T(1)};
        for (long d = 0; d <= 2; ++d) {
            b.add("deg=" + std::to_string(d), adjoint_check(fam_, m_, LatticePoly<T>(c)));
            c.push_back(T(1));
        }
        return b.finish();
    }

    [[nodiscard]] CheckRecord moments() const
    {
        auto b = builder("moments", "families/closed-moments");
        const auto closed = closed_moments(fam_, opt_.k_last);
        const auto brute = bruteforce_qmoments(m_, opt_.k_last, fam_.ctx());
        for (long k = opt_.k_first; k <= opt_.k_last; ++k)
            b.add("k=" + std::to_string(k), pointwise_residual(closed[k], brute[k]));
        return b.finish();
    }

    [[nodiscard]] CheckRecord recurrence() const
    {
        auto b = builder("moment-recurrence", "functionals/moment-recurrence");
        const auto u = closed_moments(fam_, opt_.k_last + 1);
        for (long k = std::max(1L, opt_.k_first); k <= opt_.k_last; ++k)
            b.add("k=" + std::to_string(k), moment_recurrence_residual(fam_, u, k));
        return b.finish();
    }

    [[nodiscard]] CheckRecord representations() const
    {
        auto b = builder("stieltjes-representations", "families/stieltjes-closed-forms");
        const auto diffs = parallel_map(static_cast<long>(t_grid_.size()), opt_.jobs, [&](long i) {
            return compare_representations(fam_, m_, EvalPoint<T>(num(t_grid_[i]))).max_difference();
        });
        for (std::size_t i = 0; i < t_grid_.size(); ++i) b.add(t_label(t_grid_[i]), diffs[i]);
        return b.finish();
    }

    [[nodiscard]] std::vector<TheoremResidual<T>> theorem_rows() const
    {
        return parallel_map(static_cast<long>(t_grid_.size()), opt_.jobs,
                            [&](long i) { return theorem_residual(fam_, m_, EvalPoint<T>(num(t_grid_[i]))); });
    }

    [[nodiscard]] CheckRecord theorem(const std::vector<TheoremResidual<T>>& rows) const
    {
        auto b = builder("stieltjes-difference-equation", "stieltjes/difference-equation");
        for (std::size_t i = 0; i < rows.size(); ++i) b.add(t_label(t_grid_[i]), rows[i].residual);
        return b.finish();
    }

    /// C_q must be visibly nonzero and the homogeneous part of the equation
    /// must produce the same constant at every t; no use of the closed C_q here.
    [[nodiscard]] CheckRecord non_homogeneity(const std::vector<TheoremResidual<T>>& rows) const
    {
        auto b = builder("non-homogeneity", "stieltjes/non-homogeneity");
        const T c = fam_.c_constant();
        const T scale = max_of(T(1), magnitude(c));
        bool visible = false;
        if constexpr (is_exact_v<T>) {
            visible = c != T(0);
        } else {
            visible = magnitude(c) > T(10) * fam_.ctx().tol();
        }
        if (!visible) b.fail("C_q", "C_q=" + format(c, 6) + " is not distinguishable from zero");
        for (std::size_t i = 0; i < rows.size(); ++i)
            b.add(t_label(t_grid_[i]), magnitude(T(rows[i].lhs - rows.front().lhs)) / scale);
        return b.finish();
    }

    [[nodiscard]] OrthoBasis<T> basis() const { return build_basis(fam_, m_, n_max()); }

    [[nodiscard]] CheckRecord orthogonality(const OrthoBasis<T>& basis) const
    {
        auto b = builder("orthogonality", "orthopoly/orthogonality");
        b.add("n<=" + std::to_string(basis.n_max()), orthogonality_check(basis, m_));
        return b.finish();
    }

    [[nodiscard]] CheckRecord diff_orthogonality(const OrthoBasis<T>& basis) const
    {
        auto b = builder("difference-orthogonality", "orthopoly/difference-orthogonality");
        b.add("n<=" + std::to_string(basis.n_max()), diff_orthogonality_check(basis, fam_, m_));
        return b.finish();
    }

    [[nodiscard]] CheckRecord ttrr(const OrthoBasis<T>& basis) const
    {
        auto b = builder("three-term-recurrence", "orthopoly/three-term-recurrence");
        b.add("n<=" + std::to_string(basis.n_max()), ttrr_check(basis, m_));
        return b.finish();
    }

    /// Residual of L[P_n] + lambda_n P_n, folded with the consistency of lambda_n
    /// across the grid and against the leading-coefficient value.
    [[nodiscard]] CheckRecord eigen(const OrthoBasis<T>& basis) const
    {
        auto b = builder("hypergeometric-equation", "orthopoly/difference-equation");
        for (long n = 1; n <= basis.n_max(); ++n) {
            const auto e = hypergeometric_eq_residual(basis, fam_, n);
            T r = max_of(e.residual, e.lambda_spread);
            r = max_of(r, pointwise_residual(e.lambda, e.lambda_leading));
            b.add("n=" + std::to_string(n), r);
        }
        return b.finish();
    }

    [[nodiscard]] CheckRecord rodrigues(const OrthoBasis<T>& basis) const
    {
        auto b = builder("rodrigues", "orthopoly/rodrigues-formula");
        for (long n = 1; n <= std::min(4L, basis.n_max()); ++n)
            b.add("n=" + std::to_string(n),
                  rodrigues_proportionality(rodrigues_poly(fam_, n), basis, n, fam_.ctx()));
        return b.finish();
    }

    [[nodiscard]] CheckRecord pade(const OrthoBasis<T>& basis) const
    {
        auto b = builder("pade", "orthopoly/pade-at-infinity");
        const long top = std::min(5L, basis.n_max());
        const auto pm = power_moments(m_, 2 * std::max(top, 1L), fam_.ctx());
        for (long n = 1; n <= top; ++n) b.add("n=" + std::to_string(n), pade_check(basis[n], pm).residual);
        return b.finish();
    }

    [[nodiscard]] std::vector<CheckRecord> orthopoly_suite() const
    {
        const auto bs = basis();
        return {orthogonality(bs), diff_orthogonality(bs), ttrr(bs), eigen(bs), rodrigues(bs), pade(bs)};
    }

private:
    [[nodiscard]] RecordBuilder<T> builder(std::string name, std::string anchor) const
    {
        return RecordBuilder<T>(std::move(name), std::move(anchor), fam_.ctx().tol());
    }
    [[nodiscard]] T num(const Rational& v) const { return fam_.ctx().num(v); }

    const Family<T>& fam_;
    SweepOptions opt_;
    Measure<T> m_;
    std::vector<Rational> t_grid_;
};

// ---------------------------------------------------------------------------
// Random-draw identity suites (no family attached)

struct DrawOptions {
    long reps = 20;
    std::uint64_t seed = 1;
    int digits10 = default_digits10;
    std::optional<Rational> tol;
    unsigned jobs = 1;
};

namespace detail {

/// One generator per (suite, draw) so results do not depend on thread layout.
inline std::mt19937_64 draw_rng(std::uint64_t seed, std::uint64_t suite, long draw)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(suite), static_cast<std::uint32_t>(draw)};
    return std::mt19937_64(seq);
}

inline Rational draw_q(std::mt19937_64& rng)
{
    static const std::array<Rational, 7> qs = {Rational(1, 2), Rational(1, 3), Rational(2, 3), Rational(2, 5),
                                               Rational(3, 5), Rational(1, 4), Rational(3, 4)};
    return qs[std::uniform_int_distribution<std::size_t>(0, qs.size() - 1)(rng)];
}

inline long pick(std::mt19937_64& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

template <Scalar T>
T tol_of(const DrawOptions& o)
{
    return QContext<T>(Rational(1, 2), o.digits10, o.tol).tol();
}

template <Scalar T>
struct DrawResult {
    std::string label;
    T residual{0};
};

template <Scalar T, class Eval>
CheckRecord draw_record(std::string name, std::string anchor, std::uint64_t suite, const DrawOptions& o, Eval&& eval)
{
    RecordBuilder<T> b(std::move(name), std::move(anchor), tol_of<T>(o));
    const auto rows = parallel_map(o.reps, o.jobs, [&](long i) {
        auto rng = draw_rng(o.seed, suite, i);
        return eval(rng);
    });
    for (const auto& r : rows) b.add(r.label, r.residual);
    return b.finish();
}

} // namespace detail

/// Gamma_q(s+1) = q^{C(s,2)/2}[s]_q! = (q;q)_s/(1-q)^s, the last also through
/// the infinite-product definition in float mode.
template <Scalar T>
[[nodiscard]] CheckRecord qgamma_identity_check(const DrawOptions& o)
{
    return detail::draw_record<T>("q-gamma", "qcore/q-gamma-identities", 1, o, [&](std::mt19937_64& rng) {
        const Rational q = detail::draw_q(rng);
        const long s = detail::pick(rng, 0, 20);
        QContext<T> ctx(q, o.digits10, o.tol);
        const T a = ctx.rpow(s * (s - 1) / 2) * qfactorial<T>(s, ctx);
        const T b = qgamma<T>(Rational(s + 1), ctx);
        T r = relative_residual(a, b);
        if constexpr (!is_exact_v<T>) {
            const T c = qpochhammer_inf(ctx.q(), ctx).value / qpochhammer_inf(ctx.rpow(2 * s + 2), ctx).value /
                        ipow(T(T(1) - ctx.q()), s);
            r = max_of(r, max_of(relative_residual(a, c), relative_residual(b, c)));
        }
        return detail::DrawResult<T>{"q=" + to_string(q) + ",s=" + std::to_string(s), r};
    });
}

/// Product and Pochhammer forms of [s]_q^{(k)}, s a half-integer in [0, 12].
template <Scalar T>
[[nodiscard]] CheckRecord qfalling_identity_check(const DrawOptions& o)
{
    return detail::draw_record<T>("q-falling", "qcore/q-falling-forms", 2, o, [&](std::mt19937_64& rng) {
        const Rational q = detail::draw_q(rng);
        const Rational s(detail::pick(rng, 0, 24), 2);
        const long k = detail::pick(rng, 0, 12);
        QContext<T> ctx(q, o.digits10, o.tol);
        const T r = relative_residual(qfalling<T>(s, k, ctx), qfalling_pochhammer<T>(s, k, ctx));
        return detail::DrawResult<T>{"q=" + to_string(q) + ",s=" + to_string(s) + ",k=" + std::to_string(k), r};
    });
}

/// Delta [s]^{(k)} = q^{3/2-k}[k]^{(1)} [s]^{(k-1)} and nabla [s]^{(k)} = q^{1/2-k}[k]^{(1)} [s-1]^{(k-1)}
/// on the grid s = 0..12; [k]^{(1)} = x(k) is the lattice value, not the symmetric q-number.
template <Scalar T>
[[nodiscard]] CheckRecord difference_action_check(const DrawOptions& o)
{
    return detail::draw_record<T>("difference-action", "qcore/difference-action", 3, o, [&](std::mt19937_64& rng) {
        const Rational q = detail::draw_q(rng);
        const long k = detail::pick(rng, 1, 6);
        QContext<T> ctx(q, o.digits10, o.tol);
        const auto f = GridFunction<T>::sample(0, 12, [&](long s) { return qfalling<T>(s, k, ctx); });
        const auto df = fwd_diff(f, ctx);
        const auto nf = bwd_diff(f, ctx);
        const T nk = lattice_x<T>(k, ctx);
        T r(0);
        for (long s = df.first; s <= df.last(); ++s)
            r = max_of(r, relative_residual(df.at(s), T(ctx.rpow(3 - 2 * k) * nk * qfalling<T>(s, k - 1, ctx))));
        for (long s = nf.first; s <= nf.last(); ++s)
            r = max_of(r, relative_residual(nf.at(s), T(ctx.rpow(1 - 2 * k) * nk * qfalling<T>(s - 1, k - 1, ctx))));
        return detail::DrawResult<T>{"q=" + to_string(q) + ",k=" + std::to_string(k), r};
    });
}

template <Scalar T>
[[nodiscard]] std::vector<CheckRecord> qcore_identity_checks(const DrawOptions& o)
{
    return {qgamma_identity_check<T>(o), qfalling_identity_check<T>(o), difference_action_check<T>(o)};
}

/// Identities available in a mode: heine needs e_q and the non-terminating
/// forms need infinite products, so exact mode keeps the terminating ones.
template <Scalar T>
[[nodiscard]] std::vector<IdentityTag> identities_for_mode()
{
    std::vector<IdentityTag> out;
    for (IdentityTag tag : all_identities)
        if (!(is_exact_v<T> && tag == IdentityTag::heine)) out.push_back(tag);
    return out;
}

namespace detail {

inline Rational small_rational(std::mt19937_64& rng, long num_hi, long den, bool allow_negative)
{
    Rational v(pick(rng, 1, num_hi), den);
    if (allow_negative && pick(rng, 0, 1) == 1) v = -v;
    return v;
}

/// Draws parameters for an identity, redrawing on pole or domain failures
/// (e.g. a lower parameter hitting q^{-j}).
template <Scalar T>
DrawResult<T> identity_draw(IdentityTag tag, std::mt19937_64& rng, const DrawOptions& o)
{
    for (int attempt = 0; attempt < 64; ++attempt) {
        const Rational q = draw_q(rng);
        QContext<T> ctx(q, o.digits10, o.tol);
        IdentityParams<T> p;
        Rational a = small_rational(rng, 7, 8, true);
        Rational b = small_rational(rng, 15, 4, true);
        Rational c = small_rational(rng, 7, 8, false);
        Rational d = small_rational(rng, 15, 8, true);
        Rational z = small_rational(rng, 6, 8, true);
        long n = pick(rng, 0, 8);
        const bool terminating = is_exact_v<T> || pick(rng, 0, 1) == 1;
        if (tag == IdentityTag::jackson || tag == IdentityTag::q_binomial) n = terminating ? pick(rng, 1, 6) : 0;
        if (tag == IdentityTag::phi32) n = pick(rng, 0, 6);
        p.a = ctx.num(a);
        p.b = ctx.num(b);
        p.c = ctx.num(c);
        p.d = ctx.num(d);
        p.z = ctx.num(z);
        p.n = n;
        try {
            const auto res = verify_identity(tag, p, ctx);
            std::string label = "q=" + to_string(q) + ",a=" + to_string(a) + ",b=" + to_string(b) +
                                ",c=" + to_string(c) + ",d=" + to_string(d) + ",z=" + to_string(z) +
                                ",n=" + std::to_string(n);
            return {std::move(label), res.residual};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::pole && e.kind() != ErrorKind::precondition) throw;
        }
    }
    throw Error(ErrorKind::fit, "no admissible parameter draw for " + std::string(to_string(tag)));
}

} // namespace detail

template <Scalar T>
[[nodiscard]] std::vector<CheckRecord> qhyper_identity_checks(const DrawOptions& o)
{
    std::vector<CheckRecord> out;
    for (IdentityTag tag : identities_for_mode<T>()) {
        const std::string name(to_string(tag));
        out.push_back(detail::draw_record<T>(name, "qhyper/" + name, 10 + static_cast<std::uint64_t>(tag), o,
                                             [&](std::mt19937_64& rng) { return detail::identity_draw<T>(tag, rng, o); }));
    }
    return out;
}

} // namespace qstieltjes

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qstieltjes;
using Q = QuadRational;

namespace {

Rational R(long n, long d = 1) { return Rational(n, d); }

template <class T>
Family<T> make(const FamilySpec& s, Perturbation p = {})
{
    return Family<T>(s, QContext<T>(s.q), p);
}

const std::vector<FamilySpec>& exact_specs()
{
    static const std::vector<FamilySpec> v = {
        FamilySpec::kravchuk(R(1, 2), R(1, 3), 4), FamilySpec::kravchuk(R(2, 3), R(3, 4), 6),
        FamilySpec::hahn(R(1, 2), R(1), R(2), 5), FamilySpec::hahn(R(1, 3), R(3), R(0), 3)};
    return v;
}

const std::vector<FamilySpec>& float_specs()
{
    static const std::vector<FamilySpec> v = {
        FamilySpec::charlier(R(1, 2), R(3, 4)), FamilySpec::charlier(R(2, 3), R(1, 4)),
        FamilySpec::meixner(R(1, 2), R(1, 3), R(5, 2)), FamilySpec::meixner(R(3, 4), R(1, 2), R(2, 3)),
        FamilySpec::kravchuk(R(1, 4), R(1, 5), 7), FamilySpec::hahn(R(2, 5), R(-1, 2), R(5, 3), 6),
        FamilySpec::hahn(R(3, 5), R(4, 3), R(-2, 3), 4)};
    return v;
}

const std::vector<Rational> exact_ts = {R(3, 7), R(-2), R(5), R(-1, 9), R(11, 3)};

} // namespace

TEST(Lattice, MatchesOracleSum)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        for (const auto& t : exact_ts) {
            const auto r = stieltjes_lattice(fam, EvalPoint<Q>(Q(t)));
            EXPECT_EQ(r.value, oracle::stieltjes(fam, Q(t), *s.support_last())) << s.str() << " t=" << to_string(t);
            EXPECT_EQ(r.tail_bound, Q(0));
        }
    }
}

TEST(Lattice, TruncatedSumCarriesTailBound)
{
    for (const auto& s : float_specs()) {
        if (s.support_last()) continue;
        const auto fam = make<Float>(s);
        const Float t(R(1, 3));
        const auto r = stieltjes_lattice(fam, EvalPoint<Float>(t));
        const Float longer = oracle::stieltjes(fam, t, build_measure(fam).last() + 300);
        // Rounding at 60 digits is added on top of the truncation bound.
        const Float rounding = Float(1e-55) * boost::multiprecision::abs(longer);
        EXPECT_LE(boost::multiprecision::abs(Float(r.value - longer)), r.tail_bound + rounding);
        EXPECT_LT(r.tail_bound, oracle::tol() * boost::multiprecision::abs(longer));
    }
}

TEST(Lattice, PolesAreRejected)
{
    const auto fam = make<Q>(FamilySpec::kravchuk(R(1, 2), R(1, 3), 4));
    for (long s = 0; s <= 4; ++s) {
        try {
            (void)stieltjes_lattice(fam, EvalPoint<Q>(Q(oracle::pow(R(1, 2), -s))));
            FAIL() << s;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::pole);
        }
    }
    // q^{-5} lies past the support and is a regular point.
    EXPECT_NO_THROW((void)stieltjes_lattice(fam, EvalPoint<Q>(Q(32))));
    const auto ch = make<Float>(FamilySpec::charlier(R(1, 2), R(1, 2)));
    EXPECT_THROW((void)stieltjes_lattice(ch, EvalPoint<Float>(Float(1024))), Error);
}

TEST(Series, FiniteSupportExpansionIsExact)
{
    // [s]^{(k)} vanishes for k > s, so the expansion stops after support-size terms.
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        const long n = *s.support_last() + 1;
        for (const auto& t : exact_ts) {
            const EvalPoint<Q> at{Q(t)};
            EXPECT_EQ(stieltjes_series(fam, at, n).value, stieltjes_lattice(fam, at).value) << s.str();
            EXPECT_EQ(stieltjes_series(fam, at, n + 3).value, stieltjes_lattice(fam, at).value) << s.str();
        }
    }
}

TEST(Series, AsymptoticForLargeX)
{
    // t near 0 makes |x(z)| large, where the expansion is accurate.
    for (const auto& s : float_specs()) {
        if (s.support_last()) continue;
        const auto fam = make<Float>(s);
        const EvalPoint<Float> at{Float(R(1, 1000000))};
        const Float lat = stieltjes_lattice(fam, at).value;
        const auto ser = stieltjes_series(fam, at, 8);
        EXPECT_LT(oracle::rel(ser.value, lat), Float(1e-20)) << s.str();
    }
    const auto fam = make<Q>(FamilySpec::kravchuk(R(1, 2), R(1, 3), 4));
    EXPECT_THROW((void)stieltjes_series(fam, EvalPoint<Q>(Q(3)), 0), Error);
    EXPECT_THROW((void)stieltjes_series(fam, closed_moments(fam, 2), EvalPoint<Q>(Q(3)), 5), Error);
}

TEST(Theorem, ExactResidualIsZero)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        for (const auto& t : exact_ts) {
            const auto r = theorem_residual(fam, EvalPoint<Q>(Q(t)));
            EXPECT_EQ(r.residual, Q(0)) << s.str() << " t=" << to_string(t);
            EXPECT_EQ(r.lhs, fam.c_constant());
            EXPECT_NE(r.c_q, Q(0));
        }
    }
}

TEST(Theorem, HandComputedLeftSide)
{
    // lhs = (p(x(z)) S(z) - p(x(z-1)) S(z-1)) / (q^{-1/2} t^{-1}) - tau(x(z)) S(z), all by hand.
    const auto s = FamilySpec::hahn(R(1, 2), R(2), R(1), 4);
    const auto fam = make<Q>(s);
    const auto& ctx = fam.ctx();
    const Q t(R(7, 3));
    const Q tp = ctx.q() * t;
    auto xz = [&](const Q& tt) { return (Q(1) - tt) / (tt * (ctx.q() - Q(1))); };
    const Q s0 = oracle::stieltjes(fam, t, 3);
    const Q s1 = oracle::stieltjes(fam, tp, 3);
    const Q lhs = (fam.p()(xz(t)) * s0 - fam.p()(xz(tp)) * s1) * ctx.r() * t - fam.tau()(xz(t)) * s0;
    EXPECT_EQ(lhs, fam.c_constant());
}

TEST(Theorem, FloatResidualBelowTolerance)
{
    for (const auto& s : float_specs()) {
        const auto fam = make<Float>(s);
        const auto m = build_measure(fam);
        for (const auto& t : sample_points(fam, 20)) {
            const auto r = theorem_residual(fam, m, EvalPoint<Float>(Float(t)));
            EXPECT_LT(r.residual, oracle::tol()) << s.str() << " t=" << to_string(t);
            // The homogeneous residual is C_q itself, far from zero.
            EXPECT_GT(r.homogeneous, Float(10) * oracle::tol());
        }
    }
}

TEST(Theorem, PerturbedConstantIsCaught)
{
    Perturbation p;
    p.c_factor = R(101, 100);
    for (const auto& s : float_specs()) {
        const auto fam = make<Float>(s, p);
        const auto r = theorem_residual(fam, EvalPoint<Float>(Float(R(1, 3))));
        EXPECT_GT(r.residual, Float(1e6) * oracle::tol()) << s.str();
    }
}

TEST(Representations, ClosedFormsMatchLattice)
{
    for (const auto& s : float_specs()) {
        const auto fam = make<Float>(s);
        const auto m = build_measure(fam);
        for (const auto& t : sample_points(fam, 20)) {
            const auto r = compare_representations(fam, m, EvalPoint<Float>(Float(t)));
            EXPECT_LT(r.max_difference(), oracle::tol()) << s.str() << " t=" << to_string(t);
        }
    }
}

TEST(Representations, ExactFamiliesAgreeExactly)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        const auto m = build_measure(fam);
        for (const auto& t : exact_ts) {
            const auto r = compare_representations(fam, m, EvalPoint<Q>(Q(t)));
            EXPECT_EQ(r.closed, r.lattice) << s.str() << " t=" << to_string(t);
            EXPECT_EQ(r.pretransform, r.lattice) << s.str() << " t=" << to_string(t);
        }
    }
}

TEST(SamplePoints, DeterministicAndOffPoles)
{
    for (const auto& s : float_specs()) {
        const auto fam = make<Float>(s);
        const auto a = sample_points(fam, 20);
        EXPECT_EQ(a, sample_points(fam, 20));
        ASSERT_EQ(a.size(), 20u);
        for (const auto& t : a) {
            EXPECT_NO_THROW(require_off_poles(fam, EvalPoint<Float>(Float(t))));
            EXPECT_NO_THROW(require_off_poles(fam, EvalPoint<Float>(Float(Rational(t * s.q)))));
        }
    }
}

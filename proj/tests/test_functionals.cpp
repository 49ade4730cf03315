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
        FamilySpec::kravchuk(R(1, 2), R(1, 3), 4), FamilySpec::kravchuk(R(3, 5), R(1, 2), 7),
        FamilySpec::hahn(R(1, 2), R(1), R(2), 5), FamilySpec::hahn(R(2, 3), R(0), R(0), 4)};
    return v;
}

const std::vector<FamilySpec>& float_specs()
{
    static const std::vector<FamilySpec> v = {
        FamilySpec::charlier(R(1, 2), R(3, 4)),         FamilySpec::charlier(R(3, 4), R(1, 2)),
        FamilySpec::meixner(R(1, 3), R(1, 2), R(7, 3)), FamilySpec::meixner(R(3, 5), R(4, 5), R(1, 2)),
        FamilySpec::kravchuk(R(1, 4), R(1, 5), 7),      FamilySpec::hahn(R(2, 5), R(-1, 2), R(5, 3), 6)};
    return v;
}

Float tol() { return oracle::tol(); }

} // namespace

TEST(Measure, FiniteSupportIsExact)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        const auto m = build_measure(fam);
        EXPECT_FALSE(m.truncated);
        EXPECT_EQ(m.last(), *s.support_last());
        for (long sp = 0; sp <= m.last(); ++sp) {
            EXPECT_EQ(m.mass.at(sp), fam.weight(sp) * fam.ctx().rpow(2 * sp - 1));
            EXPECT_EQ(m.x.at(sp), Q(oracle::lattice(s.q, sp)));
        }
    }
}

TEST(Measure, TruncationTailBoundHolds)
{
    for (const auto& s : float_specs()) {
        if (s.support_last()) continue;
        const auto fam = make<Float>(s);
        const auto m = build_measure(fam);
        EXPECT_TRUE(m.truncated);
        // The next 200 masses, summed directly, stay below the recorded bound.
        Float rest(0);
        Float rho = m.rho.at(m.last());
        for (long sp = m.last(); sp < m.last() + 200; ++sp) {
            rho *= fam.weight_ratio(sp);
            rest += rho * fam.ctx().rpow(2 * (sp + 1) - 1);
        }
        EXPECT_LE(rest, m.tail_mass * Float(1.000001)) << s.str();
        EXPECT_LT(m.tail_mass, tol() * oracle::qmoment(fam, 0, m.last()));
    }
    EXPECT_THROW((void)build_measure(make<Float>(FamilySpec::charlier(R(1, 2), R(1, 2))), 0, 5), Error);
    EXPECT_THROW((void)build_measure(make<Float>(FamilySpec::meixner(R(1, 2), R(1, 2), R(1))), 0, 5), Error);
}

TEST(Moments, BruteForceMatchesOracleSums)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        const auto m = build_measure(fam);
        const auto u = bruteforce_qmoments(m, 8, fam.ctx());
        for (long k = 0; k <= 8; ++k) EXPECT_EQ(u[k], oracle::qmoment(fam, k, m.last()));
        EXPECT_EQ(bruteforce_qmoment(fam, 3), u[3]);
        EXPECT_EQ(u.tail_bound, Q(0));
    }
}

TEST(Moments, PowerMomentsMatchOracleAndConvert)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        const auto m = build_measure(fam);
        const auto pm = power_moments(m, 8, fam.ctx());
        const auto ref = oracle::power_moments(fam, m.last(), 8);
        for (long k = 0; k <= 8; ++k) EXPECT_EQ(pm[k], ref[k]);
        const auto conv = qfalling_to_power(bruteforce_qmoments(m, 8, fam.ctx()), fam.ctx());
        for (long k = 0; k <= 8; ++k) EXPECT_EQ(conv[k], pm[k]) << s.str() << " k=" << k;
    }
}

TEST(Moments, ApplyFunctionalChecksCoverage)
{
    const auto fam = make<Q>(FamilySpec::kravchuk(R(1, 2), R(1, 3), 4));
    const auto m = build_measure(fam);
    const auto one = GridFunction<Q>::sample(0, 4, [](long) { return Q(1); });
    EXPECT_EQ(apply_functional(m, one), fam.u0());
    EXPECT_THROW((void)apply_functional(m, GridFunction<Q>::sample(0, 2, [](long) { return Q(1); })), Error);
}

TEST(Pearson, ExactResidualIsZero)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        const auto r = pearson_residual(fam, build_measure(fam));
        EXPECT_EQ(r.forward, Q(0)) << s.str();
        EXPECT_EQ(r.backward, Q(0)) << s.str();
    }
}

TEST(Pearson, FloatResidualBelowTolerance)
{
    for (const auto& s : float_specs()) {
        const auto fam = make<Float>(s);
        const auto r = pearson_residual(fam, build_measure(fam));
        EXPECT_LT(r.max(), tol()) << s.str();
    }
}

TEST(Pearson, PerturbedTauIsCaught)
{
    Perturbation p;
    p.tau_factor = R(101, 100);
    for (const auto& s : float_specs()) {
        const auto fam = make<Float>(s, p);
        EXPECT_GT(pearson_residual(fam, build_measure(fam)).max(), Float(1e6) * tol()) << s.str();
    }
    Perturbation printed;
    printed.tau_as_printed = true;
    const auto kr = make<Q>(FamilySpec::kravchuk(R(1, 2), R(1, 3), 4), printed);
    EXPECT_NE(pearson_residual(kr, build_measure(kr)).max(), Q(0));
}

TEST(Boundary, ProductsVanish)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        EXPECT_EQ(boundary_check(fam, build_measure(fam), 8), Q(0)) << s.str();
    }
    for (const auto& s : float_specs()) {
        const auto fam = make<Float>(s);
        EXPECT_LT(boundary_check(fam, build_measure(fam), 8), tol()) << s.str();
    }
}

TEST(SummationByParts, HoldsForPolynomialMultipliers)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        const auto m = build_measure(fam);
        EXPECT_EQ(adjoint_check(fam, m, fam.p()), Q(0));
        EXPECT_EQ(adjoint_check(fam, m, LatticePoly<Q>{Q(2), Q(-1), Q(R(1, 3))}), Q(0));
    }
}

TEST(Recurrence, ExactClosedAndBruteMomentsSatisfyIt)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        const auto brute = bruteforce_qmoments(build_measure(fam), 9, fam.ctx());
        for (long k = 1; k <= 8; ++k) {
            EXPECT_EQ(moment_recurrence_residual(fam, k), Q(0)) << s.str() << " k=" << k;
            EXPECT_EQ(moment_recurrence_residual(fam, brute, k), Q(0)) << s.str() << " k=" << k;
        }
    }
}

TEST(Recurrence, FloatBelowTolerance)
{
    for (const auto& s : float_specs()) {
        const auto fam = make<Float>(s);
        for (long k = 1; k <= 8; ++k) EXPECT_LT(moment_recurrence_residual(fam, k), tol()) << s.str() << " k=" << k;
    }
}

TEST(Recurrence, TermsAreConsistent)
{
    const auto fam = make<Q>(FamilySpec::hahn(R(1, 2), R(1), R(2), 5));
    const auto u = closed_moments(fam, 4);
    const auto t = moment_recurrence_terms(fam.tilde_coeffs(), u, 2, fam.ctx());
    EXPECT_EQ(t.gamma + t.psi, t.xi);
    EXPECT_GT(t.scale, Q(0));
    EXPECT_THROW((void)moment_recurrence_terms(fam.tilde_coeffs(), u, 4, fam.ctx()), Error);
    EXPECT_THROW((void)moment_recurrence_terms(fam.tilde_coeffs(), u, 0, fam.ctx()), Error);
}

TEST(Recurrence, PerturbedMomentIsCaught)
{
    Perturbation p;
    p.moment_factor = R(101, 100);
    for (const auto& s : float_specs()) {
        const auto fam = make<Float>(s, p);
        Float worst(0);
        for (long k = 1; k <= 2; ++k) worst = max_of(worst, moment_recurrence_residual(fam, k));
        EXPECT_GT(worst, Float(1e6) * tol()) << s.str();
    }
}

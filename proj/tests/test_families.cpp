#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qstieltjes;
using Q = QuadRational;

namespace {

Rational R(long n, long d = 1) { return Rational(n, d); }

template <class T>
Family<T> make(const FamilySpec& s)
{
    return Family<T>(s, QContext<T>(s.q));
}

std::vector<FamilySpec> exact_specs()
{
    return {FamilySpec::kravchuk(R(1, 2), R(1, 3), 4), FamilySpec::kravchuk(R(2, 5), R(3, 4), 6),
            FamilySpec::hahn(R(1, 2), R(1), R(2), 4), FamilySpec::hahn(R(1, 3), R(0), R(3), 6),
            FamilySpec::hahn(R(3, 4), R(2), R(0), 3)};
}

std::vector<FamilySpec> float_specs()
{
    return {FamilySpec::charlier(R(1, 2), R(3, 4)), FamilySpec::charlier(R(1, 4), R(1, 2)),
            FamilySpec::meixner(R(1, 2), R(1, 3), R(5, 2)), FamilySpec::meixner(R(2, 3), R(1, 2), R(1)),
            FamilySpec::kravchuk(R(1, 3), R(2, 5), 5), FamilySpec::hahn(R(1, 2), R(1, 3), R(-1, 2), 5),
            FamilySpec::hahn(R(3, 5), R(-2, 3), R(4, 3), 4)};
}

} // namespace

TEST(Spec, ParseRoundTrip)
{
    for (const auto& s : exact_specs()) EXPECT_EQ(FamilySpec::parse(s.str()).str(), s.str());
    for (const auto& s : float_specs()) EXPECT_EQ(FamilySpec::parse(s.str()).str(), s.str());
    const auto h = FamilySpec::parse("hahn:q=1/2,alpha=1,beta=1,N=3");
    EXPECT_EQ(h.kind, FamilyKind::hahn);
    EXPECT_EQ(h.N, 3);
    EXPECT_EQ(h.alpha, R(1));
}

TEST(Spec, ParseErrors)
{
    auto kind_of = [](const char* text) {
        try {
            (void)FamilySpec::parse(text);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::fit; // sentinel: no throw
    };
    EXPECT_EQ(kind_of("laguerre:q=1/2"), ErrorKind::parse);
    EXPECT_EQ(kind_of("charlier:q=1/2"), ErrorKind::parse);
    EXPECT_EQ(kind_of("charlier:q=1/2,mu=1,p=1/2"), ErrorKind::parse);
    EXPECT_EQ(kind_of("kravchuk:q=1/2,p=1/2,N=5/2"), ErrorKind::parse);
    EXPECT_EQ(kind_of("kravchuk:q=1/2,p=3/2,N=2"), ErrorKind::precondition);
    EXPECT_EQ(kind_of("charlier:q=1/2,mu=2"), ErrorKind::precondition);
    EXPECT_EQ(kind_of("hahn:q=1/2,alpha=-1,beta=0,N=3"), ErrorKind::precondition);
    EXPECT_EQ(kind_of("meixner:q=3/2,mu=1/2,gamma=1"), ErrorKind::precondition);
}

TEST(Spec, ExactSupport)
{
    EXPECT_TRUE(FamilySpec::kravchuk(R(1, 2), R(1, 3), 4).exact_supported());
    EXPECT_TRUE(FamilySpec::hahn(R(1, 2), R(1), R(0), 4).exact_supported());
    EXPECT_FALSE(FamilySpec::hahn(R(1, 2), R(1, 2), R(0), 4).exact_supported());
    EXPECT_FALSE(FamilySpec::charlier(R(1, 2), R(1, 2)).exact_supported());
    EXPECT_FALSE(FamilySpec::meixner(R(1, 2), R(1, 2), R(1)).exact_supported());
    try {
        (void)make<Q>(FamilySpec::charlier(R(1, 2), R(1, 2)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::unsupported_exact_input);
    }
}

TEST(Spec, DrawsAreValidAndStayOffTheDegenerateLine)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 400; ++i)
        for (FamilyKind k : all_families) {
            const auto s = draw_spec(k, rng, false, 7);
            EXPECT_NO_THROW(s.validate());
            if (k == FamilyKind::hahn) {
                EXPECT_NE(s.alpha + s.beta, R(-1));
            }
            if (s.support_last()) {
                EXPECT_GE(*s.support_last(), 6);
            }
            const auto e = draw_spec(k, rng, true);
            if (k == FamilyKind::kravchuk || k == FamilyKind::hahn) {
                EXPECT_TRUE(e.exact_supported()) << e.str();
            }
        }
}

TEST(Weights, FormsAgreeExactly)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        for (long sp = 0; sp <= *s.support_last(); ++sp) {
            const Q w = fam.weight(sp);
            EXPECT_GT(w, Q(0)) << s.str();
            EXPECT_EQ(fam.weight_alt(sp), w) << s.str() << " s=" << sp;
            EXPECT_EQ(fam.weight_formula(sp), w) << s.str() << " s=" << sp;
            if (sp < *s.support_last()) {
                EXPECT_EQ(fam.weight(sp + 1) / w, fam.weight_ratio(sp));
            }
        }
        EXPECT_EQ(fam.weight_or_zero(*s.support_last() + 1), Q(0));
        EXPECT_EQ(fam.weight_or_zero(-1), Q(0));
    }
}

TEST(Weights, FloatFormsAgree)
{
    for (const auto& s : float_specs()) {
        const auto fam = make<Float>(s);
        for (long sp = 0; sp <= 12 && fam.in_support(sp); ++sp) {
            EXPECT_LT(oracle::rel(fam.weight_alt(sp) / fam.weight(sp), Float(1)), oracle::tol()) << s.str();
            if (fam.in_support(sp + 1)) {
                EXPECT_LT(oracle::rel(fam.weight(sp + 1) / fam.weight(sp), fam.weight_ratio(sp)), oracle::tol());
            }
        }
    }
}

TEST(Pearson, ForwardFormByHand)
{
    // (sigma(x(s+1)) rho(s+1) - sigma(x(s)) rho(s)) / q^{s-1/2} = tau(x(s)) rho(s), rho = 0 off support.
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        const auto& ctx = fam.ctx();
        for (long sp = 0; sp <= *s.support_last(); ++sp) {
            const Q x0(oracle::lattice(s.q, sp));
            const Q x1(oracle::lattice(s.q, sp + 1));
            const Q lhs = (fam.sigma()(x1) * fam.weight_or_zero(sp + 1) - fam.sigma()(x0) * fam.weight(sp)) /
                          ctx.rpow(2 * sp - 1);
            EXPECT_EQ(lhs, fam.tau()(x0) * fam.weight(sp)) << s.str() << " s=" << sp;
        }
    }
}

TEST(Pearson, PFormIsSigmaPlusTauStep)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        const auto& ctx = fam.ctx();
        for (long sp = -2; sp <= 5; ++sp) {
            const Q x(oracle::lattice(s.q, sp));
            EXPECT_EQ(fam.p()(x), fam.sigma()(x) + fam.tau()(x) * ctx.rpow(2 * sp - 1));
        }
    }
    // charlier: p(w) = mu q (q-1) w + mu q.
    QContext<Float> ctx(R(1, 2));
    Family<Float> ch(FamilySpec::charlier(R(1, 2), R(3, 4)), ctx);
    EXPECT_LT(oracle::rel(ch.p().coeff(0), Float(R(3, 8))), oracle::tol());
    EXPECT_LT(oracle::rel(ch.p().coeff(1), Float(R(-3, 16))), oracle::tol());
    // The w^2 terms cancel; in float only rounding is left.
    EXPECT_LT(boost::multiprecision::abs(ch.p().coeff(2)), oracle::tol());
}

TEST(Pearson, PrintedTauDiffersWhereExpected)
{
    const auto kr = make<Q>(FamilySpec::kravchuk(R(1, 2), R(1, 3), 4));
    EXPECT_NE(kr.tau_as_printed().coeff(0), kr.tau().coeff(0));
    EXPECT_EQ(kr.tau_as_printed().coeff(1), kr.tau().coeff(1));
    const auto hn = make<Q>(FamilySpec::hahn(R(1, 2), R(1), R(3), 4));
    EXPECT_NE(hn.tau_as_printed().coeff(0), hn.tau().coeff(0));
    EXPECT_NE(hn.tau_as_printed().coeff(1), hn.tau().coeff(1));
    const auto ch = make<Float>(FamilySpec::charlier(R(1, 2), R(1, 2)));
    EXPECT_EQ(ch.tau_as_printed().coeff(0), ch.tau().coeff(0));
}

TEST(Pearson, TildeCoefficientsFitMatchesExpansion)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        const auto a = fam.tilde_coeffs();
        const auto b = fam.tilde_coeffs_fit();
        EXPECT_EQ(a.a2, b.a2);
        EXPECT_EQ(a.a1, b.a1);
        EXPECT_EQ(a.a0, b.a0);
        EXPECT_EQ(a.b1, b.b1);
        EXPECT_EQ(a.b0, b.b0);
    }
}

TEST(Moments, ExactKravchukSmall)
{
    const auto fam = make<Q>(FamilySpec::kravchuk(R(1, 2), R(1, 3), 4));
    for (long k = 0; k <= 6; ++k) EXPECT_EQ(fam.closed_moment(k), oracle::qmoment(fam, k, 4)) << k;
    EXPECT_EQ(fam.closed_moment(5), Q(0));
    EXPECT_EQ(fam.u0(), fam.closed_moment(0));
}

TEST(Moments, ExactClosedFormsMatchDirectSums)
{
    for (const auto& s : exact_specs()) {
        const auto fam = make<Q>(s);
        for (long k = 0; k <= 8; ++k)
            EXPECT_EQ(fam.closed_moment(k), oracle::qmoment(fam, k, *s.support_last())) << s.str() << " k=" << k;
    }
}

TEST(Moments, HahnRatioForm)
{
    for (const auto& s : exact_specs()) {
        if (s.kind != FamilyKind::hahn) continue;
        const auto fam = make<Q>(s);
        for (long k = 0; k < s.N; ++k) EXPECT_EQ(fam.hahn_moment_ratio_form(k), fam.closed_moment(k)) << s.str();
    }
}

TEST(Moments, FloatClosedFormsMatchDirectSums)
{
    for (const auto& s : float_specs()) {
        const auto fam = make<Float>(s);
        const long last = s.support_last() ? *s.support_last() : 900;
        for (long k = 0; k <= 8; ++k) {
            const Float direct = oracle::qmoment(fam, k, last);
            const Float closed = fam.closed_moment(k);
            using boost::multiprecision::abs;
            const Float scale = abs(closed) > abs(direct) ? abs(closed) : abs(direct);
            if (scale == 0) continue;
            EXPECT_LT(abs(Float(closed - direct)) / scale, oracle::tol()) << s.str() << " k=" << k;
        }
    }
}

TEST(Moments, PerturbationTouchesOnlyFirstMoment)
{
    const auto s = FamilySpec::kravchuk(R(1, 2), R(1, 3), 4);
    Perturbation p;
    p.moment_factor = R(101, 100);
    Family<Q> bad(s, QContext<Q>(s.q), p);
    const auto good = make<Q>(s);
    EXPECT_EQ(bad.closed_moment(1), good.closed_moment(1) * Q(R(101, 100)));
    EXPECT_EQ(bad.closed_moment(2), good.closed_moment(2));
    EXPECT_EQ(bad.closed_moment(0), good.closed_moment(0));
}

TEST(Constant, NonzeroForDraws)
{
    std::mt19937_64 rng(9);
    for (int i = 0; i < 40; ++i)
        for (FamilyKind k : all_families) {
            const auto fam = make<Float>(draw_spec(k, rng));
            EXPECT_GT(boost::multiprecision::abs(fam.c_constant()), Float(10) * fam.ctx().tol()) << fam.spec().str();
        }
}

TEST(Constant, HahnVanishesOnAlphaPlusBetaMinusOne)
{
    const auto fam = make<Float>(FamilySpec::hahn(R(1, 2), R(-1, 3), R(-2, 3), 4));
    EXPECT_LT(boost::multiprecision::abs(fam.c_constant()), fam.ctx().tol());
    Perturbation p;
    p.c_factor = R(101, 100);
    const auto s = FamilySpec::kravchuk(R(1, 2), R(1, 3), 4);
    Family<Q> bad(s, QContext<Q>(s.q), p);
    EXPECT_EQ(bad.c_constant(), make<Q>(s).c_constant() * Q(R(101, 100)));
}

TEST(Family, RejectsMismatchedContext)
{
    EXPECT_THROW(Family<Q>(FamilySpec::kravchuk(R(1, 2), R(1, 3), 4), QContext<Q>(R(1, 3))), Error);
    const auto fam = make<Q>(FamilySpec::kravchuk(R(1, 2), R(1, 3), 4));
    EXPECT_THROW((void)fam.weight(5), Error);
    EXPECT_THROW((void)fam.closed_moment(-1), Error);
}

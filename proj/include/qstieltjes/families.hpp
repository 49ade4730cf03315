#pragma once

// The q-Charlier, q-Kravchuk, q-Meixner and q-Hahn families on x(s) = (q^s - 1)/(q - 1):
// weights, Pearson data, moments in the q-falling basis, closed Stieltjes
// functions and the constant C_q of the non-homogeneous difference equation.

#include <array>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "context.hpp"
#include "lattice_poly.hpp"
#include "qcore.hpp"
#include "qhyper.hpp"

namespace qstieltjes {

enum class FamilyKind { charlier, kravchuk, meixner, hahn };

inline constexpr std::array<FamilyKind, 4> all_families = {FamilyKind::charlier, FamilyKind::kravchuk,
                                                          FamilyKind::meixner, FamilyKind::hahn};

constexpr std::string_view to_string(FamilyKind kind) noexcept
{
    switch (kind) {
    case FamilyKind::charlier: return "charlier";
    case FamilyKind::kravchuk: return "kravchuk";
    case FamilyKind::meixner: return "meixner";
    case FamilyKind::hahn: return "hahn";
    }
    return "";
}

struct FamilySpec {
    FamilyKind kind = FamilyKind::charlier;
    Rational q{1, 2};
    Rational mu{0};    // charlier, meixner
    Rational p{0};     // kravchuk
    Rational gamma{0}; // meixner
    Rational alpha{0}; // hahn
    Rational beta{0};  // hahn
    long N = 0;        // kravchuk, hahn

    static FamilySpec charlier(Rational q, Rational mu)
    {
        FamilySpec f;
        f.kind = FamilyKind::charlier;
        f.q = std::move(q);
        f.mu = std::move(mu);
        return f;
    }
    static FamilySpec kravchuk(Rational q, Rational p, long N)
    {
        FamilySpec f;
        f.kind = FamilyKind::kravchuk;
        f.q = std::move(q);
        f.p = std::move(p);
        f.N = N;
        return f;
    }
    static FamilySpec meixner(Rational q, Rational mu, Rational gamma)
    {
        FamilySpec f;
        f.kind = FamilyKind::meixner;
        f.q = std::move(q);
        f.mu = std::move(mu);
        f.gamma = std::move(gamma);
        return f;
    }
    static FamilySpec hahn(Rational q, Rational alpha, Rational beta, long N)
    {
        FamilySpec f;
        f.kind = FamilyKind::hahn;
        f.q = std::move(q);
        f.alpha = std::move(alpha);
        f.beta = std::move(beta);
        f.N = N;
        return f;
    }

    /// Throws precondition-error when a parameter constraint is violated.
    void validate() const
    {
        auto fail = [&](const std::string& what) {
            throw Error(ErrorKind::precondition, std::string(to_string(kind)) + ": " + what);
        };
        if (q <= 0 || q >= 1) fail("q must satisfy 0 < q < 1");
        switch (kind) {
        case FamilyKind::charlier:
            if (mu <= 0) fail("mu must be positive");
            if ((1 - q) * mu >= 1) fail("(1 - q) mu must be below 1");
            break;
        case FamilyKind::kravchuk:
            if (p <= 0 || p >= 1) fail("p must satisfy 0 < p < 1");
            if (N < 1) fail("N must be a positive integer");
            break;
        case FamilyKind::meixner:
            if (mu <= 0 || mu >= 1) fail("mu must satisfy 0 < mu < 1");
            if (gamma <= 0) fail("gamma must be positive");
            break;
        case FamilyKind::hahn:
            if (alpha <= -1 || beta <= -1) fail("alpha and beta must exceed -1");
            if (N < 1) fail("N must be a positive integer");
            break;
        }
    }

    [[nodiscard]] bool finite_support() const noexcept
    {
        return kind == FamilyKind::kravchuk || kind == FamilyKind::hahn;
    }

    /// Last support point: N for kravchuk, N-1 for hahn, nullopt for infinite supports.
    [[nodiscard]] std::optional<long> support_last() const noexcept
    {
        if (kind == FamilyKind::kravchuk) return N;
        if (kind == FamilyKind::hahn) return N - 1;
        return std::nullopt;
    }

    /// Exact mode needs every quantity in Q(q^{1/2}): no infinite products
    /// (charlier, meixner) and integer alpha, beta for hahn.
    [[nodiscard]] bool exact_supported() const
    {
        switch (kind) {
        case FamilyKind::charlier:
        case FamilyKind::meixner: return false;
        case FamilyKind::kravchuk: return true;
        case FamilyKind::hahn: return denominator(alpha) == 1 && denominator(beta) == 1;
        }
        return false;
    }

    [[nodiscard]] std::string str() const
    {
        using qstieltjes::to_string;
        std::string out(to_string(kind));
        out += ":q=" + to_string(q);
        switch (kind) {
        case FamilyKind::charlier: out += ",mu=" + to_string(mu); break;
        case FamilyKind::kravchuk: out += ",p=" + to_string(p) + ",N=" + std::to_string(N); break;
        case FamilyKind::meixner: out += ",mu=" + to_string(mu) + ",gamma=" + to_string(gamma); break;
        case FamilyKind::hahn:
            out += ",alpha=" + to_string(alpha) + ",beta=" + to_string(beta) + ",N=" + std::to_string(N);
            break;
        }
        return out;
    }

    /// Parses "kind:key=value,..." e.g. "hahn:q=1/2,alpha=1,beta=1,N=3".
    static FamilySpec parse(std::string_view text)
    {
        const auto colon = text.find(':');
        const std::string_view name = text.substr(0, colon);
        FamilySpec f;
        bool known = false;
        for (FamilyKind k : all_families)
            if (to_string(k) == name) {
                f.kind = k;
                known = true;
            }
        if (!known) throw Error(ErrorKind::parse, "unknown family '" + std::string(name) + "'");

        std::vector<std::string> seen;
        std::string_view rest = colon == std::string_view::npos ? std::string_view() : text.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = rest.substr(0, comma);
            rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos)
                throw Error(ErrorKind::parse, "expected key=value, got '" + std::string(item) + "'");
            const std::string key(item.substr(0, eq));
            const Rational value = parse_rational(item.substr(eq + 1));
            if (key == "q") {
                f.q = value;
            } else if (key == "mu" && (f.kind == FamilyKind::charlier || f.kind == FamilyKind::meixner)) {
                f.mu = value;
            } else if (key == "p" && f.kind == FamilyKind::kravchuk) {
                f.p = value;
            } else if (key == "gamma" && f.kind == FamilyKind::meixner) {
                f.gamma = value;
            } else if (key == "alpha" && f.kind == FamilyKind::hahn) {
                f.alpha = value;
            } else if (key == "beta" && f.kind == FamilyKind::hahn) {
                f.beta = value;
            } else if (key == "N" && (f.kind == FamilyKind::kravchuk || f.kind == FamilyKind::hahn)) {
                if (denominator(value) != 1) throw Error(ErrorKind::parse, "N must be an integer");
                f.N = static_cast<long>(numerator(value));
            } else {
                throw Error(ErrorKind::parse, "unexpected parameter '" + key + "' for " + std::string(name));
            }
            seen.push_back(key);
        }
        auto need = [&](const char* key) {
            for (const auto& s : seen)
                if (s == key) return;
            throw Error(ErrorKind::parse, std::string("missing parameter '") + key + "' for " + std::string(name));
        };
        need("q");
        switch (f.kind) {
        case FamilyKind::charlier: need("mu"); break;
        case FamilyKind::kravchuk: need("p"), need("N"); break;
        case FamilyKind::meixner: need("mu"), need("gamma"); break;
        case FamilyKind::hahn: need("alpha"), need("beta"), need("N"); break;
        }
        f.validate();
        return f;
    }
};

/// Draws a valid parameter set. Draws are small rationals so exact mode stays
/// cheap; exact draws of hahn use integer alpha, beta.
inline FamilySpec draw_spec(FamilyKind kind, std::mt19937_64& rng, bool exact = false, long min_support = 1)
{
    static const std::array<Rational, 7> qs = {Rational(1, 2), Rational(1, 3), Rational(2, 3), Rational(2, 5),
                                               Rational(3, 5), Rational(1, 4), Rational(3, 4)};
    auto pick = [&](long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); };
    const Rational q = qs[static_cast<std::size_t>(pick(0, static_cast<long>(qs.size()) - 1))];
    switch (kind) {
    case FamilyKind::charlier: {
        // (1 - q) mu <= 1/2
        Rational mu(pick(1, 8), 8);
        while ((1 - q) * mu > Rational(1, 2)) mu /= 2;
        return FamilySpec::charlier(q, mu);
    }
    case FamilyKind::kravchuk: {
        const long den = pick(2, 6);
        return FamilySpec::kravchuk(q, Rational(pick(1, den - 1), den), pick(std::max(1L, min_support - 1), 8));
    }
    case FamilyKind::meixner: {
        const long den = pick(2, 6);
        return FamilySpec::meixner(q, Rational(pick(1, den - 1), den), Rational(pick(1, 8), pick(1, 3)));
    }
    case FamilyKind::hahn: {
        const long N = pick(std::max(2L, min_support), 8);
        if (exact) return FamilySpec::hahn(q, Rational(pick(0, 3)), Rational(pick(0, 3)), N);
        // alpha + beta = -1 makes C_q vanish; draws stay off that line.
        for (;;) {
            const Rational a(pick(-2, 8), 3);
            const Rational b(pick(-2, 8), 3);
            if (a + b != -1) return FamilySpec::hahn(q, a, b, N);
        }
    }
    }
    return {};
}

/// Coefficients of sigma~(w) = a2 w^2 + a1 w + a0 and tau~(w) = b1 w + b0.
template <Scalar T>
struct TildeCoeffs {
    T a2{0}, a1{0}, a0{0}, b1{0}, b0{0};
};

/// Deliberate corruptions used by the negative controls.
struct Perturbation {
    Rational tau_factor{1};    // tau -> factor * tau
    Rational c_factor{1};      // C_q -> factor * C_q
    Rational moment_factor{1}; // closed u_1 -> factor * u_1
    bool tau_as_printed = false;

    [[nodiscard]] bool any() const { return tau_factor != 1 || c_factor != 1 || moment_factor != 1 || tau_as_printed; }
};

template <Scalar T>
class Family {
public:
    Family(FamilySpec spec, QContext<T> ctx, Perturbation perturb = {})
        : spec_(std::move(spec)), ctx_(std::move(ctx)), perturb_(std::move(perturb))
    {
        spec_.validate();
        if (spec_.q != ctx_.q_value())
            throw Error(ErrorKind::precondition, "family q differs from the context q");
        if constexpr (is_exact_v<T>) {
            if (!spec_.exact_supported())
                throw Error(ErrorKind::unsupported_exact_input,
                            spec_.str() + " needs float mode (infinite products or non-integer exponents)");
        }
        build_pearson();
        const T& q = ctx_.q();
        if (spec_.kind == FamilyKind::charlier) {
            eq_mu_ = qexp(T((T(1) - q) * num(spec_.mu)), ctx_).value;
            eq_mut_ = qexp(T((T(1) - q) * q * num(spec_.mu)), ctx_).value;
        }
        if (spec_.kind == FamilyKind::meixner) {
            const T mu = num(spec_.mu);
            meixner_ratio_ = qpochhammer_inf(T(mu * ctx_.qpow(spec_.gamma + 1)), ctx_).value /
                             qpochhammer_inf(T(mu * q), ctx_).value;
        }
        u0_ = closed_moment_raw(0);
    }

    [[nodiscard]] const FamilySpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const QContext<T>& ctx() const noexcept { return ctx_; }
    [[nodiscard]] const Perturbation& perturbation() const noexcept { return perturb_; }
    [[nodiscard]] FamilyKind kind() const noexcept { return spec_.kind; }
    [[nodiscard]] std::optional<long> support_last() const noexcept { return spec_.support_last(); }
    [[nodiscard]] bool in_support(long s) const noexcept
    {
        const auto last = support_last();
        return s >= 0 && (!last || s <= *last);
    }

    // -- weights --------------------------------------------------------------

    /// rho(s) in the primary form of each family.
    [[nodiscard]] T weight(long s) const
    {
        require_support(s);
        const T& q = ctx_.q();
        const Rational S(s);
        switch (spec_.kind) {
        case FamilyKind::charlier:
            return ipow(num(spec_.mu), s) / (eq_charlier() * qgamma<T>(S + 1, ctx_));
        case FamilyKind::kravchuk: {
            const T p = num(spec_.p);
            return ctx_.rpow(s * (s - 1)) * qfactorial(spec_.N, ctx_) /
                   (qgamma<T>(S + 1, ctx_) * qgamma<T>(Rational(spec_.N - s + 1), ctx_)) * ipow(p, s) *
                   ipow(T(T(1) - p), spec_.N - s);
        }
        case FamilyKind::meixner:
            return ipow(num(spec_.mu), s) * qgamma<T>(spec_.gamma + s, ctx_) /
                   (qgamma<T>(spec_.gamma, ctx_) * qgamma<T>(S + 1, ctx_));
        case FamilyKind::hahn: {
            const Rational& a = spec_.alpha;
            const Rational& b = spec_.beta;
            const Rational N(spec_.N);
            return ctx_.qpow((a + b) * S / 2) * qgamma_tilde<T>(S + b + 1, ctx_) * qgamma_tilde<T>(N + a - S, ctx_) /
                   (qgamma_tilde<T>(S + 1, ctx_) * qgamma_tilde<T>(N - S, ctx_));
        }
        }
        (void)q;
        return T(0);
    }

    /// rho(s) through the Pochhammer rewriting of each family.
    [[nodiscard]] T weight_alt(long s) const
    {
        require_support(s);
        return weight_formula(s);
    }

    /// The Pochhammer form evaluated at any s >= 0, including points past a
    /// finite support where a vanishing factor (q^{-N};q)_s makes it zero.
    [[nodiscard]] T weight_formula(long s) const
    {
        if (s < 0) throw Error(ErrorKind::support, "weight formula needs s >= 0");
        const T& q = ctx_.q();
        switch (spec_.kind) {
        case FamilyKind::charlier:
            return ipow(T((T(1) - q) * num(spec_.mu)), s) / (eq_charlier() * qpochhammer(q, s, ctx_));
        case FamilyKind::kravchuk: {
            const T p = num(spec_.p);
            const long N = spec_.N;
            return ipow(T(T(1) - p), N) * ctx_.rpow(-N * (N - 1) / 2) * qpochhammer(ctx_.rpow(-2 * N), s, ctx_) /
                   qpochhammer(q, s, ctx_) * ipow(T(p * ctx_.rpow(2 * N) / (p - T(1))), s);
        }
        case FamilyKind::meixner:
            return ipow(num(spec_.mu), s) * qpochhammer(ctx_.qpow(spec_.gamma), s, ctx_) / qpochhammer(q, s, ctx_);
        case FamilyKind::hahn: {
            const Rational& a = spec_.alpha;
            const Rational& b = spec_.beta;
            const long N = spec_.N;
            return hahn_prefactor() * qpochhammer(ctx_.qpow(b + 1), s, ctx_) *
                   qpochhammer(ctx_.rpow(2 - 2 * N), s, ctx_) /
                   (qpochhammer(ctx_.qpow(1 - N - a), s, ctx_) * qpochhammer(q, s, ctx_));
        }
        }
        return T(0);
    }

    /// rho(s), extended by zero outside the support.
    [[nodiscard]] T weight_or_zero(long s) const { return in_support(s) ? weight_alt(s) : T(0); }

    /// rho(s+1)/rho(s) from the Pochhammer form.
    [[nodiscard]] T weight_ratio(long s) const
    {
        const T& q = ctx_.q();
        const T qs1 = ctx_.rpow(2 * s + 2);
        switch (spec_.kind) {
        case FamilyKind::charlier: return (T(1) - q) * num(spec_.mu) / (T(1) - qs1);
        case FamilyKind::kravchuk: {
            const T p = num(spec_.p);
            return (T(1) - ctx_.rpow(2 * (s - spec_.N))) / (T(1) - qs1) * p * ctx_.rpow(2 * spec_.N) / (p - T(1));
        }
        case FamilyKind::meixner:
            return num(spec_.mu) * (T(1) - ctx_.qpow(spec_.gamma + s)) / (T(1) - qs1);
        case FamilyKind::hahn: {
            const Rational& a = spec_.alpha;
            const Rational& b = spec_.beta;
            const long N = spec_.N;
            return (T(1) - ctx_.qpow(b + 1 + s)) * (T(1) - ctx_.rpow(2 * (1 - N + s))) /
                   ((T(1) - ctx_.qpow(1 - N - a + s)) * (T(1) - qs1));
        }
        }
        (void)q;
        return T(0);
    }

    /// Upper bound on |rho(j+1)/rho(j)| for every j >= s (infinite supports only).
    [[nodiscard]] T tail_ratio_bound(long s) const
    {
        const T here = magnitude(weight_ratio(s));
        switch (spec_.kind) {
        case FamilyKind::charlier: return here; // decreasing in s
        case FamilyKind::meixner: {
            // Monotone in s with limit mu: the larger endpoint bounds the rest.
            return max_of(here, num(spec_.mu));
        }
        default: return T(0);
        }
    }

    // -- Pearson data -----------------------------------------------------------

    [[nodiscard]] const LatticePoly<T>& sigma() const noexcept { return sigma_; }
    [[nodiscard]] const LatticePoly<T>& tau() const noexcept { return tau_; }
    /// p(w) = sigma(w) + tau(w) grad x(s+1/2), with q^s = (q-1)w + 1.
    [[nodiscard]] const LatticePoly<T>& p() const noexcept { return p_; }

    /// tau exactly as printed in the source formulas; differs from tau() for
    /// kravchuk (constant term) and hahn (both coefficients).
    [[nodiscard]] LatticePoly<T> tau_as_printed() const { return tau_printed_; }

    /// grad x(s + 1/2) = q^{s-1/2} as a polynomial in w.
    [[nodiscard]] LatticePoly<T> nabla_x_poly() const
    {
        const T rinv = T(1) / ctx_.r();
        return LatticePoly<T>{rinv, rinv * (ctx_.q() - T(1))};
    }

    /// sigma~ = sigma + tau grad x(s+1/2)/2 expanded in w; tau~ = tau.
    [[nodiscard]] TildeCoeffs<T> tilde_coeffs() const
    {
        const LatticePoly<T> st = sigma_ + (T(1) / T(2)) * (tau_ * nabla_x_poly());
        return {st.coeff(2), st.coeff(1), st.coeff(0), tau_.coeff(1), tau_.coeff(0)};
    }

    /// The same coefficients recovered by fitting sigma~ through the lattice
    /// points s = 0, 1, 2 with grad x(s+1/2) evaluated from s directly.
    [[nodiscard]] TildeCoeffs<T> tilde_coeffs_fit() const
    {
        std::array<T, 3> w, v;
        for (long s = 0; s < 3; ++s) {
            w[s] = lattice_x<T>(s, ctx_);
            v[s] = sigma_(w[s]) + tau_(w[s]) * lattice_step(s, ctx_) / T(2);
        }
        const T d01 = (v[1] - v[0]) / (w[1] - w[0]);
        const T d12 = (v[2] - v[1]) / (w[2] - w[1]);
        const T a2 = (d12 - d01) / (w[2] - w[0]);
        const T a1 = d01 - a2 * (w[0] + w[1]);
        const T a0 = v[0] - a1 * w[0] - a2 * w[0] * w[0];
        // tau~ from two points of tau(s).
        const T b1 = (tau_(w[1]) - tau_(w[0])) / (w[1] - w[0]);
        const T b0 = tau_(w[0]) - b1 * w[0];
        return {a2, a1, a0, b1, b0};
    }

    // -- moments --------------------------------------------------------------

    /// u_k^q = sum_s [s]_q^{(k)} rho(s) q^{s-1/2} in closed form.
    [[nodiscard]] T closed_moment(long k) const
    {
        if (k < 0) throw Error(ErrorKind::precondition, "moment order must be nonnegative");
        T u = closed_moment_raw(k);
        if (k == 1 && perturb_.moment_factor != 1) u = u * num(perturb_.moment_factor);
        return u;
    }

    /// u_0^q, always from the closed form.
    [[nodiscard]] const T& u0() const noexcept { return u0_; }

    /// The hahn moments through u_0 and Pochhammer ratios.
    [[nodiscard]] T hahn_moment_ratio_form(long k) const
    {
        if (spec_.kind != FamilyKind::hahn) throw Error(ErrorKind::precondition, "ratio form exists for hahn only");
        const Rational& a = spec_.alpha;
        const Rational& b = spec_.beta;
        const long N = spec_.N;
        const T q = ctx_.q();
        T v = u0() * ctx_.qpow(Rational(k) * (N + a) - Rational(k * (k - 1), 2)) * ipow(T(-1), k);
        v = v * qpochhammer(ctx_.qpow(b + 1), k, ctx_) * qpochhammer(ctx_.rpow(2 - 2 * N), k, ctx_);
        return v / (ipow(T(T(1) - q), k) * qpochhammer(ctx_.qpow(a + b + 2), k, ctx_));
    }

    /// C_q = (a2 q^{-1/2} + b1 q^{-1}(q-1)/2 - b1) u_0^q.
    [[nodiscard]] T c_constant() const
    {
        const auto c = tilde_coeffs();
        const T& q = ctx_.q();
        T v = (c.a2 / ctx_.r() + c.b1 * (q - T(1)) / (T(2) * q) - c.b1) * u0();
        if (perturb_.c_factor != 1) v = v * num(perturb_.c_factor);
        return v;
    }

    // -- closed Stieltjes functions -------------------------------------------

    /// u_0^q / x(z) times the transformed hypergeometric series.
    [[nodiscard]] T stieltjes_closed(const EvalPoint<T>& at) const
    {
        const T& q = ctx_.q();
        const T& t = at.t();
        const T x = at.x(ctx_);
        T series(0);
        switch (spec_.kind) {
        case FamilyKind::charlier:
            series = hyper<T>({q}, {q * t}, num(spec_.mu) * (T(1) - q) * q * t, ctx_);
            break;
        case FamilyKind::kravchuk: {
            const T p = num(spec_.p);
            const long N = spec_.N;
            series = hyper<T>({ctx_.rpow(-2 * N), q}, {q * t, p * q / (p - T(1))},
                              p * ctx_.rpow(2 * N + 2) * t / (p - T(1)), ctx_);
            break;
        }
        case FamilyKind::meixner: {
            const T mu = num(spec_.mu);
            series = hyper<T>({ctx_.qpow(spec_.gamma), q}, {q * t, mu * ctx_.qpow(spec_.gamma + 1)}, mu * q * t, ctx_);
            break;
        }
        case FamilyKind::hahn: {
            const Rational& a = spec_.alpha;
            const Rational& b = spec_.beta;
            const long N = spec_.N;
            series = hyper<T>({ctx_.qpow(b + 1), ctx_.rpow(2 - 2 * N), q}, {q * t, ctx_.qpow(a + b + 2)},
                              ctx_.qpow(N + a) * t, ctx_);
            break;
        }
        }
        return u0() / x * series;
    }

    /// The series obtained directly from the lattice sum, before the
    /// Heine / Jackson / 3phi2 transformation.
    [[nodiscard]] T stieltjes_pretransform(const EvalPoint<T>& at) const
    {
        const T& q = ctx_.q();
        const T& t = at.t();
        const T x = at.x(ctx_);
        const T rinv = T(1) / ctx_.r();
        switch (spec_.kind) {
        case FamilyKind::charlier:
            return rinv / (eq_charlier() * x) *
                   hyper<T>({t, T(0)}, {q * t}, (T(1) - q) * num(spec_.mu) * q, ctx_);
        case FamilyKind::kravchuk: {
            const T p = num(spec_.p);
            const long N = spec_.N;
            const T c = ipow(T(T(1) - p), N) * ctx_.rpow(-N * (N - 1) / 2);
            return c * rinv / x *
                   hyper<T>({ctx_.rpow(-2 * N), t}, {q * t}, p * ctx_.rpow(2 * N + 2) / (p - T(1)), ctx_);
        }
        case FamilyKind::meixner:
            return rinv / x * hyper<T>({ctx_.qpow(spec_.gamma), t}, {q * t}, num(spec_.mu) * q, ctx_);
        case FamilyKind::hahn: {
            const Rational& a = spec_.alpha;
            const Rational& b = spec_.beta;
            const long N = spec_.N;
            return hahn_prefactor() * rinv / x *
                   hyper<T>({ctx_.qpow(b + 1), ctx_.rpow(2 - 2 * N), t}, {ctx_.qpow(1 - N - a), q * t}, q, ctx_);
        }
        }
        return T(0);
    }

private:
    [[nodiscard]] T num(const Rational& v) const { return ctx_.num(v); }

    void require_support(long s) const
    {
        if (!in_support(s))
            throw Error(ErrorKind::support, "s = " + std::to_string(s) + " outside the support of " + spec_.str());
    }

    /// e_q[(1-q) mu], the charlier normalization.
    [[nodiscard]] const T& eq_charlier() const noexcept { return eq_mu_; }

    /// q^{v~} Gamma_q(beta+1) Gamma_q(N+alpha) / Gamma_q(N), with
    /// 2 v~ = alpha(1-N) - alpha(alpha-1)/2 - beta(beta-1)/2.
    [[nodiscard]] T hahn_prefactor() const
    {
        const Rational& a = spec_.alpha;
        const Rational& b = spec_.beta;
        const Rational N(spec_.N);
        const Rational v = (a * (1 - N) - a * (a - 1) / 2 - b * (b - 1) / 2) / 2;
        return ctx_.qpow(v) * qgamma<T>(b + 1, ctx_) * qgamma<T>(N + a, ctx_) / qgamma<T>(N, ctx_);
    }

    [[nodiscard]] T closed_moment_raw(long k) const
    {
        const T& q = ctx_.q();
        switch (spec_.kind) {
        case FamilyKind::charlier: {
            const T mt = q * num(spec_.mu);
            return ipow(mt, k) * eq_mut_ / (ctx_.r() * eq_charlier());
        }
        case FamilyKind::kravchuk: {
            const T p = num(spec_.p);
            const long N = spec_.N;
            if (k > N) return T(0); // (q^{-N};q)_k vanishes; keep float from leaving rounding noise
            const T c = p * q / (p - T(1));
            const T u0 = ipow(T(T(1) - p), N) * ctx_.rpow(-(N * (N - 1) / 2 + 1)) * qpochhammer(c, N, ctx_);
            if (k == 0) return u0;
            return u0 / ipow(T(T(1) - q), k) * qpochhammer(ctx_.rpow(-2 * N), k, ctx_) / qpochhammer(c, k, ctx_) *
                   ipow(T(p * ctx_.rpow(2 * N + 2) / (p - T(1))), k);
        }
        case FamilyKind::meixner: {
            const T mu = num(spec_.mu);
            const T top = mu * ctx_.qpow(spec_.gamma + 1);
            return meixner_ratio_ / ctx_.r() * qgamma<T>(spec_.gamma + k, ctx_) / qgamma<T>(spec_.gamma, ctx_) *
                   ipow(T(q * mu), k) / qpochhammer(top, k, ctx_);
        }
        case FamilyKind::hahn: {
            const Rational& a = spec_.alpha;
            const Rational& b = spec_.beta;
            const long N = spec_.N;
            if (k > N - 1) return T(0);
            auto c2 = [](const Rational& m) { return m * (m - 1) / 2; };
            const Rational K(k);
            const Rational v =
                (a * (2 * K - N + 1) + Rational(N) * (K + 1) - c2(K) - c2(Rational(N)) - c2(a) - c2(b)) / 2 - 1;
            const long m = N - k - 1;
            return qgamma<T>(a + 1, ctx_) * qgamma<T>(b + K + 1, ctx_) * ctx_.qpow(v) /
                   (ipow(T(T(1) - q), m) * qfactorial(m, ctx_)) * qpochhammer(ctx_.qpow(a + b + K + 2), m, ctx_);
        }
        }
        return T(0);
    }

    void build_pearson()
    {
        const T& q = ctx_.q();
        const T r = ctx_.r();
        switch (spec_.kind) {
        case FamilyKind::charlier:
            sigma_ = LatticePoly<T>{T(0), T(1), q - T(1)};
            tau_ = LatticePoly<T>{num(spec_.mu) * r * q, -r};
            tau_printed_ = tau_;
            break;
        case FamilyKind::kravchuk: {
            const T p = num(spec_.p);
            const long N = spec_.N;
            sigma_ = LatticePoly<T>{T(0), T(1), q - T(1)};
            const T b1 = -r * (p * (q - T(1)) + T(1)) / (T(1) - p);
            tau_ = LatticePoly<T>{r * q * p * lattice_x<T>(N, ctx_) / (T(1) - p), b1};
            tau_printed_ = LatticePoly<T>{r * p * q * (ctx_.rpow(2 * N) - T(1)) / (T(1) - p), b1};
            break;
        }
        case FamilyKind::meixner: {
            const T mu = num(spec_.mu);
            const Rational& g = spec_.gamma;
            sigma_ = LatticePoly<T>{T(0), T(1), q - T(1)};
            tau_ = LatticePoly<T>{mu * ctx_.qpow((g + 2) / 2) * qnumber<T>(g, ctx_),
                                  r * (mu * ctx_.qpow(g + 1) - T(1))};
            tau_printed_ = tau_;
            break;
        }
        case FamilyKind::hahn: {
            const Rational& a = spec_.alpha;
            const Rational& b = spec_.beta;
            const Rational N(spec_.N);
            sigma_ = LatticePoly<T>{T(0), qnumber<T>(N + a, ctx_) / r, -ctx_.qpow(-(N + a) / 2)};
            const T n_ab = qnumber<T>(a + b + 2, ctx_);
            const T c0 = qnumber<T>(b + 1, ctx_) * qnumber<T>(N - 1, ctx_);
            tau_ = LatticePoly<T>{ctx_.qpow((a + b + 1) / 2) * c0, -ctx_.qpow((b + 2 - N) / 2) * n_ab};
            tau_printed_ = LatticePoly<T>{ctx_.qpow(a + b + 1) * c0, -ctx_.qpow(-(b + 2 - N) / 2) * n_ab};
            break;
        }
        }
        if (perturb_.tau_as_printed) tau_ = tau_printed_;
        if (perturb_.tau_factor != 1) tau_ = num(perturb_.tau_factor) * tau_;
        p_ = sigma_ + tau_ * nabla_x_poly();
    }

    FamilySpec spec_;
    QContext<T> ctx_;
    Perturbation perturb_;
    LatticePoly<T> sigma_, tau_, tau_printed_, p_;
    // Normalizations fixed at construction so a Family is immutable afterwards.
    T u0_{0}, eq_mu_{0}, eq_mut_{0}, meixner_ratio_{0};
};

} // namespace qstieltjes

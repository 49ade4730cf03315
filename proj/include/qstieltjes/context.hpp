#pragma once

#include <optional>
#include <string>

#include "errors.hpp"
#include "scalar.hpp"

namespace qstieltjes {

inline constexpr int default_digits10 = 60;

/// Decimal tolerance 10^{-(P-15)} paired with a working precision of P digits.
inline Rational default_tolerance(int digits10)
{
    return Rational(BigInt(1), boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(digits10 - 15)));
}

/// The base q of the lattice x(s) = (q^s - 1)/(q - 1) together with the
/// working field: r = q^{1/2}, precision and comparison tolerance.
///
/// Float mode sets the MPFR default precision on construction; values made
/// afterwards inherit it. Exact mode works in Q(r) and has tolerance 0.
template <Scalar T>
class QContext {
public:
    explicit QContext(const Rational& q, int digits10 = default_digits10,
                      std::optional<Rational> tolerance = std::nullopt)
        : q_rat_(q), digits10_(digits10)
    {
        if (q <= 0 || q >= 1)
            throw Error(ErrorKind::precondition, "q must satisfy 0 < q < 1, got " + qstieltjes::to_string(q));
        if constexpr (is_exact_v<T>) {
            q_ = T(q);
            r_ = QuadRational::sqrt_of(q);
            tol_ = T(0);
        } else {
            if (digits10 < 30) throw Error(ErrorKind::precondition, "float precision must be at least 30 digits");
            // Written only on change so worker threads that share one precision never write it.
            if (Float::default_precision() != static_cast<unsigned>(digits10))
                Float::default_precision(static_cast<unsigned>(digits10));
            q_ = T(q);
            r_ = boost::multiprecision::sqrt(q_);
            tol_ = T(tolerance.value_or(default_tolerance(digits10)));
        }
        r_inv_ = T(1) / r_;
    }

    [[nodiscard]] const Rational& q_value() const noexcept { return q_rat_; }
    [[nodiscard]] const T& q() const noexcept { return q_; }
    [[nodiscard]] const T& r() const noexcept { return r_; }
    [[nodiscard]] const T& tol() const noexcept { return tol_; }
    [[nodiscard]] int digits10() const noexcept { return digits10_; }
    [[nodiscard]] static constexpr bool exact() noexcept { return is_exact_v<T>; }

    [[nodiscard]] T num(const Rational& v) const { return scalar_traits<T>::from_rational(v); }
    [[nodiscard]] T num(long n, long d = 1) const { return num(Rational(n, d)); }

    /// q^{n/2}.
    [[nodiscard]] T rpow(long n) const
    {
        T half = (n % 2 == 0) ? T(1) : (n > 0 ? r_ : r_inv_);
        return half * ipow(q_, n / 2);
    }

    /// q^e; exact mode only supports e in (1/2)Z.
    [[nodiscard]] T qpow(const Rational& e) const
    {
        const Rational twice = 2 * e;
        if (denominator(twice) == 1) return rpow(static_cast<long>(numerator(twice)));
        if constexpr (is_exact_v<T>) {
            throw Error(ErrorKind::unsupported_exact_input,
                        "q^(" + qstieltjes::to_string(e) + ") is not in Q(q^{1/2})");
        } else {
            return boost::multiprecision::pow(q_, T(e));
        }
    }

    /// True when |v| is below the comparison tolerance (exact zero in exact mode).
    [[nodiscard]] bool negligible(const T& v) const
    {
        if constexpr (is_exact_v<T>) {
            return v == T(0);
        } else {
            return magnitude(v) < tol_;
        }
    }

private:
    Rational q_rat_;
    int digits10_;
    T q_;
    T r_;
    T r_inv_;
    T tol_;
};

using FloatContext = QContext<Float>;
using ExactContext = QContext<QuadRational>;

} // namespace qstieltjes

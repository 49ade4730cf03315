#pragma once

// Scalar backends. Every algorithm in the library is a template over a type
// satisfying the Scalar concept below; two models are provided:
//
//  - Float        : MPFR float with run-time precision (float mode).
//  - QuadRational : exact element a + b*sqrt(d) of the quadratic field
//                   Q(sqrt d) (exact mode). Half-integer powers of q force
//                   q^{1/2} everywhere, so plain rationals are not enough.

#include <compare>
#include <concepts>
#include <cstdint>
#include <ios>
#include <string>
#include <string_view>
#include <utility>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "errors.hpp"

namespace qstieltjes {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;
using Float = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                            boost::multiprecision::et_off>;

/// Parses "3", "-2/5", " 1/2 " into a rational. Decimal literals are rejected
/// on purpose: only rationals keep exact mode reachable.
inline Rational parse_rational(std::string_view text)
{
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    };
    text = trim(text);
    auto is_int = [](std::string_view s) {
        if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
        if (s.empty()) return false;
        for (char c : s)
            if (c < '0' || c > '9') return false;
        return true;
    };
    const auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
    num = trim(num);
    den = trim(den);
    if (!is_int(num) || !is_int(den) || den.front() == '-' || den.front() == '+')
        throw Error(ErrorKind::parse, "not a rational literal: '" + std::string(text) + "'");
    std::string n(num);
    if (n.front() == '+') n.erase(0, 1);
    const BigInt d{std::string(den)};
    if (d == 0) throw Error(ErrorKind::parse, "zero denominator in '" + std::string(text) + "'");
    return Rational(BigInt(n), d);
}

inline std::string to_string(const Rational& v)
{
    if (denominator(v) == 1) return numerator(v).str();
    return numerator(v).str() + "/" + denominator(v).str();
}

/// Returns sqrt(v) when v is the square of a rational, and false otherwise.
inline bool rational_sqrt(const Rational& v, Rational& out)
{
    if (v < 0) return false;
    const BigInt n = numerator(v);
    const BigInt d = denominator(v);
    const BigInt sn = boost::multiprecision::sqrt(n);
    const BigInt sd = boost::multiprecision::sqrt(d);
    if (sn * sn != n || sd * sd != d) return false;
    out = Rational(sn, sd);
    return true;
}

class QuadRational {
public:
    QuadRational() = default;
    QuadRational(int v) : a_(v) {}
    QuadRational(long v) : a_(v) {}
    QuadRational(long long v) : a_(v) {}
    QuadRational(Rational a) : a_(std::move(a)) {}

    QuadRational(Rational a, Rational b, const Rational& radicand) : a_(std::move(a)), b_(std::move(b))
    {
        if (b_ == 0) return;
        if (radicand <= 0) throw Error(ErrorKind::precondition, "radicand must be positive");
        Rational root;
        if (rational_sqrt(radicand, root)) {
            a_ += b_ * root;
            b_ = 0;
        } else {
            d_ = radicand;
        }
    }

    /// sqrt(d) as a field element; collapses to a rational for square d.
    static QuadRational sqrt_of(const Rational& d) { return QuadRational(Rational(0), Rational(1), d); }

    [[nodiscard]] const Rational& rational_part() const noexcept { return a_; }
    [[nodiscard]] const Rational& radical_part() const noexcept { return b_; }
    [[nodiscard]] const Rational& radicand() const noexcept { return d_; }
    [[nodiscard]] bool is_rational() const noexcept { return b_ == 0; }
    [[nodiscard]] bool is_zero() const noexcept { return a_ == 0 && b_ == 0; }

    [[nodiscard]] QuadRational conjugate() const
    {
        QuadRational c = *this;
        c.b_ = -c.b_;
        return c;
    }

    /// Field norm a^2 - b^2 d; nonzero for every nonzero element.
    [[nodiscard]] Rational norm() const { return a_ * a_ - b_ * b_ * d_; }

    [[nodiscard]] int sign() const
    {
        const int sa = a_.sign();
        const int sb = b_.sign();
        if (sb == 0) return sa;
        if (sa == 0) return sb;
        if (sa == sb) return sa;
        // Opposite signs: compare a^2 against b^2 d.
        const Rational lhs = a_ * a_;
        const Rational rhs = b_ * b_ * d_;
        const int cmp = lhs.compare(rhs);
        if (cmp == 0) return 0;
        return cmp > 0 ? sa : sb;
    }

    [[nodiscard]] Float to_float() const
    {
        Float v(a_);
        if (b_ != 0) v += Float(b_) * boost::multiprecision::sqrt(Float(d_));
        return v;
    }

    /// "a", "b[r]" or "a + b[r]" with a, b written as num/den; [r] stands for sqrt(q).
    [[nodiscard]] std::string str() const
    {
        if (b_ == 0) return qstieltjes::to_string(a_);
        std::string radical = qstieltjes::to_string(b_ < 0 ? Rational(-b_) : b_) + "[r]";
        if (a_ == 0) return (b_ < 0 ? "-" : "") + radical;
        return qstieltjes::to_string(a_) + (b_ < 0 ? " - " : " + ") + radical;
    }

    QuadRational operator-() const
    {
        QuadRational c = *this;
        c.a_ = -c.a_;
        c.b_ = -c.b_;
        return c;
    }

    QuadRational& operator+=(const QuadRational& o)
    {
        adopt_radicand(o);
        a_ += o.a_;
        b_ += o.b_;
        canonicalize();
        return *this;
    }
    QuadRational& operator-=(const QuadRational& o)
    {
        adopt_radicand(o);
        a_ -= o.a_;
        b_ -= o.b_;
        canonicalize();
        return *this;
    }
    QuadRational& operator*=(const QuadRational& o)
    {
        adopt_radicand(o);
        Rational a = a_ * o.a_ + b_ * o.b_ * d_;
        Rational b = a_ * o.b_ + b_ * o.a_;
        a_ = std::move(a);
        b_ = std::move(b);
        canonicalize();
        return *this;
    }
    QuadRational& operator/=(const QuadRational& o)
    {
        if (o.is_zero()) throw Error(ErrorKind::pole, "division by zero in exact arithmetic");
        if (o.b_ == 0) {
            a_ /= o.a_;
            b_ /= o.a_;
            return *this;
        }
        const Rational n = o.norm();
        *this *= o.conjugate();
        a_ /= n;
        b_ /= n;
        canonicalize();
        return *this;
    }

    friend QuadRational operator+(QuadRational x, const QuadRational& y) { return x += y; }
    friend QuadRational operator-(QuadRational x, const QuadRational& y) { return x -= y; }
    friend QuadRational operator*(QuadRational x, const QuadRational& y) { return x *= y; }
    friend QuadRational operator/(QuadRational x, const QuadRational& y) { return x /= y; }

    friend bool operator==(const QuadRational& x, const QuadRational& y) { return x.a_ == y.a_ && x.b_ == y.b_; }
    friend std::strong_ordering operator<=>(const QuadRational& x, const QuadRational& y)
    {
        const int s = (x - y).sign();
        return s < 0 ? std::strong_ordering::less
                     : (s > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    void adopt_radicand(const QuadRational& o)
    {
        if (o.b_ == 0) return;
        if (b_ == 0) {
            d_ = o.d_;
        } else if (d_ != o.d_) {
            throw Error(ErrorKind::precondition, "mixing elements of different quadratic fields");
        }
    }
    void canonicalize()
    {
        if (b_ == 0) d_ = 0;
    }

    Rational a_;
    Rational b_;
    Rational d_; // zero whenever b_ is zero
};

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<Float> {
    static constexpr bool exact = false;
    static constexpr std::string_view mode = "float";
    static Float from_rational(const Rational& v) { return Float(v); }
    static Float to_float(const Float& v) { return v; }
    static std::string format(const Float& v, int digits = 20)
    {
        if (v == 0) return "0";
        return v.str(digits, std::ios_base::scientific);
    }
};

template <>
struct scalar_traits<QuadRational> {
    static constexpr bool exact = true;
    static constexpr std::string_view mode = "exact";
    static QuadRational from_rational(const Rational& v) { return QuadRational(v); }
    static Float to_float(const QuadRational& v) { return v.to_float(); }
    static std::string format(const QuadRational& v, int = 0) { return v.str(); }
};

template <class T>
concept Scalar = std::copy_constructible<T> && std::totally_ordered<T> && requires(const T& a, const T& b) {
    { a + b } -> std::convertible_to<T>;
    { a - b } -> std::convertible_to<T>;
    { a * b } -> std::convertible_to<T>;
    { a / b } -> std::convertible_to<T>;
    { -a } -> std::convertible_to<T>;
    { T(1) };
    { scalar_traits<T>::exact } -> std::convertible_to<bool>;
};

template <Scalar T>
inline constexpr bool is_exact_v = scalar_traits<T>::exact;

template <Scalar T>
[[nodiscard]] T magnitude(const T& v)
{
    return v < T(0) ? T(-v) : v;
}

template <Scalar T>
[[nodiscard]] T max_of(const T& a, const T& b)
{
    return a < b ? b : a;
}

/// v^n for integer n by repeated squaring.
template <Scalar T>
[[nodiscard]] T ipow(const T& v, long n)
{
    if (n < 0) return T(1) / ipow(v, -n);
    T result(1);
    T base = v;
    while (n > 0) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n > 0) base = base * base;
    }
    return result;
}

template <Scalar T>
[[nodiscard]] std::string format(const T& v, int digits = 20)
{
    return scalar_traits<T>::format(v, digits);
}

template <Scalar T>
[[nodiscard]] Float to_float(const T& v)
{
    return scalar_traits<T>::to_float(v);
}

} // namespace qstieltjes

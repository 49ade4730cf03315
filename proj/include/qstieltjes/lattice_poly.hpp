#pragma once

// Dense polynomials in w = x(s).

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "scalar.hpp"

namespace qstieltjes {

template <Scalar T>
class LatticePoly {
public:
    LatticePoly() = default;
    LatticePoly(std::initializer_list<T> coeffs) : c_(coeffs) { trim(); }
    explicit LatticePoly(std::vector<T> coeffs) : c_(std::move(coeffs)) { trim(); }

    static LatticePoly constant(const T& v) { return LatticePoly(std::vector<T>{v}); }
    static LatticePoly monomial(std::size_t n, const T& v = T(1))
    {
        std::vector<T> c(n + 1, T(0));
        c[n] = v;
        return LatticePoly(std::move(c));
    }

    /// -1 for the zero polynomial.
    [[nodiscard]] long degree() const noexcept { return static_cast<long>(c_.size()) - 1; }
    [[nodiscard]] bool is_zero() const noexcept { return c_.empty(); }
    [[nodiscard]] const std::vector<T>& coeffs() const noexcept { return c_; }

    /// Coefficient of w^i, zero past the degree.
    [[nodiscard]] T coeff(std::size_t i) const { return i < c_.size() ? c_[i] : T(0); }
    [[nodiscard]] T leading() const { return c_.empty() ? T(0) : c_.back(); }

    [[nodiscard]] T operator()(const T& w) const
    {
        T acc(0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * w + *it;
        return acc;
    }

    /// sum_i |c_i| |w|^i, the natural size of an evaluation before cancellation.
    [[nodiscard]] T abs_eval(const T& w) const
    {
        const T aw = magnitude(w);
        T acc(0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * aw + magnitude(*it);
        return acc;
    }

    LatticePoly& operator+=(const LatticePoly& o)
    {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), T(0));
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] = c_[i] + o.c_[i];
        trim();
        return *this;
    }
    LatticePoly& operator-=(const LatticePoly& o) { return *this += -o; }

    LatticePoly operator-() const
    {
        LatticePoly r = *this;
        for (T& v : r.c_) v = -v;
        return r;
    }

    friend LatticePoly operator+(LatticePoly a, const LatticePoly& b) { return a += b; }
    friend LatticePoly operator-(LatticePoly a, const LatticePoly& b) { return a -= b; }

    friend LatticePoly operator*(const LatticePoly& a, const LatticePoly& b)
    {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<T> c(a.c_.size() + b.c_.size() - 1, T(0));
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] = c[i + j] + a.c_[i] * b.c_[j];
        return LatticePoly(std::move(c));
    }
    friend LatticePoly operator*(const T& s, LatticePoly a)
    {
        for (T& v : a.c_) v = s * v;
        a.trim();
        return a;
    }
    friend LatticePoly operator*(LatticePoly a, const T& s) { return s * std::move(a); }

    friend bool operator==(const LatticePoly& a, const LatticePoly& b) { return a.c_ == b.c_; }

    /// Quotient of (P(z) - P(c)) / (z - c), by synthetic division.
    [[nodiscard]] LatticePoly divided_difference(const T& c) const
    {
        if (c_.size() < 2) return {};
        std::vector<T> quo(c_.size() - 1, T(0));
        T carry(0);
        for (std::size_t i = c_.size() - 1; i >= 1; --i) {
            carry = carry * c + c_[i];
            quo[i - 1] = carry;
        }
        return LatticePoly(std::move(quo));
    }

    [[nodiscard]] std::string str(int digits = 20) const
    {
        if (c_.empty()) return "0";
        std::string out;
        for (std::size_t i = 0; i < c_.size(); ++i) {
            if (i) out += " + ";
            out += "(" + format(c_[i], digits) + ")";
            if (i == 1) out += "*w";
            if (i > 1) out += "*w^" + std::to_string(i);
        }
        return out;
    }

private:
    // Only exact zeros are trimmed; a float coefficient of 1e-70 is kept.
    void trim()
    {
        while (!c_.empty() && c_.back() == T(0)) c_.pop_back();
    }

    std::vector<T> c_;
};

} // namespace qstieltjes

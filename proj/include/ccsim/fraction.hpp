#pragma once

/// Exact rationals for token proportions (toehold, freeze-out, deposit share,
/// market-size cap, gamma, epsilon). Always stored reduced with a positive
/// denominator.

#include <cstdint>
#include <stdexcept>
#include <string>

#include "ccsim/money.hpp"

namespace ccsim {

class FractionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Fraction {
public:
    constexpr Fraction() = default;
    Fraction(std::int64_t num, std::int64_t den);

    static Fraction zero() { return Fraction(); }
    static Fraction one() { return Fraction(1, 1); }

    /// Parses "num/den" or a bare integer string.
    static Fraction parse(const std::string& text);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }

    std::string str() const;

    friend bool operator==(const Fraction& a, const Fraction& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator<(const Fraction& a, const Fraction& b);
    friend bool operator<=(const Fraction& a, const Fraction& b) { return !(b < a); }
    friend bool operator>(const Fraction& a, const Fraction& b) { return b < a; }
    friend bool operator>=(const Fraction& a, const Fraction& b) { return !(a < b); }

    Fraction operator+(const Fraction& o) const;
    Fraction operator-(const Fraction& o) const;
    Fraction operator*(const Fraction& o) const;

    /// 1 - f, the complement share.
    Fraction complement() const;

    /// f * n rounded down / exact (throws if inexact).
    std::int64_t times_floor(std::int64_t n) const;
    std::int64_t times_exact(std::int64_t n) const;

    Money times_floor(Money m) const { return Money::mul_div_floor(m, num_, den_); }
    Money times_ceil(Money m) const { return Money::mul_div_ceil(m, num_, den_); }

    bool in_unit_interval() const { return num_ >= 0 && num_ <= den_; }
    bool in_signed_unit_interval() const { return num_ >= -den_ && num_ <= den_; }

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

}  // namespace ccsim

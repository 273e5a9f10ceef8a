#pragma once

/// Exact fixed-point money: signed count of minor units at scale 10^-6 of the
/// reference fiat. Every settlement amount in the engine is one of these;
/// no floating point touches a settlement path.

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccsim {

class MoneyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Money {
public:
    static constexpr std::int64_t kScale = 1'000'000;  // minor units per fiat unit

    constexpr Money() = default;

    static constexpr Money from_minor(std::int64_t units) { return Money(units); }
    static constexpr Money from_fiat(std::int64_t whole) { return Money(whole * kScale); }

    /// Parses a plain decimal string ("12", "-3.5", "0.000001").
    /// At most six fractional digits; anything else is rejected.
    static Money parse(const std::string& text);

    constexpr std::int64_t minor() const { return minor_; }
    constexpr bool is_zero() const { return minor_ == 0; }
    constexpr bool is_negative() const { return minor_ < 0; }

    /// Canonical decimal rendering, trailing zeros trimmed ("12", "-3.5").
    std::string str() const;

    friend constexpr bool operator==(Money a, Money b) { return a.minor_ == b.minor_; }
    friend constexpr auto operator<=>(Money a, Money b) { return a.minor_ <=> b.minor_; }

    Money operator-() const { return Money(checked_neg(minor_)); }
    Money& operator+=(Money o) { minor_ = checked_add(minor_, o.minor_); return *this; }
    Money& operator-=(Money o) { minor_ = checked_sub(minor_, o.minor_); return *this; }
    friend Money operator+(Money a, Money b) { return a += b; }
    friend Money operator-(Money a, Money b) { return a -= b; }

    /// Money-per-token times a token count.
    friend Money operator*(Money a, std::int64_t n) { return Money(checked_mul(a.minor_, n)); }
    friend Money operator*(std::int64_t n, Money a) { return a * n; }

    /// Floor division of a money total by a per-token price: token quantity.
    /// Exact variant throws on a nonzero remainder.
    static std::int64_t div_towards_neg_inf(Money total, Money per_unit);
    static std::int64_t div_exact(Money total, Money per_unit);

    /// (value * num) / den with an 128-bit intermediate.
    static Money mul_div_floor(Money value, std::int64_t num, std::int64_t den);
    static Money mul_div_ceil(Money value, std::int64_t num, std::int64_t den);

private:
    explicit constexpr Money(std::int64_t m) : minor_(m) {}

    static std::int64_t checked_add(std::int64_t a, std::int64_t b);
    static std::int64_t checked_sub(std::int64_t a, std::int64_t b);
    static std::int64_t checked_mul(std::int64_t a, std::int64_t b);
    static std::int64_t checked_neg(std::int64_t a);

    std::int64_t minor_ = 0;
};

inline Money max(Money a, Money b) { return a < b ? b : a; }
inline Money min(Money a, Money b) { return b < a ? b : a; }

/// Splits `total` over `weights` so the parts sum exactly to `total`:
/// floor quotas first, then one extra unit each to the largest remainders,
/// ties broken by ascending index. Negative weights are rejected; a zero
/// total weight is rejected unless total == 0. Works for minor units and
/// token counts alike.
std::vector<std::int64_t> allocate_largest_remainder(std::int64_t total,
                                                     std::span<const std::int64_t> weights);

}  // namespace ccsim

#include "ccsim/fraction.hpp"

#include <numeric>

namespace ccsim {

namespace {
using i128 = __int128;

std::int64_t narrow(i128 v, const char* what) {
    if (v > std::numeric_limits<std::int64_t>::max() ||
        v < std::numeric_limits<std::int64_t>::min()) {
        throw FractionError(std::string("fraction overflow in ") + what);
    }
    return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Fraction make_reduced(i128 num, i128 den, const char* what) {
    if (den == 0) throw FractionError("zero denominator");
    if (den < 0) { den = -den; num = -num; }
    i128 g = gcd128(num, den);
    if (g > 1) { num /= g; den /= g; }
    return Fraction(narrow(num, what), narrow(den, what));
}

}  // namespace

Fraction::Fraction(std::int64_t num, std::int64_t den) {
    if (den == 0) throw FractionError("zero denominator");
    if (den < 0) {
        if (num == std::numeric_limits<std::int64_t>::min() ||
            den == std::numeric_limits<std::int64_t>::min()) {
            throw FractionError("fraction out of range");
        }
        den = -den;
        num = -num;
    }
    std::int64_t g = std::gcd(num, den);
    if (g > 1) { num /= g; den /= g; }
    num_ = num;
    den_ = den;
}

Fraction Fraction::parse(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            return Fraction(std::stoll(text), 1);
        }
        return Fraction(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
    } catch (const std::logic_error&) {
        throw FractionError("bad fraction literal: " + text);
    }
}

std::string Fraction::str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

bool operator<(const Fraction& a, const Fraction& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
}

Fraction Fraction::operator+(const Fraction& o) const {
    return make_reduced(i128(num_) * o.den_ + i128(o.num_) * den_, i128(den_) * o.den_, "add");
}

Fraction Fraction::operator-(const Fraction& o) const {
    return make_reduced(i128(num_) * o.den_ - i128(o.num_) * den_, i128(den_) * o.den_, "sub");
}

Fraction Fraction::operator*(const Fraction& o) const {
    return make_reduced(i128(num_) * o.num_, i128(den_) * o.den_, "mul");
}

Fraction Fraction::complement() const {
    return make_reduced(i128(den_) - num_, den_, "complement");
}

std::int64_t Fraction::times_floor(std::int64_t n) const {
    i128 prod = i128(num_) * n;
    i128 q = prod / den_;
    if (prod % den_ != 0 && prod < 0) --q;
    return narrow(q, "times_floor");
}

std::int64_t Fraction::times_exact(std::int64_t n) const {
    i128 prod = i128(num_) * n;
    if (prod % den_ != 0) throw FractionError("inexact fraction multiple");
    return narrow(prod / den_, "times_exact");
}

}  // namespace ccsim

#include "ccsim/money.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace ccsim {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v, const char* what) {
    if (v > std::numeric_limits<std::int64_t>::max() ||
        v < std::numeric_limits<std::int64_t>::min()) {
        throw MoneyError(std::string("money overflow in ") + what);
    }
    return static_cast<std::int64_t>(v);
}

}  // namespace

std::int64_t Money::checked_add(std::int64_t a, std::int64_t b) {
    return narrow(i128(a) + i128(b), "add");
}

std::int64_t Money::checked_sub(std::int64_t a, std::int64_t b) {
    return narrow(i128(a) - i128(b), "sub");
}

std::int64_t Money::checked_mul(std::int64_t a, std::int64_t b) {
    return narrow(i128(a) * i128(b), "mul");
}

std::int64_t Money::checked_neg(std::int64_t a) {
    return narrow(-i128(a), "neg");
}

std::int64_t Money::div_towards_neg_inf(Money total, Money per_unit) {
    if (per_unit.minor_ == 0) throw MoneyError("division by zero price");
    std::int64_t q = total.minor_ / per_unit.minor_;
    std::int64_t r = total.minor_ % per_unit.minor_;
    if (r != 0 && ((r < 0) != (per_unit.minor_ < 0))) --q;
    return q;
}

std::int64_t Money::div_exact(Money total, Money per_unit) {
    if (per_unit.minor_ == 0) throw MoneyError("division by zero price");
    if (total.minor_ % per_unit.minor_ != 0) throw MoneyError("inexact division");
    return total.minor_ / per_unit.minor_;
}

Money Money::mul_div_floor(Money value, std::int64_t num, std::int64_t den) {
    if (den == 0) throw MoneyError("division by zero");
    if (den < 0) { den = -den; num = narrow(-i128(num), "mul_div"); }
    i128 prod = i128(value.minor_) * i128(num);
    i128 q = prod / den;
    if (prod % den != 0 && prod < 0) --q;
    return Money(narrow(q, "mul_div_floor"));
}

Money Money::mul_div_ceil(Money value, std::int64_t num, std::int64_t den) {
    if (den == 0) throw MoneyError("division by zero");
    if (den < 0) { den = -den; num = narrow(-i128(num), "mul_div"); }
    i128 prod = i128(value.minor_) * i128(num);
    i128 q = prod / den;
    if (prod % den != 0 && prod > 0) ++q;
    return Money(narrow(q, "mul_div_ceil"));
}

Money Money::parse(const std::string& text) {
    if (text.empty()) throw MoneyError("empty money literal");
    std::size_t i = 0;
    bool neg = false;
    if (text[i] == '+' || text[i] == '-') { neg = text[i] == '-'; ++i; }
    if (i == text.size()) throw MoneyError("bad money literal: " + text);

    i128 whole = 0;
    bool any_digit = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        whole = whole * 10 + (text[i] - '0');
        if (whole > i128(std::numeric_limits<std::int64_t>::max())) {
            throw MoneyError("money literal out of range: " + text);
        }
        any_digit = true;
        ++i;
    }
    std::int64_t frac = 0;
    if (i < text.size() && text[i] == '.') {
        ++i;
        int digits = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            if (++digits > 6) throw MoneyError("more than 6 decimal places: " + text);
            frac = frac * 10 + (text[i] - '0');
            any_digit = true;
            ++i;
        }
        for (int d = digits; d < 6; ++d) frac *= 10;
    }
    if (!any_digit || i != text.size()) throw MoneyError("bad money literal: " + text);
    i128 total = whole * kScale + frac;
    if (neg) total = -total;
    return Money(narrow(total, "parse"));
}

std::string Money::str() const {
    std::int64_t v = minor_;
    std::string sign;
    unsigned long long mag;
    if (v < 0) {
        sign = "-";
        mag = ~static_cast<unsigned long long>(v) + 1ULL;
    } else {
        mag = static_cast<unsigned long long>(v);
    }
    unsigned long long whole = mag / kScale;
    unsigned long long frac = mag % kScale;
    std::string out = sign + std::to_string(whole);
    if (frac != 0) {
        std::string f = std::to_string(frac);
        f.insert(f.begin(), 6 - f.size(), '0');
        while (!f.empty() && f.back() == '0') f.pop_back();
        out += "." + f;
    }
    return out;
}

std::vector<std::int64_t> allocate_largest_remainder(std::int64_t total,
                                                     std::span<const std::int64_t> weights) {
    i128 weight_sum = 0;
    for (std::int64_t w : weights) {
        if (w < 0) throw MoneyError("negative allocation weight");
        weight_sum += w;
    }
    if (weight_sum == 0) {
        if (total != 0) throw MoneyError("cannot allocate nonzero total over zero weight");
        return std::vector<std::int64_t>(weights.size(), 0);
    }
    if (total < 0) {
        auto flipped = allocate_largest_remainder(-total, weights);
        for (auto& v : flipped) v = -v;
        return flipped;
    }

    std::vector<std::int64_t> parts(weights.size(), 0);
    std::vector<i128> remainders(weights.size(), 0);
    i128 assigned = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        i128 prod = i128(total) * i128(weights[k]);
        parts[k] = static_cast<std::int64_t>(prod / weight_sum);
        remainders[k] = prod % weight_sum;
        assigned += parts[k];
    }
    std::int64_t leftover = static_cast<std::int64_t>(i128(total) - assigned);

    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return remainders[a] > remainders[b];  // ties keep ascending index
    });
    for (std::int64_t k = 0; k < leftover; ++k) parts[order[static_cast<std::size_t>(k)]] += 1;
    return parts;
}

}  // namespace ccsim

#include "ccsim/mechanism.hpp"

namespace ccsim {

const char* bid_error_name(BidError e) {
    switch (e) {
        case BidError::None: return "none";
        case BidError::ValueClaimBelowReserve: return "value_claim_below_reserve";
        case BidError::DegenerateClaim: return "degenerate_claim";
        case BidError::SurplusClaimExceedsCap: return "surplus_claim_exceeds_cap";
        case BidError::MarketSize: return "market_size";
        case BidError::ToeholdExceedsCap: return "toehold_exceeds_cap";
        case BidError::NegativeClaimExceedsToehold: return "negative_claim_exceeds_toehold";
        case BidError::InsufficientFunding: return "insufficient_funding";
    }
    return "unknown";
}

Tokens HolderRegistry::balance(const HolderId& id) const {
    auto it = holdings_.find(id);
    return it == holdings_.end() ? 0 : it->second;
}

void HolderRegistry::set(const HolderId& id, Tokens count) {
    if (count < 0) throw MoneyError("negative holding for " + id);
    auto it = holdings_.find(id);
    if (it != holdings_.end()) {
        total_ -= it->second;
        if (count == 0) holdings_.erase(it); else it->second = count;
    } else if (count != 0) {
        holdings_[id] = count;
    }
    total_ += count;
}

void HolderRegistry::add(const HolderId& id, Tokens delta) {
    set(id, balance(id) + delta);
}

std::vector<std::pair<HolderId, Tokens>> HolderRegistry::snapshot_excluding(
    const HolderId& excluded) const {
    std::vector<std::pair<HolderId, Tokens>> out;
    out.reserve(holdings_.size());
    for (const auto& [id, n] : holdings_) {
        if (id != excluded && n > 0) out.emplace_back(id, n);
    }
    return out;
}

Money auction_parameter(const Bid& bid, Money reserve_price, Tokens q) {
    return (bid.value_claim - reserve_price) * (q - bid.toehold_tokens) - bid.surplus_claim;
}

Tokens freezeout_token_count(const Bid& bid, Money reserve_price) {
    Money gain = bid.value_claim - reserve_price;
    if (gain.is_zero()) {
        if (!bid.surplus_claim.is_zero()) {
            throw MoneyError("degenerate claim: S == P0 with R != 0");
        }
        return 0;
    }
    if (bid.surplus_claim >= Money{}) {
        return Money::div_towards_neg_inf(bid.surplus_claim, gain);
    }
    // sale leg rounds toward zero: never offer more than R accounts for
    return -Money::div_towards_neg_inf(-bid.surplus_claim, gain);
}

Fraction freezeout_fraction(const Bid& bid, Money reserve_price, Tokens q) {
    return Fraction(freezeout_token_count(bid, reserve_price), q);
}

DepositSet required_deposits(const Bid& bid, const AuctionTerms& terms) {
    Tokens n_f = freezeout_token_count(bid, terms.reserve_price);
    Tokens n_d = bid.toehold_tokens + n_f;
    Money gain = bid.value_claim - terms.reserve_price;

    Money bound = gain * (terms.q - n_d);  // (1-t_d)(S-P0)q, exact
    Money one_plus_eps_bound =
        Money::mul_div_ceil(bound, terms.epsilon.den() + terms.epsilon.num(), terms.epsilon.den());
    // strictly above the bound even when the bound is zero
    Money d_v = max(one_plus_eps_bound, bound + Money::from_minor(1));

    Money d_p = n_f > 0 ? terms.reserve_price * n_f : Money{};

    Money base = terms.gamma.complement().times_ceil(terms.reserve_price * terms.q);
    Money d_s = max(base - d_v, Money{});

    return DepositSet{n_d, d_v, d_p, d_s};
}

BidError validate_bid(const Bid& bid, const AuctionTerms& terms,
                      std::optional<Money> available_cash) {
    if (bid.toehold_tokens < 0 || bid.toehold_tokens > terms.q ||
        Fraction(bid.toehold_tokens, terms.q) > terms.t_m) {
        return BidError::ToeholdExceedsCap;
    }
    if (bid.value_claim < terms.reserve_price) return BidError::ValueClaimBelowReserve;

    Money gain = bid.value_claim - terms.reserve_price;
    if (gain.is_zero()) {
        if (!bid.surplus_claim.is_zero()) return BidError::DegenerateClaim;
        return available_cash && *available_cash < required_deposits(bid, terms).cash_total()
                   ? BidError::InsufficientFunding
                   : BidError::None;
    }

    Tokens n_f = freezeout_token_count(bid, terms.reserve_price);
    if (n_f < 0 && -n_f > bid.toehold_tokens) return BidError::NegativeClaimExceedsToehold;

    // t_d = t_b + t_f <= t_m
    Tokens n_d = bid.toehold_tokens + n_f;
    if (Fraction(n_d, terms.q) > terms.t_m) return BidError::MarketSize;

    // R <= (t_m - t_b)(S - P0)q, compared exactly: catches a surplus claim
    // whose fractional remainder pushes past the cap while the rounded
    // freeze-out count stays inside it
    {
        Money lhs = bid.surplus_claim * terms.t_m.den();
        Money rhs = gain * (terms.t_m.num() * terms.q - bid.toehold_tokens * terms.t_m.den());
        if (lhs > rhs) return BidError::SurplusClaimExceedsCap;
    }

    if (available_cash && *available_cash < required_deposits(bid, terms).cash_total()) {
        return BidError::InsufficientFunding;
    }
    return BidError::None;
}

}  // namespace ccsim

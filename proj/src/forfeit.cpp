#include "ccsim/forfeit.hpp"

namespace ccsim {

namespace {

class ConstantDelta final : public DeltaProfile {
public:
    explicit ConstantDelta(Money amount) : amount_(amount) {}
    Money delta(Money, Money) const override { return amount_; }
    std::string describe() const override { return "constant:" + amount_.str(); }

private:
    Money amount_;
};

class ProportionalDelta final : public DeltaProfile {
public:
    ProportionalDelta(Fraction rate, Money floor_amount) : rate_(rate), floor_(floor_amount) {}
    Money delta(Money value_claim, Money outcome) const override {
        Money gap = value_claim - outcome;
        if (gap < Money{}) gap = Money{};
        return rate_.times_floor(gap) + floor_;
    }
    std::string describe() const override {
        return "proportional:" + rate_.str() + "+" + floor_.str();
    }

private:
    Fraction rate_;
    Money floor_;
};

class ZeroDelta final : public DeltaProfile {
public:
    Money delta(Money, Money) const override { return Money{}; }
    std::string describe() const override { return "zero"; }
};

Money clamp_to_escrow(Money amount, Money escrow) {
    if (amount < Money{}) return Money{};
    if (amount > escrow) return escrow;
    return amount;
}

/// phi with the claim argument overridden; shares everything else with fp.
Money phi_at_claim(const ForfeitParams& fp, Money claim, Money outcome_price) {
    if (outcome_price > claim) return Money{};
    if (outcome_price < fp.reserve_price) return fp.value_deposit;
    Money amount = (claim - outcome_price) * fp.other_holder_tokens +
                   fp.profile->delta(claim, outcome_price);
    return clamp_to_escrow(amount, fp.value_deposit);
}

}  // namespace

std::shared_ptr<const DeltaProfile> constant_delta_profile(Money amount) {
    return std::make_shared<ConstantDelta>(amount);
}

std::shared_ptr<const DeltaProfile> proportional_delta_profile(Fraction rate, Money floor_amount) {
    return std::make_shared<ProportionalDelta>(rate, floor_amount);
}

std::shared_ptr<const DeltaProfile> zero_delta_profile() {
    return std::make_shared<ZeroDelta>();
}

ForfeitParams ForfeitParams::from_record(const AuctionRecord& record,
                                         std::shared_ptr<const DeltaProfile> profile) {
    return ForfeitParams{record.deposits.value_deposit,
                         record.reserve_price,
                         record.winning_bid.value_claim,
                         record.q - record.deposit_tokens,
                         record.q,
                         std::move(profile)};
}

SettlementOutcome value_forfeit(const ForfeitParams& fp, Money outcome_price) {
    Money forfeit = phi_at_claim(fp, fp.value_claim, outcome_price);
    return SettlementOutcome{forfeit, fp.value_deposit - forfeit};
}

Money baseline_loss_penalty(const ForfeitParams& fp) {
    Money bound = (fp.value_claim - fp.reserve_price) * fp.other_holder_tokens;
    return max(fp.value_deposit - bound, Money{});
}

Money forfeit_differential(const ForfeitParams& fp, Money winning_claim, Money outcome_price) {
    Money previous = phi_at_claim(fp, fp.value_claim, outcome_price);
    Money credited = phi_at_claim(fp, winning_claim, outcome_price);
    return max(previous - credited, Money{});
}

SettlementOutcome transitional_forfeit(const ForfeitParams& fp, Money winning_claim,
                                       Money auction_start_price) {
    Money forfeit;
    if (auction_start_price >= fp.reserve_price) {
        forfeit = forfeit_differential(fp, winning_claim, auction_start_price);
    } else if (winning_claim >= fp.reserve_price) {
        // commitment to restore at least P0: credit measured at P0
        forfeit = forfeit_differential(fp, winning_claim, fp.reserve_price);
    } else {
        forfeit = fp.value_deposit;
    }
    if (forfeit > fp.value_deposit) forfeit = fp.value_deposit;
    if (forfeit < Money{}) forfeit = Money{};
    return SettlementOutcome{forfeit, fp.value_deposit - forfeit};
}

SuretySettlement surety_settlement(Money surety_deposit, Money value_deposit,
                                   Money reserve_price, Money new_reserve_price,
                                   Money winning_claim, Tokens q) {
    Money h = max((reserve_price - new_reserve_price) * q, Money{});
    Money h_star = max(h - value_deposit, Money{});
    Money b = max((reserve_price - winning_claim) * q, Money{});
    Money returned = max(max(surety_deposit - b, surety_deposit - h_star), Money{});
    return SuretySettlement{returned, surety_deposit - returned, h, h_star, b};
}

bool delta_profile_positive_on_grid(const DeltaProfile& profile, Money reserve_price,
                                    Money value_claim, int grid_points) {
    if (value_claim < reserve_price) return true;
    std::int64_t span = (value_claim - reserve_price).minor();
    for (int i = 0; i <= grid_points; ++i) {
        Money x = reserve_price +
                  Money::from_minor(static_cast<std::int64_t>(__int128(span) * i / grid_points));
        if (profile.delta(value_claim, x) <= Money{}) return false;
    }
    return true;
}

bool forfeit_monotone_in_claim_on_grid(const ForfeitParams& fp, int grid_points) {
    std::int64_t span = (fp.value_claim - fp.reserve_price).minor();
    if (span <= 0) return true;
    for (int xi = 0; xi <= grid_points; ++xi) {
        Money x = fp.reserve_price +
                  Money::from_minor(static_cast<std::int64_t>(__int128(span) * xi / grid_points));
        Money prev = phi_at_claim(fp, x, x);  // claim == outcome, lowest claim of interest
        for (int si = 1; si <= grid_points; ++si) {
            Money claim = x + Money::from_minor(static_cast<std::int64_t>(
                                  __int128((fp.value_claim - x).minor()) * si / grid_points));
            Money cur = phi_at_claim(fp, claim, x);
            if (cur < prev) return false;
            prev = cur;
        }
    }
    return true;
}

}  // namespace ccsim

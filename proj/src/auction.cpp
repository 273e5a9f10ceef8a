#include "ccsim/auction.hpp"

#include <algorithm>

namespace ccsim {

namespace {

/// Largest integer R satisfying R·den <= (t_m.num·q - n_b·den)(S - P0).
Money max_surplus_claim(const BidIntent& intent, const AuctionTerms& terms) {
    Money gain = intent.value_claim - terms.reserve_price;
    Money rhs = gain * (terms.t_m.num() * terms.q - intent.toehold_tokens * terms.t_m.den());
    return Money::mul_div_floor(rhs, 1, terms.t_m.den());
}

}  // namespace

Money min_valid_a(const BidIntent& intent, const AuctionTerms& terms) {
    return (intent.value_claim - terms.reserve_price) * (terms.q - intent.toehold_tokens) -
           max_surplus_claim(intent, terms);
}

Money max_valid_a(const BidIntent& intent, const AuctionTerms& terms) {
    // R = -t_b·q·(S - P0): the whole toehold offered back at P0
    return (intent.value_claim - terms.reserve_price) * terms.q;
}

Bid bid_at_level(const BidIntent& intent, const AuctionTerms& terms, Money a) {
    Money r = (intent.value_claim - terms.reserve_price) * (terms.q - intent.toehold_tokens) - a;
    return Bid{intent.value_claim, r, intent.toehold_tokens, intent.bidder_id};
}

AuctionOutcome run_english_auction(const AuctionSetup& setup,
                                   const std::vector<BidIntent>& intents,
                                   const std::vector<Money>* available_cash,
                                   bool winner_r_raise) {
    const AuctionTerms& terms = setup.terms;
    const Money reserve = setup.increment;  // just above zero

    AuctionOutcome out;
    for (std::size_t i = 0; i < intents.size(); ++i) {
        const BidIntent& intent = intents[i];
        Money floor_a = max(min_valid_a(intent, terms), reserve);
        Money exit_a = min(intent.exit_a, max_valid_a(intent, terms));
        Bid entry_bid = bid_at_level(intent, terms, floor_a);
        BidError err = validate_bid(entry_bid, terms);
        if (err != BidError::None) {
            out.rejected.push_back({intent.bidder_id, err});
            continue;
        }
        if (exit_a < floor_a) {
            // cannot stand anywhere at or above its own validity floor
            out.rejected.push_back({intent.bidder_id, BidError::SurplusClaimExceedsCap});
            continue;
        }
        DepositSet entry_deposits = required_deposits(entry_bid, terms);
        if (available_cash) {
            // worst case across the clock path: largest D_v + D_s (at exit)
            // plus largest D_p (at entry)
            DepositSet exit_deposits = required_deposits(bid_at_level(intent, terms, exit_a), terms);
            Money worst = exit_deposits.value_deposit + exit_deposits.surety_deposit +
                          entry_deposits.purchase_deposit;
            if ((*available_cash)[i] < worst) {
                out.rejected.push_back({intent.bidder_id, BidError::InsufficientFunding});
                continue;
            }
        }
        out.entries.push_back(AuctionEntry{intent, floor_a, exit_a, entry_deposits});
    }

    if (out.entries.empty()) {
        out.is_void = true;
        return out;
    }

    // winner: highest exit level, ties to the earliest arrival
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.entries.size(); ++i) {
        if (out.entries[i].exit_a > out.entries[best].exit_a) best = i;
    }
    out.winner_index = best;

    Money second;
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
        if (i == best) continue;
        second = max(second, out.entries[i].exit_a);
        out.exits.emplace_back(out.entries[i].intent.bidder_id, out.entries[i].exit_a);
    }
    std::stable_sort(out.exits.begin(), out.exits.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    out.second_best_a = second;

    const AuctionEntry& won = out.entries[best];
    Money clearing;
    if (winner_r_raise) {
        clearing = out.entries.size() == 1 ? max(reserve, won.entry_a)
                                           : max(second + setup.increment, won.entry_a);
        clearing = min(clearing, won.exit_a);
    } else {
        clearing = won.exit_a;
    }
    out.clearing_a = clearing;
    out.winning_bid = bid_at_level(won.intent, terms, clearing);
    out.winning_deposits = required_deposits(out.winning_bid, terms);
    out.freezeout_tokens = freezeout_token_count(out.winning_bid, terms.reserve_price);
    return out;
}

VotePool VotePool::sized_for(Tokens deposit_tokens, Tokens voting_tokens) {
    Tokens v = voting_tokens - 2 * deposit_tokens + 1;
    if (v < 0) v = 0;
    return VotePool{deposit_tokens, v};
}

bool VotePool::has_majority(Tokens voting_tokens) const {
    // v + n_d > (q_T + v)/2, compared in doubled units to stay integral
    return 2 * (extra_votes + deposit_tokens) > voting_tokens + extra_votes;
}

bool VotePool::meets_threshold(Tokens voting_tokens, const Fraction& threshold,
                               bool include_pool_votes) const {
    Tokens control = deposit_tokens + (include_pool_votes ? extra_votes : 0);
    Tokens electorate = voting_tokens + (include_pool_votes ? extra_votes : 0);
    return __int128(control) * threshold.den() > __int128(threshold.num()) * electorate;
}

ClosingResult closing_steps(const AuctionRecord& draft, HolderRegistry& registry,
                            Tokens holder_purchase_capacity, Tokens market_maker_capacity) {
    ClosingResult result;

    auto entries = registry.snapshot_excluding(draft.winning_bid.bidder_id);
    for (const auto& [id, n] : entries) {
        result.snapshot.ids.push_back(id);
        result.snapshot.holdings.push_back(n);
    }
    result.snapshot.retained = result.snapshot.holdings;

    Tokens n_f = draft.freezeout_tokens;
    Tokens declared = draft.winning_bid.toehold_tokens;

    if (n_f >= 0) {
        auto sold = allocate_largest_remainder(n_f, result.snapshot.holdings);
        for (std::size_t i = 0; i < sold.size(); ++i) {
            if (sold[i] == 0) continue;
            registry.add(result.snapshot.ids[i], -sold[i]);
            result.snapshot.retained[i] -= sold[i];
            result.transfers.push_back(FreezeoutTransfer{
                result.snapshot.ids[i], sold[i], draft.reserve_price * sold[i]});
        }
        result.deposit_tokens = declared + n_f;
    } else {
        // sale leg: |t_f|q tokens offered at P0, T1 holders first, then
        // market makers; unsold tokens stay in the deposit
        Tokens to_sell = -n_f;
        Tokens holder_leg = std::min(to_sell, holder_purchase_capacity);
        if (holder_leg > 0) {
            auto bought = allocate_largest_remainder(holder_leg, result.snapshot.holdings);
            for (std::size_t i = 0; i < bought.size(); ++i) {
                if (bought[i] == 0) continue;
                registry.add(result.snapshot.ids[i], bought[i]);
                result.snapshot.retained[i] += bought[i];
                result.transfers.push_back(FreezeoutTransfer{
                    result.snapshot.ids[i], -bought[i], -(draft.reserve_price * bought[i])});
            }
        }
        Tokens mm_leg = std::min(to_sell - holder_leg, market_maker_capacity);
        result.market_maker_tokens = mm_leg;
        Tokens sold_total = holder_leg + mm_leg;
        result.unsold_sale_tokens = to_sell - sold_total;
        result.sale_proceeds = draft.reserve_price * sold_total;
        result.deposit_tokens = declared - sold_total;
    }

    result.pool = VotePool::sized_for(result.deposit_tokens, draft.q);
    return result;
}

}  // namespace ccsim

#pragma once

/// English auction ascending in the auction parameter A, plus the closing
/// steps that install the winner: T1 snapshot, freeze-out (or the sale leg
/// for negative surplus claims) and the dynamic vote pool.
///
/// The clock is simulated event-wise: bidders enter at their lowest valid
/// level, hold while the clock rises, and exit irrevocably at their chosen
/// level. Nothing observable happens between exit levels.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/mechanism.hpp"

namespace ccsim {

/// What a strategy submits: a value claim, the declared toehold, and the
/// highest A it will stay to. R at any clock level L is
/// (q - t_b·q)(S - P0) - L.
struct BidIntent {
    Money value_claim;
    Tokens toehold_tokens = 0;
    Money exit_a;
    std::string bidder_id;
};

struct AuctionSetup {
    AuctionTerms terms;
    Money increment;      // one clock step of A; the reserve level is one step above 0
    Tick opened_at = 0;   // T0
    Tick closes_at = 0;   // T1 = T0 + T_auction
};

/// Lowest A at which a bid with this claim/toehold is valid (the surplus
/// claim cap binds), and the highest (selling the whole toehold).
Money min_valid_a(const BidIntent& intent, const AuctionTerms& terms);
Money max_valid_a(const BidIntent& intent, const AuctionTerms& terms);

/// The bid standing at clock level `a`.
Bid bid_at_level(const BidIntent& intent, const AuctionTerms& terms, Money a);

struct AuctionEntry {
    BidIntent intent;
    Money entry_a;        // max(reserve, own floor)
    Money exit_a;         // clamped into [entry_a, max_valid_a]
    DepositSet entry_deposits;
};

struct RejectedBid {
    std::string bidder_id;
    BidError reason;
};

struct AuctionOutcome {
    bool is_void = false;
    std::vector<AuctionEntry> entries;    // arrival order
    std::vector<RejectedBid> rejected;
    std::size_t winner_index = 0;         // into entries
    Money clearing_a;
    Money second_best_a;                  // zero for a single bidder
    Bid winning_bid;                      // final R fixed at clearing
    DepositSet winning_deposits;
    Tokens freezeout_tokens = 0;
    std::vector<std::pair<std::string, Money>> exits;  // losers, ascending level
};

/// Runs the clock over the submitted intents. available_cash, when given per
/// bidder (parallel to intents), gates entry on worst-case deposit funding.
/// With winner_r_raise the winner settles one increment above the runner-up
/// (never below its own validity floor); otherwise at its own exit level.
AuctionOutcome run_english_auction(const AuctionSetup& setup,
                                   const std::vector<BidIntent>& intents,
                                   const std::vector<Money>* available_cash = nullptr,
                                   bool winner_r_raise = true);

struct VotePool {
    Tokens deposit_tokens = 0;  // t_d·q
    Tokens extra_votes = 0;     // v_T

    /// v_T = q_T - 2·t_d·q + 1, floored at zero; restores the majority
    /// condition v_T + t_d·q > (q_T + v_T)/2.
    static VotePool sized_for(Tokens deposit_tokens, Tokens voting_tokens);
    VotePool resized(Tokens voting_tokens) const {
        return sized_for(deposit_tokens, voting_tokens);
    }
    bool has_majority(Tokens voting_tokens) const;

    /// Control-side votes against an arbitrary threshold fraction; whether
    /// pool votes count toward supermajorities is the caller's policy flag.
    bool meets_threshold(Tokens voting_tokens, const Fraction& threshold,
                         bool include_pool_votes) const;
};

struct FreezeoutTransfer {
    HolderId holder;
    Tokens tokens;   // sold to (positive) or bought from (negative) the deposit
    Money cash;      // received from (positive) or paid to (negative) escrow
};

struct ClosingResult {
    HolderSnapshot snapshot;
    std::vector<FreezeoutTransfer> transfers;
    Tokens deposit_tokens = 0;        // actual t_d·q after the leg settles
    Tokens unsold_sale_tokens = 0;    // negative-t_f leg remainder
    Money sale_proceeds;              // paid to the bidder
    Tokens market_maker_tokens = 0;
    VotePool pool;
};

/// Auction Closing Steps over a live registry. The winner's declared toehold
/// must already sit in escrow (not in the registry). Mutates the registry.
ClosingResult closing_steps(const AuctionRecord& draft, HolderRegistry& registry,
                            Tokens holder_purchase_capacity = 0,
                            Tokens market_maker_capacity = 0);

}  // namespace ccsim

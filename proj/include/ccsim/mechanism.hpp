#pragma once

/// Domain types and bid algebra shared by the whole engine.
///
/// Quantity conventions, used everywhere:
///   - token counts are integers (Tokens);
///   - prices are Money per token, totals are Money;
///   - a proportion written t·q in the mechanism is always an integer token
///     count here (the toehold is a real holding, the freeze-out is rounded
///     down to whole tokens), which keeps every settlement product exact.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccsim/fraction.hpp"
#include "ccsim/money.hpp"

namespace ccsim {

using Tokens = std::int64_t;
using Tick = std::int64_t;
using HolderId = std::string;  // ascending order = lexicographic

/// Private pair (V, C): per-token value outcome and total cost.
struct BusinessPlan {
    Money value_outcome;  // V, per token
    Money cost;           // C, total, >= 0

    /// psi = (V - P0)·q - C
    Money social_surplus(Money reserve_price, Tokens q) const {
        return (value_outcome - reserve_price) * q - cost;
    }
};

/// The bid triple beta = (S, R, t_b). The toehold is carried as a token count.
struct Bid {
    Money value_claim;       // S, per token, >= P0
    Money surplus_claim;     // R, total; negative allowed
    Tokens toehold_tokens;   // t_b·q
    std::string bidder_id;
};

enum class BidError {
    None,
    ValueClaimBelowReserve,   // S < P0
    DegenerateClaim,          // S == P0 with R != 0
    SurplusClaimExceedsCap,   // R > (t_m - t_b)(S - P0)q
    MarketSize,               // t_d > t_m
    ToeholdExceedsCap,        // t_b > t_m or t_b < 0 or t_b > q
    NegativeClaimExceedsToehold,  // R < 0 with |t_f| > t_b
    InsufficientFunding,
};

const char* bid_error_name(BidError e);

/// Static auction parameters shared by mechanism formulas.
struct AuctionTerms {
    Money reserve_price;  // P0 per token
    Tokens q = 0;         // tokens outstanding
    Fraction t_m;         // market size cap, in (0,1)
    Fraction gamma;       // surety scale, <= 1
    Fraction epsilon;     // value deposit margin, > 0 in the standard case
};

struct DepositSet {
    Tokens token_deposit = 0;  // t_d·q
    Money value_deposit;       // D_v
    Money purchase_deposit;    // D_p
    Money surety_deposit;      // D_s

    Money cash_total() const { return value_deposit + purchase_deposit + surety_deposit; }
};

/// Map of holder -> token count; freeze-outs and flush sales conserve totals.
class HolderRegistry {
public:
    HolderRegistry() = default;

    Tokens total() const { return total_; }
    Tokens balance(const HolderId& id) const;
    void set(const HolderId& id, Tokens count);
    void add(const HolderId& id, Tokens delta);
    const std::map<HolderId, Tokens>& entries() const { return holdings_; }

    /// Everyone except `excluded`, zero balances dropped, ascending id.
    std::vector<std::pair<HolderId, Tokens>> snapshot_excluding(const HolderId& excluded) const;

private:
    std::map<HolderId, Tokens> holdings_;
    Tokens total_ = 0;
};

/// Snapshot taken at auction close: pre-freeze-out holdings and the amounts
/// retained once the closing steps have run. Deposit settlements pay these
/// identities, not whoever holds the tokens later.
struct HolderSnapshot {
    std::vector<HolderId> ids;        // ascending
    std::vector<Tokens> holdings;     // at T1, before the freeze-out
    std::vector<Tokens> retained;     // after the freeze-out / sale leg
};

struct AuctionRecord {
    Tick opened_at = 0;       // T0
    Tick closed_at = 0;       // T1
    Money reserve_price;      // P0
    Tokens q = 0;
    Bid winning_bid;
    Money auction_parameter;  // clearing A
    Money second_best_a;      // A2*, zero when there was a single bidder
    DepositSet deposits;
    Tokens freezeout_tokens = 0;  // t_f·q, signed
    Tokens deposit_tokens = 0;    // t_d·q after the closing steps
    HolderSnapshot t1_snapshot;
};

// -- Operations ------------------------------------------------------------

/// A = (1 - t_b)(S - P0)·q - R, the added value promised to other holders.
Money auction_parameter(const Bid& bid, Money reserve_price, Tokens q);

/// Freeze-out token count: R/(S - P0) rounded down for R >= 0, toward zero
/// for R < 0. Throws on S == P0 with R != 0.
Tokens freezeout_token_count(const Bid& bid, Money reserve_price);

/// Freeze-out proportion t_f as an exact fraction of q.
Fraction freezeout_fraction(const Bid& bid, Money reserve_price, Tokens q);

/// The four deposits for a bid under the standard case:
///   D_v = (1-t_d)(S-P0)q·(1+eps), rounded up, never below the bound + 1 minor unit
///   D_p = max{t_f·q, 0}·P0 on the rounded freeze-out quantity
///   D_s = max{(1-gamma)·P0·q - D_v, 0}
DepositSet required_deposits(const Bid& bid, const AuctionTerms& terms);

/// Checks every bid constraint; first violated condition wins.
/// available_cash, when provided, must cover the three cash deposits.
BidError validate_bid(const Bid& bid, const AuctionTerms& terms,
                      std::optional<Money> available_cash = std::nullopt);

}  // namespace ccsim
